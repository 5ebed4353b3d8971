use std::fmt;

/// A subset of the players `{0, .., m-1}` stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coalition {
    words: Vec<u64>,
    players: usize,
}

impl Coalition {
    pub fn empty(players: usize) -> Self {
        Self {
            words: vec![0; players.div_ceil(64).max(1)],
            players,
        }
    }

    pub fn full(players: usize) -> Self {
        let mut c = Self::empty(players);
        for i in 0..players {
            c.insert(i);
        }
        c
    }

    /// Coalition whose members are the set bits of `mask` (players < 64).
    pub fn from_mask(players: usize, mask: u64) -> Self {
        debug_assert!(players <= 64);
        let mut c = Self::empty(players);
        c.words[0] = mask;
        c
    }

    pub fn from_members(players: usize, members: &[usize]) -> Self {
        let mut c = Self::empty(players);
        for &i in members {
            c.insert(i);
        }
        c
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.players && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.players, "player {i} out of range");
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.players, "player {i} out of range");
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn with(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.insert(i);
        c
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.players).filter(|&i| self.contains(i)).collect()
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

/// All coalitions of `players` that exclude every player in `excluded`,
/// enumerated in increasing bitmask order.
pub fn subsets_excluding(players: usize, excluded: &[usize]) -> impl Iterator<Item = Coalition> {
    assert!(players <= 63, "subset enumeration limited to 63 players");
    let free: Vec<usize> = (0..players).filter(|i| !excluded.contains(i)).collect();
    (0u64..1 << free.len()).map(move |bits| {
        let mut c = Coalition::empty(players);
        for (k, &p) in free.iter().enumerate() {
            if bits & (1 << k) != 0 {
                c.insert(p);
            }
        }
        c
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut c = Coalition::empty(70);
        assert!(c.is_empty());
        c.insert(0);
        c.insert(65);
        assert!(c.contains(65) && c.contains(0) && !c.contains(64));
        assert_eq!(c.len(), 2);
        assert_eq!(c.members(), vec![0, 65]);
        c.remove(0);
        assert_eq!(c.members(), vec![65]);
        assert_eq!(Coalition::full(3).members(), vec![0, 1, 2]);
        assert_eq!(Coalition::from_mask(4, 0b1010), Coalition::from_members(4, &[1, 3]));
    }

    #[test]
    fn subset_enumeration() {
        let all: Vec<_> = subsets_excluding(4, &[1, 2]).collect();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|c| !c.contains(1) && !c.contains(2)));
        assert_eq!(all[3].members(), vec![0, 3]);
    }
}
