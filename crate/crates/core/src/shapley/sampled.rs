use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AttributionReport, Coalition, CooperativeGame, GameError, Method, ShapleyError};
use crate::scalar::Scalar;

const SHARDS: usize = 64;

/// Memo of characteristic values. Values are pure functions of the
/// coalition, so sharing them across workers cannot change any result.
struct ValueCache<T> {
    shards: Vec<Mutex<HashMap<Coalition, T>>>,
}

impl<T: Scalar> ValueCache<T> {
    fn new() -> Self {
        Self {
            shards: (0..SHARDS).map(|_| Mutex::new(HashMap::new())).collect(),
        }
    }

    fn get_or_eval<G: CooperativeGame<T>>(&self, game: &G, c: &Coalition) -> Result<T, GameError> {
        let mut h = DefaultHasher::new();
        c.hash(&mut h);
        let shard = &self.shards[(h.finish() as usize) % SHARDS];
        if let Some(&v) = shard.lock().unwrap().get(c) {
            return Ok(v);
        }
        let v = game.value(c)?;
        shard.lock().unwrap().insert(c.clone(), v);
        Ok(v)
    }
}

/// Uniform random permutation for draw `index` of the given seed. Each
/// draw owns its own ChaCha stream, so the sample does not depend on how
/// draws are scheduled across workers.
pub fn permutation_for(players: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut order: Vec<usize> = (0..players).collect();
    order.shuffle(&mut rng);
    order
}

/// Monte Carlo Shapley values from `permutations` uniformly sampled
/// player orderings.
///
/// Each ordering contributes the marginal `v(pred(i) ∪ i) − v(pred(i))` of
/// every player; the marginals telescope, so every draw is exactly complete.
/// Attributions are per-feature means and `stderr` the sample standard
/// deviation over `√permutations`. Reductions run in draw order, making the
/// report bit-identical for a fixed seed on any number of threads.
pub fn shapley_sampled<T: Scalar, G: CooperativeGame<T>>(
    game: &G,
    permutations: usize,
    seed: u64,
) -> Result<AttributionReport<T>, ShapleyError> {
    let m = game.players();
    if m == 0 {
        return Err(ShapleyError::NoPlayers);
    }
    if permutations < 2 {
        return Err(ShapleyError::TooFewPermutations(permutations));
    }
    let cache = ValueCache::new();
    let v_empty = cache.get_or_eval(game, &Coalition::empty(m)).map_err(ShapleyError::Game)?;
    let v_full = cache.get_or_eval(game, &Coalition::full(m)).map_err(ShapleyError::Game)?;

    let draws: Vec<Result<Vec<T>, GameError>> = (0..permutations as u64)
        .into_par_iter()
        .map(|index| {
            let order = permutation_for(m, seed, index);
            let mut marginals = vec![T::zero(); m];
            let mut coalition = Coalition::empty(m);
            let mut prev = v_empty;
            for (pos, &player) in order.iter().enumerate() {
                coalition.insert(player);
                let cur = if pos + 1 == m {
                    v_full
                } else {
                    cache.get_or_eval(game, &coalition)?
                };
                marginals[player] = cur - prev;
                prev = cur;
            }
            Ok(marginals)
        })
        .collect();
    let draws = draws
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(ShapleyError::Game)?;

    let p = T::from_count(permutations);
    let mut attributions = Vec::with_capacity(m);
    let mut stderr = Vec::with_capacity(m);
    for i in 0..m {
        let column = draws.iter().map(|d| d[i]);
        let (lo, hi) = column
            .clone()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo == hi {
            attributions.push(lo);
            stderr.push(T::zero());
            continue;
        }
        let mean = column.clone().sum::<T>() / p;
        let ss: T = column.map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / T::from_count(permutations - 1)).sqrt();
        attributions.push(mean);
        stderr.push(sd / p.sqrt());
    }
    Ok(AttributionReport::assemble(
        attributions,
        v_full,
        v_empty,
        Method::Sampled { permutations, seed },
        Some(stderr),
    ))
}
