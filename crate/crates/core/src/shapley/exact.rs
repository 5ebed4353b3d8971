use rayon::prelude::*;

use super::{AttributionReport, Coalition, CooperativeGame, Method, ShapleyError};
use crate::scalar::Scalar;

/// Default ceiling on the number of players for subset enumeration.
pub const DEFAULT_MAX_PLAYERS: usize = 25;

/// Shapley weights `w(s) = s!(m−s−1)!/m!` for `s = 0..m-1`, built by the
/// recurrence `w(s) = w(s−1)·s/(m−s)` from `w(0) = 1/m`.
pub fn shapley_weights<T: Scalar>(m: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(m);
    if m == 0 {
        return w;
    }
    w.push(T::one() / T::from_count(m));
    for s in 1..m {
        let prev = w[s - 1];
        w.push(prev * T::from_count(s) / T::from_count(m - s));
    }
    w
}

/// Evaluates `v(S)` for every bitmask `S` in increasing order. The first
/// failing coalition in mask order is reported.
pub fn characteristic_table<T: Scalar, G: CooperativeGame<T>>(game: &G) -> Result<Vec<T>, ShapleyError> {
    let m = game.players();
    let results: Vec<_> = (0u64..1 << m)
        .into_par_iter()
        .map(|mask| game.value(&Coalition::from_mask(m, mask)))
        .collect();
    results
        .into_iter()
        .collect::<Result<Vec<T>, _>>()
        .map_err(ShapleyError::Game)
}

/// Exact Shapley values by enumeration of all `2^m` coalitions, each
/// evaluated once, with the default player ceiling.
pub fn shapley_exact<T: Scalar, G: CooperativeGame<T>>(game: &G) -> Result<AttributionReport<T>, ShapleyError> {
    shapley_exact_with_limit(game, DEFAULT_MAX_PLAYERS)
}

pub fn shapley_exact_with_limit<T: Scalar, G: CooperativeGame<T>>(
    game: &G,
    max_players: usize,
) -> Result<AttributionReport<T>, ShapleyError> {
    let m = game.players();
    if m == 0 {
        return Err(ShapleyError::NoPlayers);
    }
    if m > max_players.min(63) {
        return Err(ShapleyError::TooManyPlayers {
            players: m,
            limit: max_players.min(63),
        });
    }
    let table = characteristic_table(game)?;
    Ok(shapley_from_table(m, &table))
}

/// Shapley values from a complete characteristic table (index = bitmask).
pub fn shapley_from_table<T: Scalar>(m: usize, table: &[T]) -> AttributionReport<T> {
    assert_eq!(table.len(), 1 << m, "table must hold 2^m values");
    let weights = shapley_weights::<T>(m);
    let attributions: Vec<T> = (0..m)
        .into_par_iter()
        .map(|i| {
            let bit = 1usize << i;
            let mut acc = T::zero();
            for mask in 0..table.len() {
                if mask & bit == 0 {
                    let s = mask.count_ones() as usize;
                    acc += weights[s] * (table[mask | bit] - table[mask]);
                }
            }
            acc
        })
        .collect();
    AttributionReport::assemble(attributions, table[table.len() - 1], table[0], Method::Exact, None)
}
