//! Reproducible families of small urn models.
//!
//! Random choices all come from ChaCha8 seeded with a caller-supplied `u64`.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::rational::{ratio, Rational};
use crate::urn::UrnModel;

/// Row patterns for `n` urns: the unit rows, the uniform row, and the
/// permutations of one lopsided row (`(1/2, 1/4, 1/4)` for three urns,
/// `(3/4, 1/4)` for two).
pub fn grid_rows(n: usize) -> Vec<Vec<Rational>> {
    let mut rows = Vec::new();
    for j in 0..n {
        let mut row = vec![ratio(0, 1); n];
        row[j] = ratio(1, 1);
        rows.push(row);
    }
    if n == 1 {
        return rows;
    }
    rows.push(vec![ratio(1, n as i64); n]);
    match n {
        2 => {
            rows.push(vec![ratio(3, 4), ratio(1, 4)]);
            rows.push(vec![ratio(1, 4), ratio(3, 4)]);
        }
        3 => {
            for j in 0..3 {
                let mut row = vec![ratio(1, 4); 3];
                row[j] = ratio(1, 2);
                rows.push(row);
            }
        }
        _ => {}
    }
    rows
}

/// Every model with `1 <= m <= max_balls`, `1 <= n <= max_urns` whose rows
/// are drawn from [`grid_rows`]. Balls are exchangeable, so each multiset of
/// rows appears once (in nondecreasing row-index order).
pub fn grid_models(max_balls: usize, max_urns: usize) -> Vec<UrnModel> {
    let mut out = Vec::new();
    for n in 1..=max_urns {
        let rows = grid_rows(n);
        for m in 1..=max_balls {
            let mut picks = Vec::new();
            multisets(rows.len(), m, 0, &mut Vec::new(), &mut picks);
            for pick in picks {
                let probs = pick.iter().map(|&r| rows[r].clone()).collect();
                out.push(UrnModel::new(probs).expect("grid rows are distributions"));
            }
        }
    }
    out
}

fn multisets(kinds: usize, len: usize, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == len {
        out.push(current.clone());
        return;
    }
    for r in from..kinds {
        current.push(r);
        multisets(kinds, len, r, current, out);
        current.pop();
    }
}

/// A random distribution over `n` urns with integer weights in `0..=max_weight`.
pub fn random_row(rng: &mut ChaCha8Rng, n: usize, max_weight: u32) -> Vec<Rational> {
    loop {
        let w: Vec<u32> = (0..n).map(|_| rng.next_u32() % (max_weight + 1)).collect();
        let total: u32 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| ratio(x as i64, total as i64)).collect();
        }
    }
}

/// `count` models with `m, n ∈ {2, 3}` and independent random rows.
pub fn random_models(count: usize, seed: u64) -> Vec<UrnModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = 2 + (rng.next_u32() % 2) as usize;
            let n = 2 + (rng.next_u32() % 2) as usize;
            let probs = (0..m).map(|_| random_row(&mut rng, n, 6)).collect();
            UrnModel::new(probs).expect("normalised rows")
        })
        .collect()
}

/// The grid family for `m, n <= 3` plus 50 random models from `seed`.
pub fn standard_family(seed: u64) -> Vec<UrnModel> {
    let mut out = grid_models(3, 3);
    out.extend(random_models(50, seed));
    out
}
