//! Sample summaries: total-mass estimate, incidence-based sample coverage and
//! species accumulation curves.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{IncidenceMatrix, IncidenceSample};

/// Formula string reported alongside every coverage estimate.
pub const COVERAGE_FORMULA: &str =
    "C_hat = 1 - (Q1/U) * ((n-1)*Q1 / ((n-1)*Q1 + 2*Q2)), U = sum_j N_j, clamped to [0,1]";

pub const DEFAULT_PERMUTATIONS: usize = 50;

/// Curves over at most this many units are averaged over every ordering.
pub const EXHAUSTIVE_MAX_UNITS: usize = 8;

/// `S_hat = (1/n) sum_j N_j`, unbiased for the total mass.
pub fn s_hat(sample: &IncidenceSample) -> f64 {
    sample.u_total() as f64 / sample.n() as f64
}

/// Chao-Jost incidence coverage from its sufficient statistics. `None` when
/// `U = 0` or `n < 2`.
pub fn coverage_from_stats(n: u64, u_total: u64, q1: u64, q2: u64) -> Option<f64> {
    if u_total == 0 || n < 2 {
        return None;
    }
    if q1 == 0 {
        return Some(1.0);
    }
    let a = (n - 1) as f64 * q1 as f64;
    let shrink = a / (a + 2.0 * q2 as f64);
    let c = 1.0 - (q1 as f64 / u_total as f64) * shrink;
    Some(c.clamp(0.0, 1.0))
}

pub fn coverage_estimate(sample: &IncidenceSample) -> Option<f64> {
    coverage_from_stats(
        sample.n(),
        sample.u_total(),
        sample.frequency_of(1),
        sample.frequency_of(2),
    )
}

/// Mean number of distinct species among the first `k` units, k = 1..n,
/// averaged over `n_perms` random unit orderings (every ordering when
/// `n <= 8`).
pub fn accumulation_curve<R: Rng + ?Sized>(matrix: &IncidenceMatrix, n_perms: usize, rng: &mut R) -> Vec<f64> {
    let n = matrix.n_units();
    if n == 0 {
        return Vec::new();
    }
    let rows = matrix.row_supports();
    let mut totals = vec![0u64; n];
    let mut seen = vec![false; matrix.n_species()];
    let mut order: Vec<usize> = (0..n).collect();

    let mut accumulate = |order: &[usize], totals: &mut [u64]| {
        seen.iter_mut().for_each(|s| *s = false);
        let mut distinct = 0u64;
        for (k, &unit) in order.iter().enumerate() {
            for &j in &rows[unit] {
                if !seen[j] {
                    seen[j] = true;
                    distinct += 1;
                }
            }
            totals[k] += distinct;
        }
    };

    let runs = if n <= EXHAUSTIVE_MAX_UNITS {
        let mut runs = 0u64;
        loop {
            accumulate(&order, &mut totals);
            runs += 1;
            if !next_permutation(&mut order) {
                break;
            }
        }
        runs
    } else {
        let n_perms = n_perms.max(1);
        for _ in 0..n_perms {
            order.shuffle(rng);
            accumulate(&order, &mut totals);
        }
        n_perms as u64
    };
    totals.iter().map(|&t| t as f64 / runs as f64).collect()
}

/// Lexicographic successor; false once the last ordering has been produced.
fn next_permutation(xs: &mut [usize]) -> bool {
    let Some(i) = (1..xs.len()).rev().find(|&i| xs[i - 1] < xs[i]) else {
        return false;
    };
    let j = (i..xs.len()).rev().find(|&j| xs[j] > xs[i - 1]).unwrap();
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}
