//! Prevalence generators, Bernoulli-product draws and singleton-error
//! contamination.
//!
//! Counts are drawn per species (`Binomial(n, p_j)`, exact BTPE/inversion via
//! `rand_distr`) when only counts are needed, and per cell when a matrix is
//! needed. Both give the same column-sum law.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{check_open_unit, Error, Result};
use crate::model::{synthetic_id, IncidenceMatrix, IncidenceSample, PrevalenceKind, PrevalenceModel};

/// Build the prevalence vector `p_1..p_M` for one of the generator families.
pub fn make_prevalences(kind: PrevalenceKind, param: f64, m: usize) -> Result<PrevalenceModel> {
    if m == 0 {
        return Err(Error::ParamOutOfRange {
            name: "M",
            value: 0.0,
            expected: "must be >= 1",
        });
    }
    let probs: Vec<f64> = match kind {
        PrevalenceKind::Zipf => {
            if !(param > 0.0 && param.is_finite()) {
                return Err(Error::ParamOutOfRange {
                    name: "gamma",
                    value: param,
                    expected: "must be > 0",
                });
            }
            (1..=m).map(|j| ((j + 1) as f64).powf(-param)).collect()
        }
        PrevalenceKind::Geometric => {
            check_open_unit("a", param)?;
            (1..=m).map(|j| param.powi(j as i32)).collect()
        }
        PrevalenceKind::TruncatedGeometric => {
            check_open_unit("a", param)?;
            (1..=m).map(|j| (1.0 - param).powi(j as i32 - 1)).collect()
        }
        PrevalenceKind::Homogeneous => {
            if !(param >= 1.0 && param.is_finite()) {
                return Err(Error::ParamOutOfRange {
                    name: "c",
                    value: param,
                    expected: "must be >= 1",
                });
            }
            vec![1.0 / param; m]
        }
        PrevalenceKind::Explicit => {
            return Err(Error::ParamOutOfRange {
                name: "kind",
                value: f64::NAN,
                expected: "explicit models are built with PrevalenceModel::explicit",
            })
        }
    };
    Ok(PrevalenceModel::from_parts(kind, param, probs))
}

/// Independent `Binomial(n, p_j)` counts, aligned with the model's species.
pub fn draw_counts<R: Rng + ?Sized>(model: &PrevalenceModel, n: u64, rng: &mut R) -> Vec<u64> {
    model
        .probs()
        .iter()
        .map(|&p| match p {
            p if p <= 0.0 => 0,
            p if p >= 1.0 => n,
            // p in (0,1) and n >= 0 are always accepted
            p => Binomial::new(n, p).expect("valid binomial").sample(rng),
        })
        .collect()
}

/// Counts for `n` sampling units, labelled `s1..sM`, with `declared_m = M`.
pub fn draw_sample<R: Rng + ?Sized>(model: &PrevalenceModel, n: u64, rng: &mut R) -> Result<IncidenceSample> {
    let counts = draw_counts(model, n, rng);
    IncidenceSample::from_counts(n, counts, Some(model.m() as u64))
}

/// Dense `n x M` matrix with independent `Bernoulli(p_j)` cells.
pub fn draw_incidence_matrix<R: Rng + ?Sized>(model: &PrevalenceModel, n: usize, rng: &mut R) -> IncidenceMatrix {
    let species = (0..model.m()).map(synthetic_id).collect();
    let columns = model
        .probs()
        .iter()
        .map(|&p| (0..n).map(|_| rng.random_bool(p)).collect())
        .collect();
    IncidenceMatrix::from_parts_unchecked(n, species, columns)
}

/// Singleton-error contamination.
///
/// Independently for every 1-entry, with probability `q` the entry is cleared
/// and a new column `err<k>` holding a single 1 in the same row is appended.
/// Returns the contaminated matrix and the number of appended columns.
pub fn contaminate<R: Rng + ?Sized>(matrix: IncidenceMatrix, q: f64, rng: &mut R) -> Result<(IncidenceMatrix, usize)> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParamOutOfRange {
            name: "q",
            value: q,
            expected: "must lie in [0, 1]",
        });
    }
    let (n, mut species, mut columns) = matrix.into_parts();
    let taken: HashSet<String> = species.iter().cloned().collect();
    let mut counter = 0usize;
    let mut next_label = || loop {
        counter += 1;
        let label = format!("err{counter}");
        if !taken.contains(&label) {
            return label;
        }
    };

    let mut appended = Vec::new();
    for col in columns.iter_mut() {
        for (row, cell) in col.iter_mut().enumerate() {
            if *cell && rng.random_bool(q) {
                *cell = false;
                appended.push(row);
            }
        }
    }
    let n_errors = appended.len();
    for row in appended {
        let mut col = vec![false; n];
        col[row] = true;
        species.push(next_label());
        columns.push(col);
    }
    Ok((IncidenceMatrix::from_parts_unchecked(n, species, columns), n_errors))
}
