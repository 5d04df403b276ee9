//! Simulation sweeps behind the CSV-producing commands. Each replicate draws
//! from its own stream keyed by the grid point, so adding grid points or
//! replicates never changes existing rows.

use mmax_core::bounded::{bonferroni_bound, bounded_dd_bound, BoundedConfig};
use mmax_core::oracles::mmax_exact;
use mmax_core::sampler::{draw_sample, make_prevalences};
use mmax_core::selector::{heuristic_threshold, recommend_from_total_mass, Regime, DEFAULT_BAND};
use mmax_core::stopping::compensated_sum;
use mmax_core::unbounded::{unbounded_bound, UnboundedConfig};
use mmax_core::{IncidenceSample, PrevalenceKind, Result, SeededStream};
use rayon::prelude::*;

pub const INTERVAL_METHODS: [&str; 3] = ["bonferroni", "bounded", "unbounded"];

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    pub scenario: PrevalenceKind,
    pub param: f64,
    pub n: u64,
    pub m: u64,
    pub rep: u64,
    pub method: &'static str,
    pub value: f64,
    pub covered: bool,
    pub mmax_true: f64,
}

/// Reported values of the three interval methods on one sample.
pub fn interval_values(sample: &IncidenceSample, m: u64, alpha: f64) -> Result<[f64; 3]> {
    let bcfg = BoundedConfig::with_defaults(alpha)?;
    let ucfg = UnboundedConfig::with_defaults(alpha)?;
    Ok([
        bonferroni_bound(sample.n(), m, alpha)?.min(1.0),
        bounded_dd_bound(sample, m, &bcfg)?.reported_value,
        unbounded_bound(sample, &ucfg)?.reported_value,
    ])
}

/// One row per (grid point, replicate, method), in that order.
pub fn interval_rows(
    kind: PrevalenceKind,
    param: f64,
    points: &[(u64, u64)],
    reps: u64,
    alpha: f64,
    seed: u64,
) -> Result<Vec<IntervalRow>> {
    let models = points
        .iter()
        .map(|&(_, m)| make_prevalences(kind, param, m as usize))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..points.len()).flat_map(|i| (0..reps).map(move |r| (i, r))).collect();
    let chunks = jobs
        .par_iter()
        .map(|&(i, rep)| {
            let (n, m) = points[i];
            let model = &models[i];
            let key = format!("intervals|{kind}|{param:e}|{n}|{m}");
            let mut rng = SeededStream::for_replicate(seed, &key, rep).rng();
            let sample = draw_sample(model, n, &mut rng)?;
            let truth = mmax_exact(model, sample.counts());
            let values = interval_values(&sample, m, alpha)?;
            Ok(INTERVAL_METHODS
                .iter()
                .zip(values)
                .map(|(&method, value)| IntervalRow {
                    scenario: kind,
                    param,
                    n,
                    m,
                    rep,
                    method,
                    value,
                    covered: truth <= value,
                    mmax_true: truth,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Means of the three interval methods over `reps` samples of one configuration.
pub fn mean_interval_lengths(
    kind: PrevalenceKind,
    param: f64,
    n: u64,
    m: u64,
    reps: u64,
    alpha: f64,
    seed: u64,
) -> Result<[f64; 3]> {
    let rows = interval_rows(kind, param, &[(n, m)], reps, alpha, seed)?;
    let mut means = [0.0; 3];
    for (k, method) in INTERVAL_METHODS.iter().enumerate() {
        let vals = rows.iter().filter(|r| r.method == *method).map(|r| r.value);
        means[k] = compensated_sum(vals) / reps as f64;
    }
    Ok(means)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRow {
    pub family: PrevalenceKind,
    pub param: f64,
    pub s_true: f64,
    pub threshold: f64,
    pub threshold_simplified: f64,
    pub regime: Regime,
    pub mean_bonferroni: f64,
    pub mean_bounded: f64,
    pub mean_unbounded: f64,
}

pub fn regime_rows(
    configs: &[(PrevalenceKind, f64)],
    n: u64,
    m: u64,
    reps: u64,
    alpha: f64,
    seed: u64,
) -> Result<Vec<RegimeRow>> {
    let threshold = heuristic_threshold(n, m, alpha, false)?;
    let threshold_simplified = heuristic_threshold(n, m, alpha, true)?;
    configs
        .iter()
        .map(|&(family, param)| {
            let model = make_prevalences(family, param, m as usize)?;
            let regime = recommend_from_total_mass(model.s_true(), n, Some(m), alpha, DEFAULT_BAND)?.regime;
            let [mean_bonferroni, mean_bounded, mean_unbounded] =
                mean_interval_lengths(family, param, n, m, reps, alpha, seed)?;
            Ok(RegimeRow {
                family,
                param,
                s_true: model.s_true(),
                threshold,
                threshold_simplified,
                regime,
                mean_bonferroni,
                mean_bounded,
                mean_unbounded,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvershootRow {
    pub gamma: f64,
    pub n: u64,
    pub m_true: u64,
    pub m_add: u64,
    pub mean_bounded: f64,
    pub mean_unbounded: f64,
    /// `mean_bounded / mean_bounded(M_add = 0) - 1`.
    pub rel_change: f64,
}

/// Bounded bound at `M_true + M_add` on the same Zipf samples for every
/// `M_add`, next to the (M-free) unbounded bound.
pub fn overshoot_rows(
    gamma: f64,
    n: u64,
    m_true: u64,
    m_add_grid: &[u64],
    reps: u64,
    alpha: f64,
    seed: u64,
) -> Result<Vec<OvershootRow>> {
    let model = make_prevalences(PrevalenceKind::Zipf, gamma, m_true as usize)?;
    let bcfg = BoundedConfig::with_defaults(alpha)?;
    let ucfg = UnboundedConfig::with_defaults(alpha)?;
    let key = format!("overshoot|{gamma:e}|{n}|{m_true}");
    let samples = (0..reps)
        .into_par_iter()
        .map(|rep| draw_sample(&model, n, &mut SeededStream::for_replicate(seed, &key, rep).rng()))
        .collect::<Result<Vec<_>>>()?;
    let mean_bounded_at = |m: u64| -> Result<f64> {
        let vals = samples
            .iter()
            .map(|s| Ok(bounded_dd_bound(s, m, &bcfg)?.reported_value))
            .collect::<Result<Vec<f64>>>()?;
        Ok(compensated_sum(vals) / reps as f64)
    };
    let unb = samples
        .iter()
        .map(|s| Ok(unbounded_bound(s, &ucfg)?.reported_value))
        .collect::<Result<Vec<f64>>>()?;
    let mean_unbounded = compensated_sum(unb) / reps as f64;
    let base = mean_bounded_at(m_true)?;
    m_add_grid
        .iter()
        .map(|&m_add| {
            let mean_bounded = mean_bounded_at(m_true + m_add)?;
            Ok(OvershootRow {
                gamma,
                n,
                m_true,
                m_add,
                mean_bounded,
                mean_unbounded,
                rel_change: mean_bounded / base - 1.0,
            })
        })
        .collect()
}
