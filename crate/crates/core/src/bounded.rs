//! Upper confidence bounds for the maximum unseen prevalence when the
//! alphabet size `M` is finite and known (or upper-bounded).
//!
//! All logarithms are natural. The data-dependent bound is the leading
//! expression `log(m_b/alpha + eps/alpha) / (n - b)`; its `O(1/n^2)` remainder
//! is not added, and validity is checked by Monte Carlo coverage instead.

use serde::{Deserialize, Serialize};

use crate::error::{check_at_least, check_open_unit, Error, Result};
use crate::model::{BoundEstimate, BoundMethod, IncidenceSample};

/// How the smoothing exponent `b` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BRule {
    /// `b = max(1, ln n)`.
    LogN,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedConfig {
    pub alpha: f64,
    pub delta: f64,
    pub b_rule: BRule,
}

impl BoundedConfig {
    pub fn new(alpha: f64, delta: f64, b_rule: BRule) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        check_open_unit("delta", delta)?;
        if alpha + delta >= 1.0 {
            return Err(Error::ParamOutOfRange {
                name: "alpha + delta",
                value: alpha + delta,
                expected: "must be < 1",
            });
        }
        if let BRule::Explicit(b) = b_rule {
            check_at_least("b", b, 1.0, "must be >= 1")?;
        }
        Ok(Self { alpha, delta, b_rule })
    }

    /// `delta = 0.01 alpha`, `b = ln n`.
    pub fn with_defaults(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.01 * alpha, BRule::LogN)
    }

    pub fn b_for(&self, n: u64) -> f64 {
        match self.b_rule {
            BRule::LogN => (n as f64).ln().max(1.0),
            BRule::Explicit(b) => b,
        }
    }
}

fn check_n_m(n: u64, m: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n",
            value: 0.0,
            expected: "must be >= 1",
        });
    }
    if m == 0 {
        return Err(Error::ParamOutOfRange {
            name: "M",
            value: 0.0,
            expected: "must be >= 1",
        });
    }
    Ok(())
}

/// Data-independent Bonferroni bound `log(M/alpha) / n`.
pub fn bonferroni_bound(n: u64, m: u64, alpha: f64) -> Result<f64> {
    check_n_m(n, m)?;
    check_open_unit("alpha", alpha)?;
    Ok((m as f64 / alpha).ln() / n as f64)
}

/// Worst-case bound at `r* = log(M/alpha)`:
/// `(M/alpha)^(1/r*) * r*/(r*+n) * exp(-n/(n+r*))`.
pub fn worst_case_bound(n: u64, m: u64, alpha: f64) -> Result<f64> {
    check_n_m(n, m)?;
    check_open_unit("alpha", alpha)?;
    let log_ratio = (m as f64 / alpha).ln();
    let r = log_ratio;
    let n = n as f64;
    Ok((log_ratio / r + (r / (r + n)).ln() - n / (n + r)).exp())
}

/// Bound under a homogeneous prevalence vector at exponent `r`:
/// `(M/alpha)^(1/r) * r/(n+r) * (n/(n+r))^(n/r)`.
pub fn homogeneous_bound(n: u64, m: u64, alpha: f64, r: f64) -> Result<f64> {
    check_n_m(n, m)?;
    check_open_unit("alpha", alpha)?;
    check_at_least("r", r, 1.0, "must be >= 1")?;
    let n = n as f64;
    let log_value = (m as f64 / alpha).ln() / r + (r / (n + r)).ln() - (n / r) * (r / n).ln_1p();
    Ok(log_value.exp())
}

/// Effective alphabet size `sum_{j<=M} (1 - N_j/n)^b`; the `M - distinct`
/// unobserved categories each contribute 1.
pub fn m_b_statistic(sample: &IncidenceSample, m: u64, b: f64) -> Result<f64> {
    check_at_least("b", b, 1.0, "must be >= 1")?;
    let distinct = sample.distinct();
    if m < distinct {
        return Err(Error::AlphabetTooSmall {
            declared: m,
            observed: distinct,
        });
    }
    let n = sample.n() as f64;
    let seen: f64 = sample
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| survival_power(c as f64 / n, b))
        .sum();
    Ok((m - distinct) as f64 + seen)
}

/// `(1 - x)^b` for `x` in [0, 1], accurate for small `x`.
pub(crate) fn survival_power(x: f64, b: f64) -> f64 {
    if x >= 1.0 {
        0.0
    } else {
        (b * (-x).ln_1p()).exp()
    }
}

/// McDiarmid correction `b * sqrt((M/n) log(1/delta))`.
pub fn mcdiarmid_correction(m: u64, n: u64, b: f64, delta: f64) -> f64 {
    b * ((m as f64 / n as f64) * (1.0 / delta).ln()).sqrt()
}

/// `log(m_b/alpha + eps/alpha) / (n - b)` for precomputed `m_b` and `eps`.
pub fn bounded_dd_value(m_b: f64, eps_corr: f64, n: u64, b: f64, alpha: f64) -> f64 {
    ((m_b + eps_corr) / alpha).ln() / (n as f64 - b)
}

/// Data-dependent bound at level `1 - alpha - delta`.
pub fn bounded_dd_bound(sample: &IncidenceSample, m: u64, cfg: &BoundedConfig) -> Result<BoundEstimate> {
    let n = sample.n();
    let b = cfg.b_for(n);
    if (n as f64) <= b {
        return Err(Error::Degenerate(format!("n = {n} must exceed b = {b}")));
    }
    let m_b = m_b_statistic(sample, m, b)?;
    let eps_corr = mcdiarmid_correction(m, n, b, cfg.delta);
    let raw = bounded_dd_value(m_b, eps_corr, n, b, cfg.alpha);
    let mut est = BoundEstimate::new(BoundMethod::BoundedDd, cfg.alpha, raw)
        .with_diag("m_b", m_b)
        .with_diag("eps_corr", eps_corr)
        .with_diag("b", b)
        .with_diag("M", m as f64)
        .with_diag("level", 1.0 - cfg.alpha - cfg.delta);
    est.delta = Some(cfg.delta);
    Ok(est)
}

pub fn bonferroni_estimate(n: u64, m: u64, alpha: f64) -> Result<BoundEstimate> {
    let raw = bonferroni_bound(n, m, alpha)?;
    Ok(BoundEstimate::new(BoundMethod::Bonferroni, alpha, raw).with_diag("M", m as f64))
}

pub fn worst_case_estimate(n: u64, m: u64, alpha: f64) -> Result<BoundEstimate> {
    let raw = worst_case_bound(n, m, alpha)?;
    Ok(BoundEstimate::new(BoundMethod::WorstCase, alpha, raw)
        .with_diag("M", m as f64)
        .with_diag("r_star", (m as f64 / alpha).ln()))
}

/// Which closed form [`prop1_threshold`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prop1Form {
    /// Unique `t` with `(1 - (1-t)^n)^k0 = 1 - alpha`.
    #[default]
    CoverageExact,
    /// `1 - (1 - alpha^(1/k0))^(1/n)`, the literal printed expression. It does
    /// not satisfy the coverage identity (at `k0 = 1` it covers with
    /// probability `alpha`).
    AsPrinted,
}

/// Threshold of the exact least-favourable rule with `k0` candidate species
/// at a common prevalence.
pub fn prop1_threshold(n: u64, k0: u64, alpha: f64, form: Prop1Form) -> Result<f64> {
    if n == 0 || k0 == 0 {
        return Err(Error::ParamOutOfRange {
            name: if n == 0 { "n" } else { "k0" },
            value: 0.0,
            expected: "must be >= 1",
        });
    }
    check_open_unit("alpha", alpha)?;
    let (n, k0) = (n as f64, k0 as f64);
    // y = 1 - (1 - alpha)^(1/k0)   or   1 - alpha^(1/k0)
    let y = match form {
        Prop1Form::CoverageExact => -((-alpha).ln_1p() / k0).exp_m1(),
        Prop1Form::AsPrinted => -(alpha.ln() / k0).exp_m1(),
    };
    Ok(-(y.ln() / n).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn bonferroni_spot_values() {
        assert!((bonferroni_bound(2000, 10_000, 0.05).unwrap() - 0.006_103_036_322_765_087).abs() < 1e-15);
        assert!((bonferroni_bound(1, 1, (-1f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!((bonferroni_bound(1000, 1500, 0.05).unwrap() - 0.010_308_952_660_644_292).abs() < 1e-15);
        assert!(bonferroni_bound(10, 10, 0.0).is_err());
        assert!(bonferroni_bound(10, 10, 1.0).is_err());
    }

    #[test]
    fn worst_case_spot_values() {
        let wc = worst_case_bound(2000, 10_000, 0.05).unwrap();
        assert!((wc - 0.0061035).abs() < 1e-6);
        assert!((wc - 0.006_102_923_582_335_79).abs() < 1e-14);
        // (M/alpha)^(1/r*) is e
        let r = (10_000f64 / 0.05).ln();
        assert_eq!(((10_000f64 / 0.05).ln() / r).exp(), E);
        let ratio = worst_case_bound(1_000_000, 1000, 0.05).unwrap() / bonferroni_bound(1_000_000, 1000, 0.05).unwrap();
        assert!((ratio - 1.0).abs() <= 1e-5);
    }

    #[test]
    fn homogeneous_spot_values() {
        let h = homogeneous_bound(1, 1, (-1f64).exp(), 1.0).unwrap();
        assert!((h - E / 4.0).abs() < 1e-14);
        let r = (10_000f64 / 0.05).ln();
        assert!((r - 12.20607).abs() < 1e-5);
        let h = homogeneous_bound(2000, 10_000, 0.05, r).unwrap();
        assert!(h > 0.0060 && h < 0.0062);
        assert!(h <= worst_case_bound(2000, 10_000, 0.05).unwrap());
        assert!(homogeneous_bound(10, 10, 0.05, 0.5).is_err());
    }

    #[test]
    fn homogeneous_below_worst_case_at_r_star() {
        for &(n, m) in &[(10u64, 5u64), (100, 1000), (5000, 20), (100_000, 100_000)] {
            let r = (m as f64 / 0.05).ln();
            if r < 1.0 {
                continue;
            }
            assert!(homogeneous_bound(n, m, 0.05, r).unwrap() <= worst_case_bound(n, m, 0.05).unwrap() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn gap_to_bonferroni_is_second_order() {
        for k in 3..=6 {
            let n = 10u64.pow(k);
            let gap = (worst_case_bound(n, 1000, 0.05).unwrap() - bonferroni_bound(n, 1000, 0.05).unwrap()).abs();
            let scaled = (n as f64).powi(2) * gap;
            assert!(scaled < 200.0, "n = {n}: n^2 gap = {scaled}");
        }
    }

    fn sample(n: u64, counts: &[(&str, u64)]) -> IncidenceSample {
        IncidenceSample::new(n, counts.iter().map(|&(s, c)| (s, c)), None).unwrap()
    }

    #[test]
    fn m_b_spot_values() {
        let empty = sample(10, &[]);
        assert_eq!(m_b_statistic(&empty, 100, 2.0).unwrap(), 100.0);
        let full = IncidenceSample::from_counts(5, vec![5; 4], None).unwrap();
        assert_eq!(m_b_statistic(&full, 4, 3.0).unwrap(), 0.0);
        let s = sample(4, &[("a", 2), ("b", 4), ("c", 0)]);
        assert!((m_b_statistic(&s, 3, 2.0).unwrap() - 1.25).abs() < 1e-15);
        assert!(matches!(m_b_statistic(&s, 1, 2.0), Err(Error::AlphabetTooSmall { .. })));
        assert!(m_b_statistic(&s, 3, 0.5).is_err());
    }

    #[test]
    fn bounded_dd_all_zero_counts() {
        let s = IncidenceSample::from_counts(1000, vec![0; 100], None).unwrap();
        let cfg = BoundedConfig::new(0.05, 0.0005, BRule::LogN).unwrap();
        let est = bounded_dd_bound(&s, 100, &cfg).unwrap();
        assert!((est.diagnostic_number("eps_corr").unwrap() - 6.0224).abs() < 1e-4);
        assert!((est.raw_value - 0.0077127).abs() < 1e-7);
        assert_eq!(est.delta, Some(0.0005));
        assert_eq!(est.beta, None);
        assert_eq!(est.method, BoundMethod::BoundedDd);
    }

    #[test]
    fn bounded_dd_all_seen() {
        let s = IncidenceSample::from_counts(50, vec![50; 10], None).unwrap();
        let cfg = BoundedConfig::with_defaults(0.05).unwrap();
        let est = bounded_dd_bound(&s, 10, &cfg).unwrap();
        let b = 50f64.ln();
        let eps = mcdiarmid_correction(10, 50, b, 0.0005);
        assert!((est.raw_value - (eps / 0.05).ln() / (50.0 - b)).abs() < 1e-15);
    }

    #[test]
    fn bounded_dd_nothing_seen_dominates_bonferroni() {
        for &(n, m) in &[(100u64, 10u64), (1000, 1500), (5000, 20)] {
            let s = IncidenceSample::from_counts(n, vec![0; m as usize], None).unwrap();
            let cfg = BoundedConfig::with_defaults(0.05).unwrap();
            let est = bounded_dd_bound(&s, m, &cfg).unwrap();
            assert!(est.raw_value >= bonferroni_bound(n, m, 0.05).unwrap());
        }
    }

    #[test]
    fn bounded_dd_errors() {
        let s = IncidenceSample::from_counts(2, vec![1, 1], None).unwrap();
        let cfg = BoundedConfig::new(0.05, 0.01, BRule::Explicit(2.0)).unwrap();
        assert!(matches!(bounded_dd_bound(&s, 2, &cfg), Err(Error::Degenerate(_))));
        let s = IncidenceSample::from_counts(100, vec![1, 1, 1], None).unwrap();
        let cfg = BoundedConfig::with_defaults(0.05).unwrap();
        assert!(matches!(
            bounded_dd_bound(&s, 2, &cfg),
            Err(Error::AlphabetTooSmall { .. })
        ));
        assert!(BoundedConfig::new(0.6, 0.5, BRule::LogN).is_err());
    }

    #[test]
    fn tiny_n_reports_clamped_value() {
        let s = IncidenceSample::from_counts(3, vec![0; 50], None).unwrap();
        let est = bounded_dd_bound(&s, 50, &BoundedConfig::with_defaults(0.05).unwrap()).unwrap();
        assert!(est.raw_value > 1.0);
        assert_eq!(est.reported_value, 1.0);
    }

    fn exact_coverage(n: u64, k0: u64, t: f64) -> f64 {
        // P(all k0 species seen) at q = t
        (1.0 - (1.0 - t).powf(n as f64)).powf(k0 as f64)
    }

    #[test]
    fn prop1_spot_values() {
        let t = prop1_threshold(100, 1, 0.05, Prop1Form::CoverageExact).unwrap();
        assert!((t - 0.029_513_049_607_039_93).abs() < 1e-15);
        assert!((t - (1.0 - 0.05f64.powf(0.01))).abs() < 1e-15);
        let t = prop1_threshold(1000, 10, 0.05, Prop1Form::CoverageExact).unwrap();
        assert!((t - 0.005_261_453_719_729_52).abs() < 1e-15);
        assert!(((10.0f64 / 0.05).ln() / 1000.0 - 0.0052983).abs() < 1e-7);
        assert!((exact_coverage(1000, 10, t) - 0.95).abs() < 1e-12);
    }

    #[test]
    fn prop1_printed_form_swaps_alpha_and_its_complement() {
        // k0 = 1: the printed t = 1 - (1-alpha)^(1/n) covers with probability alpha
        let printed = prop1_threshold(100, 1, 0.05, Prop1Form::AsPrinted).unwrap();
        assert!((exact_coverage(100, 1, printed) - 0.05).abs() < 1e-12);
        let printed = prop1_threshold(1000, 10, 0.05, Prop1Form::AsPrinted).unwrap();
        assert!((exact_coverage(1000, 10, printed) - 0.95).abs() > 0.1);
    }
}
