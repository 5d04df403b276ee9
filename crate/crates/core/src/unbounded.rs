//! The r-norm bound for the maximum unseen prevalence over summable
//! prevalence sequences, with a data-driven upper confidence bound on the
//! total mass `S` plugged in.
//!
//! Only `S = sum_j p_j < inf` is assumed; the alphabet size is never used.
//! `u_r` is evaluated in log space so it stays finite for `n` up to 1e9.

use serde::{Deserialize, Serialize};

use crate::error::{check_at_least, check_open_unit, Error, Result};
use crate::model::{BoundEstimate, BoundMethod, IncidenceSample, PrevalenceModel};

/// Default `beta` for the total-mass confidence bound.
pub const DEFAULT_BETA: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnboundedConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl UnboundedConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        check_open_unit("beta", beta)?;
        if beta >= alpha {
            return Err(Error::ParamOutOfRange {
                name: "beta",
                value: beta,
                expected: "must be < alpha",
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn with_defaults(alpha: f64) -> Result<Self> {
        Self::new(alpha, DEFAULT_BETA)
    }
}

/// `U_n(r, S; level) = (S/level)^(1/r) ((r-1)/(n+r-1))^((r-1)/r) (n/(n+r-1))^(n/r)`,
/// with `0^0 = 1` at `r = 1`.
pub fn u_r(n: u64, r: f64, s: f64, level: f64) -> Result<f64> {
    check_at_least("r", r, 1.0, "must be >= 1")?;
    check_open_unit("level", level)?;
    if s.is_nan() || s <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "S",
            value: s,
            expected: "must be > 0",
        });
    }
    if n == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n",
            value: 0.0,
            expected: "must be >= 1",
        });
    }
    Ok(log_u_r(n as f64, r, s, level).exp())
}

fn log_u_r(n: f64, r: f64, s: f64, level: f64) -> f64 {
    let rm1 = r - 1.0;
    let mass = (s / level).ln() / r;
    let middle = if rm1 == 0.0 {
        0.0
    } else {
        (rm1 / r) * (rm1 / (n + rm1)).ln()
    };
    // (n/r) ln(n/(n+r-1)) = -(n/r) ln(1 + (r-1)/n)
    let tail = -(n / r) * (rm1 / n).ln_1p();
    mass + middle + tail
}

/// Asymptotic form `(r/(e n)) (S/level)^(1/r)`; diagnostic only.
pub fn u_r_asymptotic(n: u64, r: f64, s: f64, level: f64) -> f64 {
    r / (std::f64::consts::E * n as f64) * (s / level).powf(1.0 / r)
}

/// Oracle exponent `log(S/level) + log n - log log n`.
pub fn oracle_r_star(n: u64, s: f64, level: f64) -> Result<f64> {
    check_at_least("n", n as f64, 3.0, "must be >= 3")?;
    if s.is_nan() || s <= 0.0 || level.is_nan() || level <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: if s > 0.0 { "level" } else { "S" },
            value: if s > 0.0 { level } else { s },
            expected: "must be > 0",
        });
    }
    let n = n as f64;
    Ok((s / level).ln() + n.ln() - n.ln().ln())
}

fn hoeffding_half_width_sq(n: u64, beta: f64) -> f64 {
    (1.0 / beta).ln() / (2.0 * n as f64)
}

/// `S* = (sqrt(c) + sqrt(c + S_hat))^2` with `c = log(1/beta)/(2n)`.
pub fn total_mass_ucb_from(s_hat: f64, n: u64, beta: f64) -> f64 {
    let c = hoeffding_half_width_sq(n, beta);
    (c.sqrt() + (c + s_hat).sqrt()).powi(2)
}

/// Mirrored lower bound `max(0, sqrt(S_hat + c) - sqrt(c))^2`.
pub fn total_mass_lcb_from(s_hat: f64, n: u64, beta: f64) -> f64 {
    let c = hoeffding_half_width_sq(n, beta);
    ((s_hat + c).sqrt() - c.sqrt()).max(0.0).powi(2)
}

/// Upper confidence bound for the total mass: `P(S > S*) <= beta`.
pub fn total_mass_ucb(sample: &IncidenceSample, beta: f64) -> Result<f64> {
    check_open_unit("beta", beta)?;
    let s_hat = sample.u_total() as f64 / sample.n() as f64;
    Ok(total_mass_ucb_from(s_hat, sample.n(), beta))
}

/// `(r-1) + log(r-1) >= 1 + log log n` (inclusive).
pub fn condition_check(n: u64, r: f64) -> Result<bool> {
    check_at_least("n", n as f64, 3.0, "must be >= 3")?;
    if r.is_nan() || r <= 1.0 {
        return Err(Error::ParamOutOfRange {
            name: "r",
            value: r,
            expected: "must be > 1",
        });
    }
    let rm1 = r - 1.0;
    Ok(rm1 + rm1.ln() >= 1.0 + (n as f64).ln().ln())
}

/// Bound from the two sufficient statistics `n` and `sum_j N_j`.
pub fn unbounded_from_totals(n: u64, u_total: u64, cfg: &UnboundedConfig) -> Result<BoundEstimate> {
    check_at_least("n", n as f64, 3.0, "must be >= 3")?;
    let level = cfg.alpha - cfg.beta;
    let s_hat = u_total as f64 / n as f64;
    let s_star = total_mass_ucb_from(s_hat, n, cfg.beta);
    let r_star = oracle_r_star(n, s_star, level)?;
    if r_star < 1.0 {
        return Err(Error::Degenerate(format!("R* = {r_star} < 1 (n = {n}, S* = {s_star})")));
    }
    let raw = u_r(n, r_star, s_star, level)?;

    let s_lcb = total_mass_lcb_from(s_hat, n, cfg.beta);
    let condition_ok = s_lcb > 0.0
        && oracle_r_star(n, s_lcb, level)
            .ok()
            .filter(|&r| r > 1.0)
            .map(|r| condition_check(n, r).unwrap_or(false))
            .unwrap_or(false);

    let mut est = BoundEstimate::new(BoundMethod::UnboundedRnorm, cfg.alpha, raw)
        .with_diag("S_hat", s_hat)
        .with_diag("S_star", s_star)
        .with_diag("S_lcb", s_lcb)
        .with_diag("R_star", r_star)
        .with_diag("condition_ok", condition_ok)
        .with_diag("asymptotic", u_r_asymptotic(n, r_star, s_star, level))
        .with_diag("level", 1.0 - cfg.alpha);
    est.beta = Some(cfg.beta);
    Ok(est)
}

/// `U_n(R*, S*; alpha - beta)`, valid at level `1 - alpha` over all summable
/// prevalence sequences. `condition_ok = false` is a warning, not an error.
pub fn unbounded_bound(sample: &IncidenceSample, cfg: &UnboundedConfig) -> Result<BoundEstimate> {
    unbounded_from_totals(sample.n(), sample.u_total(), cfg)
}

/// `E[M_r(N)] = sum_j p_j^r (1 - p_j)^n`.
pub fn expected_mr(model: &PrevalenceModel, n: u64, r: f64) -> f64 {
    model
        .probs()
        .iter()
        .map(|&p| p.powf(r) * (1.0 - p).powf(n as f64))
        .sum()
}

/// Adversarial model defeating a data-independent candidate bound `U`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpossibilityDemo {
    pub n: u64,
    pub alpha: f64,
    pub candidate_u: f64,
    /// Number of species at prevalence `x`.
    pub copies: u64,
    pub x: f64,
    pub c: f64,
    /// Exact `P(M_max >= U) = 1 - (1 - (1-x)^n)^copies = c * alpha`.
    pub exceed_prob: f64,
}

impl ImpossibilityDemo {
    /// One species at prevalence 1 followed by `copies` species at `x`.
    pub fn model(&self) -> Result<PrevalenceModel> {
        let mut probs = Vec::with_capacity(self.copies as usize + 1);
        probs.push(1.0);
        probs.extend(std::iter::repeat_n(self.x, self.copies as usize));
        PrevalenceModel::explicit(probs)
    }
}

/// Largest number of copies the construction will materialise.
pub const MAX_DEMO_COPIES: u64 = 1 << 32;

/// Build a summable prevalence sequence under which `P(M_max >= U) > alpha`.
///
/// `copies` is the smallest `k` with `1 - (1 - (1-U)^n)^k > alpha`; the target
/// exceedance `c alpha` is the midpoint between `alpha` and that value, and
/// `x >= U` solves `1 - (1 - (1-x)^n)^k = c alpha`.
pub fn worstcase_impossibility_demo(n: u64, alpha: f64, candidate_u: f64) -> Result<ImpossibilityDemo> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("candidate_U", candidate_u)?;
    if n == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n",
            value: 0.0,
            expected: "must be >= 1",
        });
    }
    let nf = n as f64;
    // probability a single species at U stays unseen
    let unseen = (nf * (-candidate_u).ln_1p()).exp();
    let needed = (-alpha).ln_1p() / (-unseen).ln_1p();
    if !needed.is_finite() || needed >= MAX_DEMO_COPIES as f64 {
        return Err(Error::Degenerate(format!(
            "candidate U = {candidate_u} at n = {n} needs more than {MAX_DEMO_COPIES} species"
        )));
    }
    let copies = needed.floor() as u64 + 1;
    let k = copies as f64;
    let exceed_at_u = -(k * (-unseen).ln_1p()).exp_m1();
    let target = 0.5 * (alpha + exceed_at_u);
    let w = -((-target).ln_1p() / k).exp_m1();
    let x = -(w.ln() / nf).exp_m1();
    let exceed_prob = -(k * (-(nf * (-x).ln_1p()).exp()).ln_1p()).exp_m1();
    Ok(ImpossibilityDemo {
        n,
        alpha,
        candidate_u,
        copies,
        x,
        c: target / alpha,
        exceed_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_r_at_one_is_markov() {
        for &(n, s, l) in &[(1u64, 1.0, 0.5), (1000, 10.0, 0.05), (7, 0.3, 0.9)] {
            let u = u_r(n, 1.0, s, l).unwrap();
            assert!((u - s / l).abs() < 1e-12 * (s / l));
        }
    }

    #[test]
    fn u_r_spot_values() {
        let u = u_r(1, 2.0, 1.0, 0.5).unwrap();
        assert!((u - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let n = 1_000_000;
        let r = oracle_r_star(n, 1.0, 0.05).unwrap();
        assert!((r - 14.185_450_917_042_25).abs() < 1e-10);
        let u = u_r(n, r, 1.0, 0.05).unwrap();
        assert!((u - 1.4194e-5).abs() < 2e-8);
        let ratio = u * n as f64 / r;
        assert!((0.99..=1.01).contains(&ratio));
    }

    #[test]
    fn u_r_domain_errors() {
        assert!(u_r(10, 0.5, 1.0, 0.05).is_err());
        assert!(u_r(10, 2.0, 0.0, 0.05).is_err());
        assert!(u_r(10, 2.0, -1.0, 0.05).is_err());
    }

    #[test]
    fn asymptotic_pinning() {
        for k in 4..=6 {
            let n = 10u64.pow(k);
            let r = oracle_r_star(n, 1.0, 0.05).unwrap();
            let ratio = u_r(n, r, 1.0, 0.05).unwrap() * n as f64 / r;
            assert!((0.95..=1.05).contains(&ratio), "n = {n}: {ratio}");
        }
    }

    #[test]
    fn r_star_spot_values() {
        let r = oracle_r_star(1000, 10.4913, 0.04999).unwrap();
        assert!((r - 10.3216).abs() < 1e-4);
        let r = oracle_r_star(16, 1.0, 1.0).unwrap();
        assert!((r - 1.7528).abs() < 1e-4);
        let r = oracle_r_star(500, 0.2, 0.2).unwrap();
        assert!((r - (500f64.ln() - 500f64.ln().ln())).abs() < 1e-14);
        assert!(oracle_r_star(2, 1.0, 0.05).is_err());
    }

    #[test]
    fn total_mass_ucb_values() {
        let beta = 1e-5;
        let empty = IncidenceSample::from_counts(1000, vec![0; 3], None).unwrap();
        let s = total_mass_ucb(&empty, beta).unwrap();
        assert!((s - 2.0 * (1.0 / beta).ln() / 1000.0).abs() < 1e-15);
        assert!((total_mass_ucb_from(10.0, 1000, beta) - 10.491_503_609_491_41).abs() < 1e-10);
        for &sh in &[0.0, 0.1, 3.0, 250.0] {
            assert!(total_mass_ucb_from(sh, 50, 0.01) >= sh);
            assert!(total_mass_lcb_from(sh, 50, 0.01) <= sh);
        }
    }

    #[test]
    fn condition_values() {
        assert!(condition_check(1000, 10.3216).unwrap());
        assert!(!condition_check(1_000_000, 1.5).unwrap());
        assert!(condition_check(10, 1.0).is_err());
        // boundary: solve (r-1) + ln(r-1) = 1 + ln ln n by bisection, then nudge up
        let n = 1000u64;
        let target = 1.0 + (n as f64).ln().ln();
        let (mut lo, mut hi): (f64, f64) = (1.0 + 1e-9, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (mid - 1.0) + (mid - 1.0).ln() >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(condition_check(n, hi).unwrap());
        assert!(!condition_check(n, lo).unwrap());
    }

    #[test]
    fn unbounded_spot_value() {
        let cfg = UnboundedConfig::new(0.05, 1e-5).unwrap();
        let est = unbounded_from_totals(1000, 10_000, &cfg).unwrap();
        assert!((est.diagnostic_number("S_star").unwrap() - 10.491_503_609_491_41).abs() < 1e-10);
        assert!((est.diagnostic_number("R_star").unwrap() - 10.321_608_588_174_88).abs() < 1e-10);
        assert!((est.raw_value - 0.009_934_244_765_197_77).abs() < 1e-12);
        assert_eq!(est.beta, Some(1e-5));
        assert_eq!(est.delta, None);
        assert_eq!(est.diagnostic("condition_ok"), Some(&true.into()));
    }

    #[test]
    fn unbounded_empty_sample() {
        let cfg = UnboundedConfig::with_defaults(0.05).unwrap();
        let est = unbounded_from_totals(1000, 0, &cfg).unwrap();
        let s_star = est.diagnostic_number("S_star").unwrap();
        let r_star = est.diagnostic_number("R_star").unwrap();
        assert!((s_star - 0.023026).abs() < 1e-6);
        assert!((r_star - 4.199_905_097_882_59).abs() < 1e-10);
        assert_eq!(est.raw_value, u_r(1000, r_star, s_star, 0.05 - 1e-5).unwrap());
        // S_lcb = 0: the condition cannot be certified
        assert_eq!(est.diagnostic("condition_ok"), Some(&false.into()));
    }

    #[test]
    fn unbounded_monotone_in_s_hat() {
        let cfg = UnboundedConfig::with_defaults(0.05).unwrap();
        for &n in &[10u64, 100, 1000, 100_000] {
            let mut prev = 0.0;
            for u in (0..200).map(|i| i * n / 7) {
                let v = unbounded_from_totals(n, u, &cfg).unwrap().raw_value;
                assert!(v >= prev, "n = {n}, U = {u}");
                prev = v;
            }
        }
    }

    #[test]
    fn unbounded_rejects_degenerate_inputs() {
        let cfg = UnboundedConfig::with_defaults(0.05).unwrap();
        assert!(unbounded_from_totals(2, 0, &cfg).is_err());
        assert!(UnboundedConfig::new(0.05, 0.05).is_err());
        assert!(UnboundedConfig::new(0.05, 0.0).is_err());
    }

    #[test]
    fn expected_mr_grows_with_copies() {
        for &m in &[1usize, 10, 100] {
            let model = PrevalenceModel::explicit(vec![0.5; m]).unwrap();
            for &(n, r) in &[(1u64, 1.0), (5, 2.0), (20, 3.0)] {
                let expected = m as f64 * 0.5f64.powf(r + n as f64);
                assert!((expected_mr(&model, n, r) - expected).abs() <= 1e-15 * expected.max(1.0));
            }
        }
    }

    #[test]
    fn impossibility_small_case() {
        let d = worstcase_impossibility_demo(10, 0.1, 0.05).unwrap();
        assert!(d.x >= 0.05 && d.x < 1.0);
        assert!(d.c > 1.0 && d.c < 10.0);
        assert!(d.exceed_prob > 0.1);
        assert!((d.exceed_prob - d.c * d.alpha).abs() < 1e-12);
        assert_eq!(d.model().unwrap().m() as u64, d.copies + 1);
    }

    #[test]
    fn impossibility_needs_copies_for_large_u() {
        // a single species at U is seen too reliably; more copies are needed
        let d = worstcase_impossibility_demo(50, 0.05, 0.2).unwrap();
        assert!(d.copies > 1);
        assert!(d.x >= 0.2);
        assert!(d.exceed_prob > 0.05);
        assert!(worstcase_impossibility_demo(10_000, 0.05, 0.5).is_err());
    }
}
