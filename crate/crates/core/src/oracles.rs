//! Exact least-favourable constructions and lower-bound functionals used to
//! check how tight the upper bounds are.

use serde::Serialize;

use crate::error::{check_open_unit, Error, Result};
use crate::model::PrevalenceModel;

/// `k0` species at prevalence `q`, the remaining `M - k0` at prevalence 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeastFavourableFinite {
    pub n: u64,
    pub m: u64,
    pub k0: u64,
    pub q: f64,
}

impl LeastFavourableFinite {
    pub fn new(n: u64, m: u64, k0: u64, q: f64) -> Result<Self> {
        if n == 0 || k0 == 0 || k0 > m {
            return Err(Error::ParamOutOfRange {
                name: "k0",
                value: k0 as f64,
                expected: "need n >= 1 and 1 <= k0 <= M",
            });
        }
        check_open_unit("q", q)?;
        Ok(Self { n, m, k0, q })
    }

    pub fn model(&self) -> Result<PrevalenceModel> {
        let mut probs = vec![self.q; self.k0 as usize];
        probs.resize(self.m as usize, 1.0);
        PrevalenceModel::explicit(probs)
    }

    /// `P(M_max = q) = 1 - (1 - (1-q)^n)^k0`; otherwise `M_max = 0`.
    pub fn prob_mmax_is_q(&self) -> f64 {
        1.0 - self.all_seen_prob()
    }

    fn all_seen_prob(&self) -> f64 {
        let miss = (self.n as f64 * (-self.q).ln_1p()).exp();
        (self.k0 as f64 * (-miss).ln_1p()).exp()
    }
}

/// `P(M_max <= t)` under the construction: 1 if `q <= t`, else the
/// probability that all `k0` species at `q` were seen.
pub fn prop1_exact_coverage(model: &LeastFavourableFinite, t: f64) -> f64 {
    if model.q <= t {
        1.0
    } else {
        model.all_seen_prob()
    }
}

/// `max { p_j : N_j = 0 }`, 0 when every species was observed.
///
/// # Panics
/// If `counts` and the model disagree in length.
pub fn mmax_exact(model: &PrevalenceModel, counts: &[u64]) -> f64 {
    assert_eq!(model.m(), counts.len(), "counts must align with model species");
    model
        .probs()
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c == 0)
        .map(|(&p, _)| p)
        .fold(0.0, f64::max)
}

/// `Phi(eps) = (1 - (1-eps)^n)^K` with `K = floor(S/eps)`; 1 when `K = 0`.
pub fn phi_eps(n: u64, s: f64, eps: f64) -> f64 {
    let k = (s / eps).floor();
    if k < 1.0 {
        return 1.0;
    }
    let miss = (n as f64 * (-eps).ln_1p()).exp();
    (k * (-miss).ln_1p()).exp()
}

pub const EPS_GRID_POINTS: usize = 10_000;
pub const EPS_GRID_MIN: f64 = 1e-8;

/// `inf { eps > 0 : Phi(eps) >= 1 - alpha }`.
///
/// A geometric grid on `[1e-8, 1)` brackets the first crossing, then
/// bisection narrows it below `1e-12`.
pub fn epsilon_star(n: u64, s: f64, alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    if n < 3 {
        return Err(Error::ParamOutOfRange {
            name: "n",
            value: n as f64,
            expected: "must be >= 3",
        });
    }
    if s.is_nan() || s <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "S",
            value: s,
            expected: "must be > 0",
        });
    }
    let target = 1.0 - alpha;
    let ok = |eps: f64| phi_eps(n, s, eps) >= target;

    let ratio = (1.0 / EPS_GRID_MIN).ln() / EPS_GRID_POINTS as f64;
    let mut lo = 0.0;
    let mut hi = 1.0;
    for i in 0..EPS_GRID_POINTS {
        let eps = EPS_GRID_MIN * (ratio * i as f64).exp();
        if ok(eps) {
            hi = eps;
            break;
        }
        lo = eps;
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `(log(S/gamma) + log n - log log n) / n` with `gamma = -log(1-alpha)`.
pub fn epsilon_star_asymptote(n: u64, s: f64, alpha: f64) -> f64 {
    let gamma = -(-alpha).ln_1p();
    let n = n as f64;
    ((s / gamma).ln() + n.ln() - n.ln().ln()) / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounded::{prop1_threshold, Prop1Form};
    use crate::unbounded::{oracle_r_star, u_r};

    #[test]
    fn exact_coverage_values() {
        let lf = LeastFavourableFinite::new(1, 2, 2, 0.5).unwrap();
        assert_eq!(prop1_exact_coverage(&lf, 0.5), 1.0);
        assert!((prop1_exact_coverage(&lf, 0.3) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn coverage_at_threshold_root() {
        for &(n, k0, alpha) in &[(100u64, 1u64, 0.05), (1000, 10, 0.05), (500, 3, 0.01)] {
            let t = prop1_threshold(n, k0, alpha, Prop1Form::CoverageExact).unwrap();
            let lf = LeastFavourableFinite::new(n, k0 + 5, k0, t + 1e-12).unwrap();
            assert!((prop1_exact_coverage(&lf, t) - (1.0 - alpha)).abs() < 1e-6);
        }
    }

    #[test]
    fn construction_model_layout() {
        let lf = LeastFavourableFinite::new(5, 4, 2, 0.1).unwrap();
        assert_eq!(lf.model().unwrap().probs(), &[0.1, 0.1, 1.0, 1.0]);
        assert!(LeastFavourableFinite::new(5, 1, 2, 0.1).is_err());
    }

    #[test]
    fn mmax_values() {
        let m = PrevalenceModel::explicit(vec![0.3, 0.2, 0.5]).unwrap();
        assert_eq!(mmax_exact(&m, &[1, 0, 0]), 0.5);
        assert_eq!(mmax_exact(&m, &[1, 2, 3]), 0.0);
    }

    #[test]
    fn phi_values() {
        assert!((phi_eps(1, 1.0, 0.5) - 0.25).abs() < 1e-15);
        assert_eq!(phi_eps(10, 0.1, 0.2), 1.0);
        // (1 - 0.99^1000)^100, 0.99^1000 = 4.317124741e-5
        let want = (1.0f64 - 4.317_124_741_065_786e-5).powi(100);
        assert!((phi_eps(1000, 1.0, 0.01) - want).abs() < 1e-12);
        assert!((phi_eps(1000, 1.0, 0.01) - 0.995693).abs() < 1e-6);
    }

    #[test]
    fn epsilon_star_defining_property() {
        let e = epsilon_star(1000, 1.0, 0.05).unwrap();
        assert!((e - 0.00794).abs() < 5e-4, "{e}");
        assert!(phi_eps(1000, 1.0, e) >= 0.95);
        assert!(phi_eps(1000, 1.0, e - 1e-9) < 0.95);
        assert!((epsilon_star_asymptote(1000, 1.0, 0.05) - 0.0079454).abs() < 1e-6);
    }

    #[test]
    fn sandwich_at_large_n() {
        let (s, alpha) = (1.0, 0.05);
        let mut last = f64::INFINITY;
        for &n in &[10_000u64, 100_000, 1_000_000] {
            let e = epsilon_star(n, s, alpha).unwrap();
            let r = oracle_r_star(n, s, alpha).unwrap();
            let ratio = u_r(n, r, s, alpha).unwrap() / e;
            assert!((1.0..=1.3).contains(&ratio), "n = {n}: {ratio}");
            assert!(ratio < last);
            last = ratio;
        }
    }
}
