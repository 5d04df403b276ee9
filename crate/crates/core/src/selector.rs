//! Choosing between the bounded- and unbounded-alphabet bounds.
//!
//! The unbounded bound is favoured when the total mass is small relative to
//! `(-log(1-alpha)/alpha) (M/n) log(M/alpha)`. The plug-in uses `S_hat`, and a
//! relative indifference band around the threshold keeps the recommendation
//! stable when both bounds are practically equal.

use serde::Serialize;

use crate::error::{check_open_unit, Error, Result};
use crate::estimators::s_hat;
use crate::lambert::lambert_w0;
use crate::model::IncidenceSample;

/// Default relative half-width of the indifference band.
pub const DEFAULT_BAND: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Bounded,
    Unbounded,
    Indifferent,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Bounded => "bounded",
            Regime::Unbounded => "unbounded",
            Regime::Indifferent => "indifferent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rationale {
    pub reason: String,
    pub s_hat: f64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub band: f64,
    /// Alphabet size above which the unbounded bound is favoured at this `S_hat`
    /// (bisection on `M log(M/alpha)`).
    pub m_inversion: f64,
    /// Same root from the closed form `T / W0(T/alpha)`.
    pub m_inversion_lambert: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub regime: Regime,
    pub rationale: Rationale,
}

/// `(-log(1-alpha)/alpha) (M/n) log(M/alpha)`, or `(M/n) log(20 M)` when simplified.
pub fn heuristic_threshold(n: u64, m: u64, alpha: f64, simplified: bool) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    if n == 0 || m == 0 {
        return Err(Error::ParamOutOfRange {
            name: if n == 0 { "n" } else { "M" },
            value: 0.0,
            expected: "must be >= 1",
        });
    }
    let ratio = m as f64 / n as f64;
    Ok(if simplified {
        ratio * (20.0 * m as f64).ln()
    } else {
        (-(-alpha).ln_1p() / alpha) * ratio * (m as f64 / alpha).ln()
    })
}

/// Right-hand side `T = S n alpha / (-log(1-alpha))` of `M log(M/alpha) = T`.
fn inversion_target(s: f64, n: u64, alpha: f64) -> f64 {
    s * n as f64 * alpha / -(-alpha).ln_1p()
}

/// Root of `M log(M/alpha) = S n alpha / (-log(1-alpha))` by bisection; the map
/// is strictly increasing on `[alpha, inf)`. Returns `alpha` when `S <= 0`.
pub fn m_inversion(s: f64, n: u64, alpha: f64) -> f64 {
    let target = inversion_target(s, n, alpha);
    if target.is_nan() || target <= 0.0 {
        return alpha;
    }
    let f = |m: f64| m * (m / alpha).ln();
    let mut lo = alpha;
    let mut hi = alpha.max(1.0) * 2.0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Closed form of the same root, `T / W0(T/alpha)`.
pub fn m_inversion_lambert(s: f64, n: u64, alpha: f64) -> Result<f64> {
    let target = inversion_target(s, n, alpha);
    if target.is_nan() || target <= 0.0 {
        return Ok(alpha);
    }
    Ok(target / lambert_w0(target / alpha)?)
}

/// Decision from a total-mass value (true `S` or its estimate).
pub fn recommend_from_total_mass(s: f64, n: u64, m: Option<u64>, alpha: f64, band: f64) -> Result<Recommendation> {
    check_open_unit("alpha", alpha)?;
    if !(0.0..1.0).contains(&band) {
        return Err(Error::ParamOutOfRange {
            name: "band",
            value: band,
            expected: "must lie in [0, 1)",
        });
    }
    let m_inv = m_inversion(s, n, alpha);
    let m_inv_w = m_inversion_lambert(s, n, alpha)?;
    let Some(m) = m else {
        return Ok(Recommendation {
            regime: Regime::Unbounded,
            rationale: Rationale {
                reason: "no alphabet size".into(),
                s_hat: s,
                n,
                m: None,
                threshold: None,
                band,
                m_inversion: m_inv,
                m_inversion_lambert: m_inv_w,
            },
        });
    };
    let threshold = heuristic_threshold(n, m, alpha, false)?;
    let (regime, reason) = if s < threshold * (1.0 - band) {
        (Regime::Unbounded, "total mass below threshold")
    } else if s > threshold * (1.0 + band) {
        (Regime::Bounded, "total mass above threshold")
    } else {
        (Regime::Indifferent, "total mass within indifference band")
    };
    Ok(Recommendation {
        regime,
        rationale: Rationale {
            reason: reason.into(),
            s_hat: s,
            n,
            m: Some(m),
            threshold: Some(threshold),
            band,
            m_inversion: m_inv,
            m_inversion_lambert: m_inv_w,
        },
    })
}

pub fn recommend_regime_with_band(
    sample: &IncidenceSample,
    m: Option<u64>,
    alpha: f64,
    band: f64,
) -> Result<Recommendation> {
    recommend_from_total_mass(s_hat(sample), sample.n(), m, alpha, band)
}

/// Regime recommendation with the default indifference band.
pub fn recommend_regime(sample: &IncidenceSample, m: Option<u64>, alpha: f64) -> Result<Recommendation> {
    recommend_regime_with_band(sample, m, alpha, DEFAULT_BAND)
}
