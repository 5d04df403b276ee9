//! Principal branch of the Lambert W function on the real line.

use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;
const MAX_ITERATIONS: usize = 64;

/// `W0(x)`: the `w >= -1` with `w e^w = x`, for `x >= -1/e`.
///
/// Halley iteration from a branch-point series near `-1/e`, a log-based
/// guess on moderate arguments and the two-term asymptotic for large ones.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT - 4.0 * f64::EPSILON {
        return Err(Error::ParamOutOfRange {
            name: "x",
            value: x,
            expected: "must be >= -1/e",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x <= E {
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(x: f64) -> f64 {
        let w = lambert_w0(x).unwrap();
        (w * w.exp() - x).abs()
    }

    #[test]
    fn exact_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(BRANCH_POINT).unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn omega_constant_matches_fixed_point_iteration() {
        // w = exp(-w) converges (slowly, contraction ~0.567) to W(1)
        let mut w = 0.5f64;
        for _ in 0..200 {
            w = (-w).exp();
        }
        let got = lambert_w0(1.0).unwrap();
        assert!((got - w).abs() < 1e-14);
        assert!((got - 0.567_143_290_4).abs() < 1e-10);
    }

    #[test]
    fn relative_residual_over_decades() {
        for k in -6..=6 {
            let x = 10f64.powi(k);
            assert!(residual(x) <= 1e-12 * x, "x = {x}: {}", residual(x));
        }
    }

    #[test]
    fn residual_near_branch_point_and_large() {
        for &x in &[
            -0.3678, -0.36, -0.3, -0.2, -0.1, -1e-3, 0.5, 2.0, 3.0, 50.0, 1e10, 1e100, 1e300,
        ] {
            assert!(residual(x) <= 1e-12 * x.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn domain_error() {
        assert!(lambert_w0(-0.5).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
    }
}
