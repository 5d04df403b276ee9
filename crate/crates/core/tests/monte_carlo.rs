//! Monte Carlo checks against closed-form oracles. All seeds are fixed, so
//! each test is deterministic; tolerances are three standard errors.

use mmax_core::estimators::s_hat;
use mmax_core::oracles::{mmax_exact, LeastFavourableFinite};
use mmax_core::sampler::{contaminate, draw_counts, draw_incidence_matrix, draw_sample, make_prevalences};
use mmax_core::stopping::{run_stopping, StoppingPolicy};
use mmax_core::unbounded::{total_mass_ucb, u_r, worstcase_impossibility_demo};
use mmax_core::{PrevalenceKind, PrevalenceModel, SeededStream};

fn binomial_se(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

#[test]
fn s_hat_is_unbiased() {
    let model = make_prevalences(PrevalenceKind::Zipf, 1.02, 60).unwrap();
    let reps = 10_000;
    let mut rng = SeededStream::new(101, 0).rng();
    let xs: Vec<f64> = (0..reps)
        .map(|_| s_hat(&draw_sample(&model, 25, &mut rng).unwrap()))
        .collect();
    let mean = xs.iter().sum::<f64>() / reps as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    assert!((mean - model.s_true()).abs() <= 3.0 * (var / reps as f64).sqrt());
}

#[test]
fn expected_error_count() {
    let model = make_prevalences(PrevalenceKind::Homogeneous, 4.0, 30).unwrap();
    let (n, q, reps) = (20usize, 0.1, 10_000);
    let mut rng = SeededStream::new(102, 0).rng();
    let errs: Vec<f64> = (0..reps)
        .map(|_| {
            let m = draw_incidence_matrix(&model, n, &mut rng);
            contaminate(m, q, &mut rng).unwrap().1 as f64
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / reps as f64;
    let var = errs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let want = q * n as f64 * model.s_true();
    assert!(
        (mean - want).abs() <= 3.0 * (var / reps as f64).sqrt(),
        "{mean} vs {want}"
    );
}

#[test]
fn matrix_column_sums_are_binomial() {
    let model = PrevalenceModel::explicit(vec![0.3]).unwrap();
    let (n, reps) = (10usize, 10_000);
    let mut rng = SeededStream::new(103, 0).rng();
    let mut observed = [0f64; 11];
    for _ in 0..reps {
        observed[draw_incidence_matrix(&model, n, &mut rng).column_sums()[0] as usize] += 1.0;
    }
    let pmf = |k: usize| {
        let mut c = 1.0;
        for i in 0..k {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        c * 0.3f64.powi(k as i32) * 0.7f64.powi((n - k) as i32)
    };
    // bins 0..=7 and a pooled 8..=10 bin; df = 8, 0.99 quantile 20.090
    let mut chi2 = 0.0;
    for k in 0..=8 {
        let (obs, p) = if k < 8 {
            (observed[k], pmf(k))
        } else {
            (observed[8..].iter().sum(), (8..=10).map(pmf).sum())
        };
        let exp = p * reps as f64;
        chi2 += (obs - exp).powi(2) / exp;
    }
    assert!(chi2 < 20.090, "chi2 = {chi2}");
}

#[test]
fn u_r_covers_at_every_r() {
    let model = make_prevalences(PrevalenceKind::Geometric, 0.7, 40).unwrap();
    let (n, alpha, reps) = (30u64, 0.1, 10_000);
    for &r in &[1.0, 2.0, 4.5, 10.0] {
        let u = u_r(n, r, model.s_true(), alpha).unwrap();
        let mut rng = SeededStream::new(104, r.to_bits()).rng();
        let covered = (0..reps)
            .filter(|_| mmax_exact(&model, &draw_counts(&model, n, &mut rng)) <= u)
            .count() as f64
            / reps as f64;
        assert!(
            covered >= 1.0 - alpha - 3.0 * binomial_se(1.0 - alpha, reps),
            "r = {r}: {covered}"
        );
    }
}

#[test]
fn total_mass_ucb_exceeded_rarely() {
    let beta = 0.05;
    let model = make_prevalences(PrevalenceKind::Zipf, 0.8, 80).unwrap();
    let reps = 10_000;
    let mut rng = SeededStream::new(105, 0).rng();
    let misses = (0..reps)
        .filter(|_| model.s_true() > total_mass_ucb(&draw_sample(&model, 30, &mut rng).unwrap(), beta).unwrap())
        .count() as f64;
    assert!(misses / reps as f64 <= beta + 3.0 * binomial_se(beta, reps));
}

#[test]
fn least_favourable_mmax_is_two_point() {
    let lf = LeastFavourableFinite::new(5, 6, 3, 0.3).unwrap();
    let model = lf.model().unwrap();
    let reps = 20_000;
    let mut rng = SeededStream::new(106, 0).rng();
    let mut hits = 0usize;
    for _ in 0..reps {
        let v = mmax_exact(&model, &draw_counts(&model, lf.n, &mut rng));
        assert!(v == 0.0 || v == lf.q);
        hits += usize::from(v == lf.q);
    }
    let p = lf.prob_mmax_is_q();
    assert!((hits as f64 / reps as f64 - p).abs() <= 3.0 * binomial_se(p, reps));
}

#[test]
fn impossibility_demo_exceedance_by_simulation() {
    let demo = worstcase_impossibility_demo(20, 0.1, 0.05).unwrap();
    let model = demo.model().unwrap();
    let reps = 20_000;
    let mut rng = SeededStream::new(107, 0).rng();
    let hits = (0..reps)
        .filter(|_| mmax_exact(&model, &draw_counts(&model, demo.n, &mut rng)) >= demo.candidate_u)
        .count() as f64;
    let p = demo.exceed_prob;
    assert!(p > demo.alpha);
    assert!((hits / reps as f64 - p).abs() <= 3.0 * binomial_se(p, reps));
}

#[test]
fn coverage_rule_stalls_when_target_exceeds_one_minus_q() {
    let model = make_prevalences(PrevalenceKind::Homogeneous, 20.0, 200).unwrap();
    let policy = StoppingPolicy::coverage(0.999, 0.005, 2000).unwrap();
    let stalled = (0..20)
        .filter(|&rep| {
            let out = run_stopping(&model, &policy, 0.005, &mut SeededStream::new(108, rep).rng()).unwrap();
            !out.stopped && out.n_stop == 2000
        })
        .count();
    assert_eq!(stalled, 20);
}
