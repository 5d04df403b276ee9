use std::path::{Path, PathBuf};

use mmax_core::bounded::{bonferroni_estimate, bounded_dd_bound, worst_case_estimate, BRule, BoundedConfig};
use mmax_core::estimators::{accumulation_curve, coverage_estimate, s_hat, COVERAGE_FORMULA};
use mmax_core::sampler::{contaminate, draw_incidence_matrix, make_prevalences};
use mmax_core::selector::{heuristic_threshold, recommend_regime, Regime};
use mmax_core::stopping::{default_stopping_policies, default_stopping_scenarios, StoppingExperiment};
use mmax_core::unbounded::{unbounded_bound, UnboundedConfig};
use mmax_core::{sample_stats, BoundEstimate, IncidenceSample, PrevalenceKind, SeededStream};
use serde_json::{json, Map, Value};

use crate::args::{
    BoundArgs, DiagnoseArgs, GenerateArgs, IntervalArgs, MethodArg, RegimeArgs, ScenarioArg, StoppingArgs,
};
use crate::format::{csv_writer, fmt_g};
use crate::input::{parse_incidence, parse_units, InputFormat};
use crate::sweeps::{interval_rows, overshoot_rows, regime_rows};
use crate::{CliError, CliResult};

impl From<ScenarioArg> for PrevalenceKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Zipf => PrevalenceKind::Zipf,
            ScenarioArg::Geometric => PrevalenceKind::Geometric,
            ScenarioArg::Homogeneous => PrevalenceKind::Homogeneous,
            ScenarioArg::TruncatedGeometric => PrevalenceKind::TruncatedGeometric,
        }
    }
}

fn require_reps(reps: u64) -> CliResult<()> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be >= 1".into()));
    }
    Ok(())
}

fn sample_summary(sample: &IncidenceSample) -> Value {
    let st = sample_stats(sample);
    json!({
        "n": st.n,
        "U_total": st.u_total,
        "distinct": st.distinct,
        "K_unseen": st.k_unseen,
        "Q1": st.q1,
        "Q2": st.q2,
        "S_hat": s_hat(sample),
    })
}

fn estimate_json(est: &BoundEstimate) -> CliResult<Value> {
    serde_json::to_value(est).map_err(|e| CliError::Data(e.to_string()))
}

pub fn bound(a: &BoundArgs) -> CliResult<Value> {
    let mut sample = parse_incidence(&a.input, a.format, a.n)?;
    if let Some(m) = a.m {
        sample = sample.with_declared_m(m)?;
    }
    let delta = a.delta.unwrap_or(0.01 * a.alpha);
    let need_m = |what: &str| {
        a.m.ok_or_else(|| CliError::Usage(format!("--M is required for --method {what}")))
    };
    let bounded = |m: u64| -> CliResult<BoundEstimate> {
        Ok(bounded_dd_bound(
            &sample,
            m,
            &BoundedConfig::new(a.alpha, delta, BRule::LogN)?,
        )?)
    };
    let unbounded =
        || -> CliResult<BoundEstimate> { Ok(unbounded_bound(&sample, &UnboundedConfig::new(a.alpha, a.beta)?)?) };

    let mut extra = Map::new();
    let est = match a.method {
        MethodArg::Bonferroni => bonferroni_estimate(sample.n(), need_m("bonferroni")?, a.alpha)?,
        MethodArg::Worstcase => worst_case_estimate(sample.n(), need_m("worstcase")?, a.alpha)?,
        MethodArg::Bounded => bounded(need_m("bounded")?)?,
        MethodArg::Unbounded => unbounded()?,
        MethodArg::Auto => {
            let rec = recommend_regime(&sample, a.m, a.alpha)?;
            let unb = unbounded()?;
            let bdd = a.m.map(bounded).transpose()?;
            let chosen = match (rec.regime, &bdd) {
                (Regime::Bounded, Some(b)) => b.clone(),
                (Regime::Indifferent, Some(b)) if b.reported_value < unb.reported_value => b.clone(),
                _ => unb.clone(),
            };
            let mut bounds = Map::new();
            bounds.insert("unbounded".into(), estimate_json(&unb)?);
            if let Some(b) = &bdd {
                bounds.insert("bounded".into(), estimate_json(b)?);
            }
            extra.insert("recommendation".into(), json!(rec));
            extra.insert("bounds".into(), Value::Object(bounds));
            chosen
        }
    };

    let mut out = match estimate_json(&est)? {
        Value::Object(m) => m,
        _ => unreachable!("estimates serialize to objects"),
    };
    out.insert("command".into(), json!("bound"));
    out.insert(
        "requested_method".into(),
        json!(format!("{:?}", a.method).to_lowercase()),
    );
    out.insert("M".into(), json!(a.m));
    out.insert("sample".into(), sample_summary(&sample));
    out.extend(extra);
    Ok(Value::Object(out))
}

pub fn simulate_intervals(a: &IntervalArgs) -> CliResult<Value> {
    require_reps(a.reps)?;
    if !a.n_grid.is_empty() && !a.m_grid.is_empty() {
        return Err(CliError::Usage("only one of --n-grid and --M-grid may vary".into()));
    }
    let ns: Vec<u64> = if a.n_grid.is_empty() {
        a.n.into_iter().collect()
    } else {
        a.n_grid.clone()
    };
    let ms: Vec<u64> = if a.m_grid.is_empty() {
        a.m.into_iter().collect()
    } else {
        a.m_grid.clone()
    };
    if ns.is_empty() || ms.is_empty() {
        return Err(CliError::Usage("give --n or --n-grid, and --M or --M-grid".into()));
    }
    let points: Vec<(u64, u64)> = ns.iter().flat_map(|&n| ms.iter().map(move |&m| (n, m))).collect();
    let kind = PrevalenceKind::from(a.scenario);
    let rows = interval_rows(kind, a.param, &points, a.reps, a.alpha, a.seed)?;

    let mut w = csv_writer(&a.out)?;
    w.write_record([
        "scenario",
        "param",
        "n",
        "M",
        "rep",
        "method",
        "value",
        "covered",
        "mmax_true",
    ])?;
    for r in &rows {
        w.write_record([
            kind.as_str().to_string(),
            fmt_g(r.param),
            r.n.to_string(),
            r.m.to_string(),
            r.rep.to_string(),
            r.method.to_string(),
            fmt_g(r.value),
            u8::from(r.covered).to_string(),
            fmt_g(r.mmax_true),
        ])?;
    }
    w.flush()?;
    Ok(json!({
        "command": "simulate-intervals",
        "out": a.out,
        "rows": rows.len(),
        "grid_points": points.len(),
        "reps": a.reps,
        "seed": a.seed,
    }))
}

fn default_overshoot_path(out: &Path) -> PathBuf {
    out.with_extension("overshoot.csv")
}

pub fn compare_regimes(a: &RegimeArgs) -> CliResult<Value> {
    require_reps(a.reps)?;
    let configs: Vec<(PrevalenceKind, f64)> = a
        .zipf
        .iter()
        .map(|&g| (PrevalenceKind::Zipf, g))
        .chain(a.geometric.iter().map(|&x| (PrevalenceKind::Geometric, x)))
        .chain(a.homogeneous.iter().map(|&c| (PrevalenceKind::Homogeneous, c)))
        .collect();
    let rows = regime_rows(&configs, a.n, a.m, a.reps, a.alpha, a.seed)?;
    let mut w = csv_writer(&a.out)?;
    w.write_record([
        "family",
        "param",
        "S_true",
        "threshold",
        "threshold_simplified",
        "regime",
        "mean_bonferroni",
        "mean_bounded",
        "mean_unbounded",
    ])?;
    for r in &rows {
        w.write_record([
            r.family.as_str().to_string(),
            fmt_g(r.param),
            fmt_g(r.s_true),
            fmt_g(r.threshold),
            fmt_g(r.threshold_simplified),
            r.regime.as_str().to_string(),
            fmt_g(r.mean_bonferroni),
            fmt_g(r.mean_bounded),
            fmt_g(r.mean_unbounded),
        ])?;
    }
    w.flush()?;

    let overshoot_path = a
        .overshoot_out
        .clone()
        .unwrap_or_else(|| default_overshoot_path(&a.out));
    let mut w = csv_writer(&overshoot_path)?;
    w.write_record([
        "gamma",
        "n",
        "M_true",
        "M_add",
        "mean_bounded",
        "mean_unbounded",
        "rel_change",
    ])?;
    let mut overshoot_rows_written = 0;
    for &gamma in &a.overshoot_gamma {
        for r in overshoot_rows(
            gamma,
            a.overshoot_n,
            a.overshoot_m,
            &a.m_add_grid,
            a.reps,
            a.alpha,
            a.seed,
        )? {
            w.write_record([
                fmt_g(r.gamma),
                r.n.to_string(),
                r.m_true.to_string(),
                r.m_add.to_string(),
                fmt_g(r.mean_bounded),
                fmt_g(r.mean_unbounded),
                fmt_g(r.rel_change),
            ])?;
            overshoot_rows_written += 1;
        }
    }
    w.flush()?;
    Ok(json!({
        "command": "compare-regimes",
        "out": a.out,
        "overshoot_out": overshoot_path,
        "rows": rows.len(),
        "overshoot_rows": overshoot_rows_written,
        "threshold": heuristic_threshold(a.n, a.m, a.alpha, false)?,
        "threshold_simplified": heuristic_threshold(a.n, a.m, a.alpha, true)?,
    }))
}

pub fn simulate_stopping(a: &StoppingArgs) -> CliResult<Value> {
    require_reps(a.reps)?;
    if let Some(&q) = a.q_grid.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(CliError::Usage(format!("q = {q} outside [0, 1]")));
    }
    let exp = StoppingExperiment {
        scenarios: default_stopping_scenarios()?,
        policies: default_stopping_policies(a.epsilon, a.alpha, a.coverage_target, a.n_max)?,
        q_grid: a.q_grid.clone(),
        reps: a.reps,
        master_seed: a.seed,
    };
    let rows = exp.run()?;
    let mut w = csv_writer(&a.out)?;
    w.write_record([
        "scenario",
        "policy",
        "q",
        "mean_nstop",
        "mean_missed",
        "type1",
        "mean_extra",
    ])?;
    for r in &rows {
        w.write_record([
            r.scenario.clone(),
            r.policy.clone(),
            fmt_g(r.q),
            fmt_g(r.mean_nstop),
            fmt_g(r.mean_missed),
            fmt_g(r.type1),
            fmt_g(r.mean_extra),
        ])?;
    }
    w.flush()?;
    Ok(json!({
        "command": "simulate-stopping",
        "out": a.out,
        "rows": rows.len(),
        "reps": a.reps,
        "seed": a.seed,
    }))
}

pub fn diagnose(a: &DiagnoseArgs) -> CliResult<Value> {
    if a.format == InputFormat::Counts {
        return Err(CliError::Usage(
            "diagnose needs unit-level data (--format dense or sparse)".into(),
        ));
    }
    let matrix = parse_units(&a.input, a.format, a.n)?;
    let mut sample = IncidenceSample::from_matrix(&matrix)?;
    if let Some(m) = a.m {
        sample = sample.with_declared_m(m)?;
    }
    if a.perms == 0 {
        return Err(CliError::Usage("--perms must be >= 1".into()));
    }
    let curve = accumulation_curve(
        &matrix,
        a.perms,
        &mut SeededStream::for_replicate(a.seed, "diagnose", 0).rng(),
    );
    let mut w = csv_writer(&a.out)?;
    w.write_record(["k", "mean_distinct"])?;
    for (k, v) in curve.iter().enumerate() {
        w.write_record([(k + 1).to_string(), fmt_g(*v)])?;
    }
    w.flush()?;

    let rec = recommend_regime(&sample, a.m, a.alpha)?;
    let (threshold, simplified) = match a.m {
        Some(m) => (
            Some(heuristic_threshold(sample.n(), m, a.alpha, false)?),
            Some(heuristic_threshold(sample.n(), m, a.alpha, true)?),
        ),
        None => (None, None),
    };
    Ok(json!({
        "command": "diagnose",
        "out": a.out,
        "sample": sample_summary(&sample),
        "coverage": coverage_estimate(&sample),
        "coverage_formula": COVERAGE_FORMULA,
        "threshold": threshold,
        "threshold_simplified": simplified,
        "recommendation": rec,
    }))
}

pub fn generate(a: &GenerateArgs) -> CliResult<Value> {
    let model = make_prevalences(a.scenario.into(), a.param, a.m)?;
    let key = format!(
        "generate|{}|{:e}|{}|{}|{:e}",
        PrevalenceKind::from(a.scenario),
        a.param,
        a.m,
        a.n,
        a.q
    );
    let mut rng = SeededStream::for_replicate(a.seed, &key, 0).rng();
    let matrix = draw_incidence_matrix(&model, a.n, &mut rng);
    let (matrix, n_errors) = contaminate(matrix, a.q, &mut rng)?;

    let mut w = csv_writer(&a.out)?;
    match a.format {
        InputFormat::Dense => {
            w.write_record(matrix.species())?;
            for i in 0..matrix.n_units() {
                w.write_record((0..matrix.n_species()).map(|j| if matrix.get(i, j) { "1" } else { "0" }))?;
            }
        }
        InputFormat::Sparse => {
            for i in 0..matrix.n_units() {
                for j in 0..matrix.n_species() {
                    if matrix.get(i, j) {
                        w.write_record([format!("u{}", i + 1), matrix.species()[j].clone()])?;
                    }
                }
            }
        }
        InputFormat::Counts => {
            for (id, c) in matrix.species().iter().zip(matrix.column_sums()) {
                w.write_record([id.clone(), c.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(json!({
        "command": "generate",
        "out": a.out,
        "n": a.n,
        "M": a.m,
        "S_true": model.s_true(),
        "n_errors": n_errors,
    }))
}
