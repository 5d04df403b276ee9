//! Sequential stopping rules and their Monte Carlo evaluation.
//!
//! A run adds sampling units one at a time and re-evaluates the rule after
//! each unit. Each presence is independently turned into a fresh singleton
//! error species with probability `q`. Presence times of each true species are
//! drawn lazily from geometric gaps, which has the same law as drawing every
//! cell of the incidence matrix but costs O(presences) instead of O(n M).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounded::{bounded_dd_value, mcdiarmid_correction, survival_power, BoundedConfig};
use crate::error::{check_open_unit, Error, Result};
use crate::estimators::coverage_from_stats;
use crate::model::{PrevalenceKind, PrevalenceModel};
use crate::rng::SeededStream;
use crate::sampler::make_prevalences;
use crate::unbounded::{unbounded_from_totals, UnboundedConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingKind {
    MmaxBounded,
    MmaxUnbounded,
    Coverage,
}

impl StoppingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StoppingKind::MmaxBounded => "bounded",
            StoppingKind::MmaxUnbounded => "unbounded",
            StoppingKind::Coverage => "coverage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop once the bounded bound is at most `epsilon`.
    MmaxBounded { epsilon: f64, cfg: BoundedConfig },
    /// Stop once the unbounded bound is at most `epsilon`.
    MmaxUnbounded { epsilon: f64, cfg: UnboundedConfig },
    /// Stop once estimated coverage exceeds `target`.
    Coverage { target: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingPolicy {
    pub rule: StoppingRule,
    /// Species with `p_j >= relevance_epsilon` count as relevant when scoring
    /// a run. Equals the rule's `epsilon` for the M_max rules.
    pub relevance_epsilon: f64,
    pub n_max: u64,
}

impl StoppingPolicy {
    pub fn mmax_bounded(epsilon: f64, cfg: BoundedConfig, n_max: u64) -> Result<Self> {
        Self::checked(StoppingRule::MmaxBounded { epsilon, cfg }, epsilon, n_max)
    }

    pub fn mmax_unbounded(epsilon: f64, cfg: UnboundedConfig, n_max: u64) -> Result<Self> {
        Self::checked(StoppingRule::MmaxUnbounded { epsilon, cfg }, epsilon, n_max)
    }

    pub fn coverage(target: f64, relevance_epsilon: f64, n_max: u64) -> Result<Self> {
        check_open_unit("coverage_target", target)?;
        Self::checked(StoppingRule::Coverage { target }, relevance_epsilon, n_max)
    }

    fn checked(rule: StoppingRule, relevance_epsilon: f64, n_max: u64) -> Result<Self> {
        check_open_unit("epsilon", relevance_epsilon)?;
        if n_max == 0 {
            return Err(Error::ParamOutOfRange {
                name: "n_max",
                value: 0.0,
                expected: "must be >= 1",
            });
        }
        Ok(Self {
            rule,
            relevance_epsilon,
            n_max,
        })
    }

    pub fn kind(&self) -> StoppingKind {
        match self.rule {
            StoppingRule::MmaxBounded { .. } => StoppingKind::MmaxBounded,
            StoppingRule::MmaxUnbounded { .. } => StoppingKind::MmaxUnbounded,
            StoppingRule::Coverage { .. } => StoppingKind::Coverage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingOutcome {
    pub stopped: bool,
    pub n_stop: u64,
    pub missed_fraction: f64,
    pub type1: bool,
    /// Error species observed by `n_stop`.
    pub extra_species: u64,
}

/// Running sufficient statistics of the contaminated sample.
struct RunState {
    n: u64,
    counts: Vec<u64>,
    /// count value -> number of species (true or error) with that count
    freq: BTreeMap<u64, u64>,
    distinct_true: u64,
    n_err: u64,
    u_total: u64,
}

impl RunState {
    fn new(m: usize) -> Self {
        Self {
            n: 0,
            counts: vec![0; m],
            freq: BTreeMap::new(),
            distinct_true: 0,
            n_err: 0,
            u_total: 0,
        }
    }

    fn bump_freq(&mut self, from: u64, to: u64) {
        if from > 0 {
            if let Some(f) = self.freq.get_mut(&from) {
                *f -= 1;
                if *f == 0 {
                    self.freq.remove(&from);
                }
            }
        }
        *self.freq.entry(to).or_insert(0) += 1;
    }

    fn add_true(&mut self, j: usize) {
        let c = self.counts[j];
        if c == 0 {
            self.distinct_true += 1;
        }
        self.counts[j] = c + 1;
        self.bump_freq(c, c + 1);
        self.u_total += 1;
    }

    fn add_error(&mut self) {
        self.n_err += 1;
        self.bump_freq(0, 1);
        self.u_total += 1;
    }

    fn q(&self, k: u64) -> u64 {
        self.freq.get(&k).copied().unwrap_or(0)
    }

    /// Bounded bound with the alphabet size `M + n_err`.
    fn bounded_value(&self, m: u64, cfg: &BoundedConfig) -> Option<f64> {
        let n = self.n;
        let b = cfg.b_for(n);
        if (n as f64) <= b {
            return None;
        }
        let nf = n as f64;
        let seen: f64 = self
            .freq
            .iter()
            .map(|(&c, &f)| f as f64 * survival_power(c as f64 / nf, b))
            .sum();
        let m_b = (m - self.distinct_true) as f64 + seen;
        let eps = mcdiarmid_correction(m + self.n_err, n, b, cfg.delta);
        Some(bounded_dd_value(m_b, eps, n, b, cfg.alpha).min(1.0))
    }

    fn should_stop(&self, m: u64, rule: &StoppingRule) -> bool {
        match rule {
            StoppingRule::MmaxBounded { epsilon, cfg } => self.bounded_value(m, cfg).is_some_and(|v| v <= *epsilon),
            StoppingRule::MmaxUnbounded { epsilon, cfg } => {
                self.n >= 3
                    && unbounded_from_totals(self.n, self.u_total, cfg).is_ok_and(|e| e.reported_value <= *epsilon)
            }
            StoppingRule::Coverage { target } => {
                coverage_from_stats(self.n, self.u_total, self.q(1), self.q(2)).is_some_and(|c| c > *target)
            }
        }
    }
}

/// Failures before the first success of `Bernoulli(p)` trials, by inversion.
/// Stays exact in the far tail where `1 - p` rounds to 1.
#[derive(Debug, Clone, Copy)]
struct GeometricGap {
    log_q: f64,
}

impl GeometricGap {
    fn new(p: f64) -> Option<Self> {
        (p > 0.0).then(|| Self {
            log_q: (-p.min(1.0)).ln_1p(),
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.log_q == f64::NEG_INFINITY {
            return 0;
        }
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        // saturating float-to-int cast
        (u.ln() / self.log_q).floor() as u64
    }
}

/// Units are added one at a time until the rule fires or `n_max` is reached.
pub fn run_stopping<R: Rng + ?Sized>(
    model: &PrevalenceModel,
    policy: &StoppingPolicy,
    q: f64,
    rng: &mut R,
) -> Result<StoppingOutcome> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParamOutOfRange {
            name: "q",
            value: q,
            expected: "must lie in [0, 1]",
        });
    }
    let probs = model.probs();
    let m = probs.len() as u64;
    let n_max = policy.n_max;

    let gaps: Vec<Option<GeometricGap>> = probs.iter().map(|&p| GeometricGap::new(p)).collect();
    // (unit index, species), earliest first
    let mut calendar = BinaryHeap::new();
    for (j, g) in gaps.iter().enumerate() {
        if let Some(g) = g {
            let t = 1u64.saturating_add(g.sample(rng));
            if t <= n_max {
                calendar.push(Reverse((t, j)));
            }
        }
    }

    let mut state = RunState::new(probs.len());
    let mut stopped = false;
    for t in 1..=n_max {
        state.n = t;
        while let Some(&Reverse((when, j))) = calendar.peek() {
            if when != t {
                break;
            }
            calendar.pop();
            if q > 0.0 && rng.random_bool(q) {
                state.add_error();
            } else {
                state.add_true(j);
            }
            let g = gaps[j].as_ref().expect("scheduled species has p > 0");
            let next = t.saturating_add(1).saturating_add(g.sample(rng));
            if next <= n_max {
                calendar.push(Reverse((next, j)));
            }
        }
        if state.should_stop(m, &policy.rule) {
            stopped = true;
            break;
        }
    }

    let eps = policy.relevance_epsilon;
    let (relevant, missed) = probs
        .iter()
        .zip(&state.counts)
        .filter(|(&p, _)| p >= eps)
        .fold((0u64, 0u64), |(r, mi), (_, &c)| (r + 1, mi + u64::from(c == 0)));
    let missed_fraction = if relevant == 0 {
        0.0
    } else {
        missed as f64 / relevant as f64
    };
    Ok(StoppingOutcome {
        stopped,
        n_stop: state.n,
        missed_fraction,
        type1: stopped && missed > 0,
        extra_species: state.n_err,
    })
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub model: PrevalenceModel,
}

#[derive(Debug, Clone)]
pub struct NamedPolicy {
    pub name: String,
    pub policy: StoppingPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingRow {
    pub scenario: String,
    pub policy: String,
    pub q: f64,
    pub mean_nstop: f64,
    pub mean_missed: f64,
    pub type1: f64,
    pub mean_extra: f64,
}

#[derive(Debug, Clone)]
pub struct StoppingExperiment {
    pub scenarios: Vec<Scenario>,
    pub policies: Vec<NamedPolicy>,
    pub q_grid: Vec<f64>,
    pub reps: u64,
    pub master_seed: u64,
}

pub const DEFAULT_Q_GRID: [f64; 6] = [0.0, 1e-4, 5e-4, 1e-3, 2.5e-3, 5e-3];
pub const DEFAULT_STOP_EPSILON: f64 = 0.005;
pub const DEFAULT_COVERAGE_TARGET: f64 = 0.99;
pub const DEFAULT_N_MAX: u64 = 10_000;
pub const DEFAULT_STOP_REPS: u64 = 200;

/// Zipf(1.05), homogeneous at 0.006 and 0.05, truncated geometric(0.05); M = 1500.
pub fn default_stopping_scenarios() -> Result<Vec<Scenario>> {
    let m = 1500;
    let specs = [
        ("zipf-1.05", PrevalenceKind::Zipf, 1.05),
        ("homogeneous-0.006", PrevalenceKind::Homogeneous, 1.0 / 0.006),
        ("homogeneous-0.05", PrevalenceKind::Homogeneous, 1.0 / 0.05),
        ("truncgeom-0.05", PrevalenceKind::TruncatedGeometric, 0.05),
    ];
    specs
        .iter()
        .map(|&(name, kind, param)| {
            Ok(Scenario {
                name: name.to_string(),
                model: make_prevalences(kind, param, m)?,
            })
        })
        .collect()
}

pub fn default_stopping_policies(
    epsilon: f64,
    alpha: f64,
    coverage_target: f64,
    n_max: u64,
) -> Result<Vec<NamedPolicy>> {
    let bounded = StoppingPolicy::mmax_bounded(epsilon, BoundedConfig::with_defaults(alpha)?, n_max)?;
    let unbounded = StoppingPolicy::mmax_unbounded(epsilon, UnboundedConfig::with_defaults(alpha)?, n_max)?;
    let coverage = StoppingPolicy::coverage(coverage_target, epsilon, n_max)?;
    Ok([bounded, unbounded, coverage]
        .into_iter()
        .map(|policy| NamedPolicy {
            name: policy.kind().as_str().to_string(),
            policy,
        })
        .collect())
}

/// Stream key of one (scenario, policy, q) cell.
pub fn stopping_key(scenario: &str, policy: &str, q: f64) -> String {
    format!("stopping|{scenario}|{policy}|{q:e}")
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn aggregate(outcomes: &[StoppingOutcome]) -> (f64, f64, f64, f64) {
    let k = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&StoppingOutcome) -> f64| compensated_sum(outcomes.iter().map(f)) / k;
    let type1 = outcomes.iter().filter(|o| o.type1).count() as f64 / k;
    (
        mean(&|o| o.n_stop as f64),
        mean(&|o| o.missed_fraction),
        type1,
        mean(&|o| o.extra_species as f64),
    )
}

impl StoppingExperiment {
    /// One row per (scenario, policy, q) in grid order. Replicates run in
    /// parallel; each has its own stream so rows do not depend on scheduling.
    pub fn run(&self) -> Result<Vec<StoppingRow>> {
        if self.reps == 0 {
            return Err(Error::ParamOutOfRange {
                name: "reps",
                value: 0.0,
                expected: "must be >= 1",
            });
        }
        let mut cells = Vec::new();
        for s in &self.scenarios {
            for p in &self.policies {
                for &q in &self.q_grid {
                    cells.push((s, p, q));
                }
            }
        }
        cells
            .par_iter()
            .map(|&(s, p, q)| {
                let key = stopping_key(&s.name, &p.name, q);
                let outcomes = (0..self.reps)
                    .into_par_iter()
                    .map(|rep| {
                        let mut rng = SeededStream::for_replicate(self.master_seed, &key, rep).rng();
                        run_stopping(&s.model, &p.policy, q, &mut rng)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (mean_nstop, mean_missed, type1, mean_extra) = aggregate(&outcomes);
                Ok(StoppingRow {
                    scenario: s.name.clone(),
                    policy: p.name.clone(),
                    q,
                    mean_nstop,
                    mean_missed,
                    type1,
                    mean_extra,
                })
            })
            .collect()
    }
}
