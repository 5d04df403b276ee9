//! Shared domain types: prevalence vectors, incidence samples and matrices,
//! bound estimates, and the summary statistics every bound is computed from.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrevalenceKind {
    /// `p_j = (j+1)^-gamma`, j = 1..M.
    Zipf,
    /// `p_j = a^j`, j = 1..M.
    Geometric,
    /// `p_j = 1/c`.
    Homogeneous,
    /// `p_j = (1-a)^(j-1)`, j = 1..M.
    TruncatedGeometric,
    /// Caller-supplied vector.
    Explicit,
}

impl PrevalenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrevalenceKind::Zipf => "zipf",
            PrevalenceKind::Geometric => "geometric",
            PrevalenceKind::Homogeneous => "homogeneous",
            PrevalenceKind::TruncatedGeometric => "truncated-geometric",
            PrevalenceKind::Explicit => "explicit",
        }
    }
}

impl std::fmt::Display for PrevalenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PrevalenceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "zipf" => Ok(PrevalenceKind::Zipf),
            "geometric" => Ok(PrevalenceKind::Geometric),
            "homogeneous" => Ok(PrevalenceKind::Homogeneous),
            "truncated-geometric" => Ok(PrevalenceKind::TruncatedGeometric),
            "explicit" => Ok(PrevalenceKind::Explicit),
            other => Err(format!("unknown prevalence kind `{other}`")),
        }
    }
}

/// Finite vector of per-species incidence probabilities with the recipe that
/// produced it. Built by [`crate::sampler::make_prevalences`] or
/// [`PrevalenceModel::explicit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceModel {
    kind: PrevalenceKind,
    param: f64,
    probs: Vec<f64>,
    s_true: f64,
}

impl PrevalenceModel {
    pub(crate) fn from_parts(kind: PrevalenceKind, param: f64, probs: Vec<f64>) -> Self {
        let s_true = probs.iter().sum();
        Self {
            kind,
            param,
            probs,
            s_true,
        }
    }

    pub fn explicit(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::ParamOutOfRange {
                name: "M",
                value: 0.0,
                expected: "must be >= 1",
            });
        }
        if let Some(&bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::ParamOutOfRange {
                name: "p_j",
                value: bad,
                expected: "must lie in [0, 1]",
            });
        }
        Ok(Self::from_parts(PrevalenceKind::Explicit, f64::NAN, probs))
    }

    pub fn kind(&self) -> PrevalenceKind {
        self.kind
    }

    /// Generator parameter (gamma, a or c); NaN for explicit models.
    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn m(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total mass `S = sum_j p_j`.
    pub fn s_true(&self) -> f64 {
        self.s_true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Labels {
    /// `s1, s2, ...` in column order.
    Synthetic,
    Named(Vec<String>),
}

/// Id of the `index`-th (0-based) simulated species.
pub fn synthetic_id(index: usize) -> String {
    format!("s{}", index + 1)
}

/// Per-species counts `N_j` out of `n` sampling units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceSample {
    n: u64,
    labels: Labels,
    counts: Vec<u64>,
    declared_m: Option<u64>,
}

impl IncidenceSample {
    /// Sample with named species. Ids must be unique and every count at most `n`.
    pub fn new<I, S>(n: u64, counts: I, declared_m: Option<u64>) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let (ids, counts): (Vec<String>, Vec<u64>) = counts.into_iter().map(|(s, c)| (s.into(), c)).unzip();
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidSample(format!("duplicate species id `{id}`")));
            }
        }
        Self::validated(n, Labels::Named(ids), counts, declared_m)
    }

    /// Sample whose species are labelled `s1..sK` in slice order.
    pub fn from_counts(n: u64, counts: Vec<u64>, declared_m: Option<u64>) -> Result<Self> {
        Self::validated(n, Labels::Synthetic, counts, declared_m)
    }

    /// Column sums of a 0/1 matrix; `declared_m` is left unset.
    pub fn from_matrix(matrix: &IncidenceMatrix) -> Result<Self> {
        Self::validated(
            matrix.n_units() as u64,
            Labels::Named(matrix.species().to_vec()),
            matrix.column_sums(),
            None,
        )
    }

    fn validated(n: u64, labels: Labels, counts: Vec<u64>, declared_m: Option<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSample("n must be positive".into()));
        }
        if let Some(pos) = counts.iter().position(|&c| c > n) {
            let id = match &labels {
                Labels::Synthetic => synthetic_id(pos),
                Labels::Named(ids) => ids[pos].clone(),
            };
            return Err(Error::InvalidSample(format!(
                "count {} for `{id}` exceeds n = {n}",
                counts[pos]
            )));
        }
        let sample = Self {
            n,
            labels,
            counts,
            declared_m: None,
        };
        match declared_m {
            Some(m) => sample.with_declared_m(m),
            None => Ok(sample),
        }
    }

    /// Attach (or replace) the declared alphabet size.
    pub fn with_declared_m(mut self, m: u64) -> Result<Self> {
        let observed = self.distinct();
        if m == 0 || m < observed {
            return Err(Error::AlphabetTooSmall { declared: m, observed });
        }
        self.declared_m = Some(m);
        Ok(self)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn declared_m(&self) -> Option<u64> {
        self.declared_m
    }

    /// Counts in species order; aligned with model species for simulated data.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn species_id(&self, index: usize) -> Cow<'_, str> {
        match &self.labels {
            Labels::Synthetic => Cow::Owned(synthetic_id(index)),
            Labels::Named(ids) => Cow::Borrowed(ids[index].as_str()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cow<'_, str>, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.species_id(i), c))
    }

    /// `sum_j N_j`.
    pub fn u_total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of species with `N_j > 0`.
    pub fn distinct(&self) -> u64 {
        self.counts.iter().filter(|&&c| c > 0).count() as u64
    }

    /// Number of species with `N_j == k`.
    pub fn frequency_of(&self, k: u64) -> u64 {
        self.counts.iter().filter(|&&c| c == k).count() as u64
    }
}

/// Dense `n x M` presence/absence matrix, stored by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n_units: usize,
    species: Vec<String>,
    columns: Vec<Vec<bool>>,
}

impl IncidenceMatrix {
    pub fn new(n_units: usize, species: Vec<String>, columns: Vec<Vec<bool>>) -> Result<Self> {
        if species.len() != columns.len() {
            return Err(Error::InvalidSample(format!(
                "{} species ids for {} columns",
                species.len(),
                columns.len()
            )));
        }
        if let Some(col) = columns.iter().position(|c| c.len() != n_units) {
            return Err(Error::InvalidSample(format!(
                "column `{}` has {} rows, expected {n_units}",
                species[col],
                columns[col].len()
            )));
        }
        let mut seen = HashSet::with_capacity(species.len());
        for id in &species {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidSample(format!("duplicate species id `{id}`")));
            }
        }
        Ok(Self {
            n_units,
            species,
            columns,
        })
    }

    /// Build from rows of 0/1 cells.
    pub fn from_rows(species: Vec<String>, rows: &[Vec<bool>]) -> Result<Self> {
        let m = species.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidSample(format!(
                "row {} has {} cells, expected {m}",
                bad + 1,
                rows[bad].len()
            )));
        }
        let columns = (0..m).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::new(rows.len(), species, columns)
    }

    pub(crate) fn from_parts_unchecked(n_units: usize, species: Vec<String>, columns: Vec<Vec<bool>>) -> Self {
        Self {
            n_units,
            species,
            columns,
        }
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_species(&self) -> usize {
        self.columns.len()
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn get(&self, unit: usize, species: usize) -> bool {
        self.columns[species][unit]
    }

    pub fn column(&self, species: usize) -> &[bool] {
        &self.columns[species]
    }

    pub fn column_sums(&self) -> Vec<u64> {
        self.columns
            .iter()
            .map(|c| c.iter().filter(|&&x| x).count() as u64)
            .collect()
    }

    /// Number of 1-entries.
    pub fn total_presences(&self) -> u64 {
        self.column_sums().iter().sum()
    }

    /// For each unit, the indices of the species present in it.
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.n_units];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                if x {
                    rows[i].push(j);
                }
            }
        }
        rows
    }

    pub(crate) fn into_parts(self) -> (usize, Vec<String>, Vec<Vec<bool>>) {
        (self.n_units, self.species, self.columns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Bonferroni,
    WorstCase,
    BoundedDd,
    UnboundedRnorm,
    Prop1Oracle,
}

impl BoundMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMethod::Bonferroni => "bonferroni",
            BoundMethod::WorstCase => "worst_case",
            BoundMethod::BoundedDd => "bounded_dd",
            BoundMethod::UnboundedRnorm => "unbounded_rnorm",
            BoundMethod::Prop1Oracle => "prop1_oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diagnostic {
    Number(f64),
    Flag(bool),
    Text(String),
}

impl From<f64> for Diagnostic {
    fn from(x: f64) -> Self {
        Diagnostic::Number(x)
    }
}

impl From<bool> for Diagnostic {
    fn from(x: bool) -> Self {
        Diagnostic::Flag(x)
    }
}

impl From<&str> for Diagnostic {
    fn from(x: &str) -> Self {
        Diagnostic::Text(x.to_owned())
    }
}

/// Upper confidence bound for the maximum unseen prevalence.
///
/// `reported_value = min(raw_value, 1)`; `delta` is set only for
/// [`BoundMethod::BoundedDd`] and `beta` only for [`BoundMethod::UnboundedRnorm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub method: BoundMethod,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub raw_value: f64,
    pub reported_value: f64,
    pub diagnostics: BTreeMap<String, Diagnostic>,
}

impl BoundEstimate {
    pub(crate) fn new(method: BoundMethod, alpha: f64, raw_value: f64) -> Self {
        Self {
            method,
            alpha,
            delta: None,
            beta: None,
            raw_value,
            reported_value: raw_value.min(1.0),
            diagnostics: BTreeMap::new(),
        }
    }

    pub(crate) fn with_diag(mut self, key: &str, value: impl Into<Diagnostic>) -> Self {
        self.diagnostics.insert(key.to_owned(), value.into());
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<&Diagnostic> {
        self.diagnostics.get(key)
    }

    pub fn diagnostic_number(&self, key: &str) -> Option<f64> {
        match self.diagnostics.get(key) {
            Some(Diagnostic::Number(x)) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub n: u64,
    pub u_total: u64,
    pub distinct: u64,
    /// `declared_m - distinct`; absent when no alphabet size is declared.
    pub k_unseen: Option<u64>,
    pub q1: u64,
    pub q2: u64,
    /// `N_j / n` for every listed species.
    pub p_hat: BTreeMap<String, f64>,
}

pub fn sample_stats(sample: &IncidenceSample) -> SampleStats {
    let n = sample.n();
    let distinct = sample.distinct();
    SampleStats {
        n,
        u_total: sample.u_total(),
        distinct,
        k_unseen: sample.declared_m().map(|m| m - distinct),
        q1: sample.frequency_of(1),
        q2: sample.frequency_of(2),
        p_hat: sample
            .iter()
            .map(|(id, c)| (id.into_owned(), c as f64 / n as f64))
            .collect(),
    }
}
