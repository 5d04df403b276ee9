//! Incidence file formats.
//!
//! * `dense`: a header of species ids, then one row of 0/1 cells per unit.
//! * `sparse`: headerless `unit_id,species_id` presence records; duplicates
//!   collapse and `n` is the number of distinct units (or `--n` if larger).
//! * `counts`: headerless `species_id,count` records; `--n` is mandatory.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use clap::ValueEnum;
use mmax_core::{IncidenceMatrix, IncidenceSample};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Dense,
    Sparse,
    Counts,
}

fn reader<R: Read>(r: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))
}

pub fn parse_incidence(path: &Path, format: InputFormat, n_override: Option<u64>) -> CliResult<IncidenceSample> {
    parse_incidence_from(open(path)?, format, n_override)
}

pub fn parse_incidence_from<R: Read>(r: R, format: InputFormat, n_override: Option<u64>) -> CliResult<IncidenceSample> {
    match format {
        InputFormat::Counts => parse_counts(r, n_override),
        InputFormat::Dense | InputFormat::Sparse => {
            Ok(IncidenceSample::from_matrix(&parse_units_from(r, format, n_override)?)?)
        }
    }
}

/// Unit-level matrix for the dense and sparse formats.
pub fn parse_units(path: &Path, format: InputFormat, n_override: Option<u64>) -> CliResult<IncidenceMatrix> {
    parse_units_from(open(path)?, format, n_override)
}

pub fn parse_units_from<R: Read>(r: R, format: InputFormat, n_override: Option<u64>) -> CliResult<IncidenceMatrix> {
    match format {
        InputFormat::Dense => parse_dense(r, n_override),
        InputFormat::Sparse => parse_sparse(r, n_override),
        InputFormat::Counts => Err(CliError::Usage("the counts format carries no unit-level data".into())),
    }
}

fn parse_dense<R: Read>(r: R, n_override: Option<u64>) -> CliResult<IncidenceMatrix> {
    let mut rdr = reader(r, true);
    let species: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if species.is_empty() || species.iter().any(String::is_empty) {
        return Err(CliError::Data("line 1: header must list non-empty species ids".into()));
    }
    let mut columns = vec![Vec::new(); species.len()];
    let mut n = 0usize;
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() != species.len() {
            return Err(CliError::Data(format!(
                "line {line}: expected {} cells, found {}",
                species.len(),
                record.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            let v = match cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(CliError::Data(format!(
                        "line {line}, column {}: malformed cell '{other}' (expected 0 or 1)",
                        j + 1
                    )))
                }
            };
            columns[j].push(v);
        }
        n += 1;
    }
    if let Some(want) = n_override {
        if want != n as u64 {
            return Err(CliError::Usage(format!(
                "--n {want} disagrees with the {n} rows of the dense file"
            )));
        }
    }
    Ok(IncidenceMatrix::new(n, species, columns)?)
}

fn parse_sparse<R: Read>(r: R, n_override: Option<u64>) -> CliResult<IncidenceMatrix> {
    let mut rdr = reader(r, false);
    let mut units: HashMap<String, usize> = HashMap::new();
    let mut species: Vec<String> = Vec::new();
    let mut species_idx: HashMap<String, usize> = HashMap::new();
    let mut events: Vec<(usize, usize)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() != 2 || record[0].is_empty() || record[1].is_empty() {
            return Err(CliError::Data(format!("line {line}: expected 'unit_id,species_id'")));
        }
        let next_unit = units.len();
        let u = *units.entry(record[0].to_string()).or_insert(next_unit);
        let s = match species_idx.get(&record[1]) {
            Some(&s) => s,
            None => {
                species.push(record[1].to_string());
                species_idx.insert(record[1].to_string(), species.len() - 1);
                species.len() - 1
            }
        };
        events.push((u, s));
    }
    let mut n = units.len();
    if let Some(want) = n_override {
        if want < n as u64 {
            return Err(CliError::Usage(format!(
                "--n {want} is below the {n} distinct units in the file"
            )));
        }
        n = want as usize;
    }
    let mut columns = vec![vec![false; n]; species.len()];
    for (u, s) in events {
        columns[s][u] = true;
    }
    Ok(IncidenceMatrix::new(n, species, columns)?)
}

fn parse_counts<R: Read>(r: R, n_override: Option<u64>) -> CliResult<IncidenceSample> {
    let n = n_override.ok_or_else(|| CliError::Usage("--n is required with --format counts".into()))?;
    let mut rdr = reader(r, false);
    let mut counts = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() != 2 || record[0].is_empty() {
            return Err(CliError::Data(format!("line {line}: expected 'species_id,count'")));
        }
        let c: u64 = record[1]
            .parse()
            .map_err(|_| CliError::Data(format!("line {line}: malformed count '{}'", &record[1])))?;
        if c > n {
            return Err(CliError::Data(format!(
                "line {line}: count exceeds n ({c} > {n}) for species '{}'",
                &record[0]
            )));
        }
        counts.push((record[0].to_string(), c));
    }
    Ok(IncidenceSample::new(n, counts, None)?)
}
