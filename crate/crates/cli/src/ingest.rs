//! Delimited-text ingestion with listwise deletion.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rankmanova::{Dataset64, Factor, FactorialLayout};

use crate::error::{CliError, CliResult};

/// Tokens read as missing values.
const MISSING: [&str; 4] = ["", "NA", "na", "."];

#[derive(Debug, Clone)]
pub struct Ingested {
    pub data: Dataset64,
    pub layout: FactorialLayout,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

fn is_missing(s: &str) -> bool {
    MISSING.contains(&s.trim())
}

pub fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') && !header.contains(',') {
        b'\t'
    } else {
        b','
    }
}

/// Numeric levels sort by value, anything else lexicographically.
fn sort_levels(levels: BTreeSet<String>) -> Vec<String> {
    let mut out: Vec<String> = levels.into_iter().collect();
    let numeric: Option<Vec<f64>> = out.iter().map(|l| l.parse::<f64>().ok()).collect();
    if let Some(values) = numeric {
        let mut pairs: Vec<(f64, String)> = values.into_iter().zip(out).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        out = pairs.into_iter().map(|p| p.1).collect();
    }
    out
}

pub fn read(path: &Path, factors: &[String], outcomes: &[String]) -> CliResult<Ingested> {
    if !path.exists() {
        return Err(CliError::FileNotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Read(e.to_string()))?;
    parse(&text, factors, outcomes)
}

pub fn parse(text: &str, factors: &[String], outcomes: &[String]) -> CliResult<Ingested> {
    if factors.is_empty() || factors.len() > 2 {
        return Err(CliError::Config(format!(
            "expected one or two factor columns, got {}",
            factors.len()
        )));
    }
    if outcomes.is_empty() {
        return Err(CliError::Config("at least one outcome column is required".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(text))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let column = |name: &String| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::MissingColumn(name.clone()))
    };
    let fcols = factors.iter().map(column).collect::<CliResult<Vec<_>>>()?;
    let ocols = outcomes.iter().map(column).collect::<CliResult<Vec<_>>>()?;

    let mut rows: Vec<(Vec<String>, Vec<f64>)> = Vec::new();
    let mut rows_read = 0;
    for record in reader.records() {
        let record = record?;
        rows_read += 1;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |c: usize| record.get(c).unwrap_or("");
        if fcols.iter().chain(&ocols).any(|&c| is_missing(cell(c))) {
            continue;
        }
        let mut values = Vec::with_capacity(ocols.len());
        for (&c, name) in ocols.iter().zip(outcomes) {
            let raw = cell(c);
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(CliError::NotNumeric {
                        line,
                        column: name.clone(),
                        value: raw.to_string(),
                    })
                }
            }
        }
        rows.push((fcols.iter().map(|&c| cell(c).to_string()).collect(), values));
    }
    let rows_dropped = rows_read - rows.len();
    if rows_dropped > 0 {
        log::info!("dropped {rows_dropped} of {rows_read} rows with missing values");
    }
    if rows.is_empty() {
        return Err(CliError::NoCompleteRows);
    }

    let layout = FactorialLayout::new(
        factors
            .iter()
            .enumerate()
            .map(|(f, name)| Factor {
                name: name.clone(),
                levels: sort_levels(rows.iter().map(|r| r.0[f].clone()).collect()),
            })
            .collect(),
    )?;
    if layout.cells() < 2 {
        return Err(CliError::SingleGroup);
    }
    let mut groups: Vec<Vec<Vec<f64>>> = vec![Vec::new(); layout.cells()];
    for (levels, values) in rows {
        let cell: Vec<usize> = levels
            .iter()
            .zip(layout.factors())
            .map(|(l, f)| f.levels.iter().position(|x| x == l).expect("level was collected"))
            .collect();
        groups[layout.flat(&cell)?].push(values);
    }
    if let Some(empty) = groups.iter().position(|g| g.is_empty()) {
        return Err(CliError::EmptyCell(layout.cell_label(empty)?));
    }
    let data = Dataset64::validate(groups)?.with_labels(outcomes.to_vec())?;
    Ok(Ingested {
        data,
        layout,
        rows_read,
        rows_dropped,
    })
}
