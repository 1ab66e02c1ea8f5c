//! Predictions produced outside this crate.
//!
//! The CSV has a header row; the first column is `y_true` and every further
//! column holds one model's predictions, named by its header.

use std::path::Path;

use crate::data::TaskKind;
use crate::error::{Error, Result};
use crate::error_metrics::{indicator_errors, residual_errors, ErrorVector};

pub const TRUTH_COLUMN: &str = "y_true";

/// Reads a predictions file and returns one error vector per model column.
pub fn read_prediction_errors(path: impl AsRef<Path>, task: TaskKind) -> Result<Vec<ErrorVector>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prediction_errors(&text, task, &path.display().to_string())
}

pub fn parse_prediction_errors(text: &str, task: TaskKind, provenance: &str) -> Result<Vec<ErrorVector>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = records.next().ok_or(Error::MissingHeader)??;
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    if names.first().map(String::as_str) != Some(TRUTH_COLUMN) {
        return Err(Error::MissingTarget(TRUTH_COLUMN.into()));
    }
    if names.len() < 3 {
        return Err(Error::Fleet(format!(
            "need at least 2 model columns, got {}",
            names.len() - 1
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for n in &names[1..] {
        if n.is_empty() {
            return Err(Error::Csv("empty column name in header".into()));
        }
        if !seen.insert(n) {
            return Err(Error::DuplicateFeature(n.clone()));
        }
    }

    let mut cols: Vec<Vec<&str>> = vec![Vec::new(); names.len()];
    let rows: Vec<csv::StringRecord> = records.collect::<std::result::Result<_, _>>()?;
    for (r, rec) in rows.iter().enumerate() {
        if rec.len() != names.len() {
            return Err(Error::Csv(format!(
                "row {} has {} fields, expected {}",
                r + 1,
                rec.len(),
                names.len()
            )));
        }
        for (c, v) in rec.iter().enumerate() {
            cols[c].push(v);
        }
    }
    let parse_err = |row: usize, col: usize, v: &str| Error::Parse {
        row: row + 1,
        column: names[col].clone(),
        value: v.to_string(),
    };

    match task {
        TaskKind::Regression => {
            let parsed: Vec<Vec<f64>> = cols
                .iter()
                .enumerate()
                .map(|(c, col)| {
                    col.iter()
                        .enumerate()
                        .map(|(r, v)| v.parse::<f64>().map_err(|_| parse_err(r, c, v)))
                        .collect()
                })
                .collect::<Result<_>>()?;
            parsed[1..]
                .iter()
                .zip(&names[1..])
                .map(|(p, n)| Ok(residual_errors(&parsed[0], p)?.labeled(n.clone(), provenance)))
                .collect()
        }
        TaskKind::Classification => {
            let parsed: Vec<Vec<u64>> = cols
                .iter()
                .enumerate()
                .map(|(c, col)| {
                    col.iter()
                        .enumerate()
                        .map(|(r, v)| v.parse::<u64>().map_err(|_| parse_err(r, c, v)))
                        .collect()
                })
                .collect::<Result<_>>()?;
            parsed[1..]
                .iter()
                .zip(&names[1..])
                .map(|(p, n)| Ok(indicator_errors(&parsed[0], p)?.labeled(n.clone(), provenance)))
                .collect()
        }
    }
}
