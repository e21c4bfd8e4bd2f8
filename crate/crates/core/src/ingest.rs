//! Reading observation files: one numeric column of individual values, or
//! several columns of subgroup measurements reduced to row means.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::charting::Sample;
use crate::error::{Error, Result};

/// How multi-column rows become single observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    /// Rows must hold a single value.
    #[default]
    None,
    /// Each row is a subgroup; use its mean.
    Mean,
}

/// Whether the first line is a header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// A header when no cell of the first line parses as a number.
    #[default]
    Auto,
    Present,
    Absent,
}

/// Parsed rows plus the sample they reduce to.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
    pub sample: Sample,
}

fn ingest_err(row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Ingest {
        row,
        column,
        message: message.into(),
    }
}

/// Parses CSV text from a reader. Rows and columns in errors are 1-based
/// and count the header line.
pub fn read_observations<R: Read>(reader: R, header: HeaderMode, aggregate: Aggregate) -> Result<Observations> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| ingest_err(i + 1, 1, e.to_string()))?;
        if rec.iter().all(|cell| cell.is_empty()) {
            continue;
        }
        records.push((rec.position().map_or(i as u64 + 1, |p| p.line()) as usize, rec));
    }
    let has_header = match header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => records
            .first()
            .is_some_and(|(_, rec)| rec.iter().all(|cell| cell.parse::<f64>().is_err())),
    };
    let header_row = if has_header && !records.is_empty() {
        let (_, rec) = records.remove(0);
        Some(rec.iter().map(str::to_string).collect::<Vec<_>>())
    } else {
        None
    };
    let width = header_row
        .as_ref()
        .map(Vec::len)
        .or_else(|| records.first().map(|(_, rec)| rec.len()))
        .unwrap_or(0);
    let mut rows = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(ingest_err(
                *line,
                rec.len().min(width) + 1,
                format!("expected {width} columns, found {}", rec.len()),
            ));
        }
        let mut row = Vec::with_capacity(width);
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| ingest_err(*line, j + 1, format!("{cell:?} is not a number")))?;
            if !v.is_finite() {
                return Err(ingest_err(*line, j + 1, format!("{cell:?} is not finite")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    let sample = match aggregate {
        Aggregate::Mean => Sample::from_subgroups(&rows)?,
        Aggregate::None => {
            if width > 1 {
                return Err(ingest_err(
                    1,
                    2,
                    format!("{width} columns found; use mean aggregation for subgroup data"),
                ));
            }
            Sample::new(rows.iter().map(|r| r[0]).collect())?
        }
    };
    Ok(Observations {
        header: header_row,
        rows,
        sample,
    })
}

/// Reads an observation file from disk.
pub fn read_observations_file(path: &Path, header: HeaderMode, aggregate: Aggregate) -> Result<Observations> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_observations(file, header, aggregate)
}
