//! Reading and writing the observation CSV schema.

use std::io::{Read, Write};
use std::path::Path;

use pbs_ofa_core::econometrics::Observation;
use pbs_ofa_core::format::sig15;
use thiserror::Error;

pub const OBSERVATION_COLUMNS: [&str; 4] = ["block_number", "builder", "log10_price_change_abs", "is_hft"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema mismatch in column {position}: expected `{expected}`, found `{found}`")]
    Column { position: usize, expected: &'static str, found: String },
    #[error("row {row}: column `{column}`: {reason}")]
    Row { row: usize, column: &'static str, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Vec<Observation>, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    read_observations(file)
}

/// Rows are numbered from 1, starting at the first line after the header.
pub fn read_observations<R: Read>(input: R) -> Result<Vec<Observation>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    for (position, expected) in OBSERVATION_COLUMNS.iter().enumerate() {
        let found = header.get(position).unwrap_or("");
        if found != *expected {
            return Err(IngestError::Column { position: position + 1, expected, found: found.to_owned() });
        }
    }
    if let Some(extra) = header.get(OBSERVATION_COLUMNS.len()) {
        return Err(IngestError::Column {
            position: OBSERVATION_COLUMNS.len() + 1,
            expected: "<end of header>",
            found: extra.to_owned(),
        });
    }

    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |idx: usize| -> Result<&str, IngestError> {
            record.get(idx).ok_or(IngestError::Row { row, column: OBSERVATION_COLUMNS[idx], reason: "missing value".into() })
        };
        let bad = |idx: usize, reason: String| IngestError::Row { row, column: OBSERVATION_COLUMNS[idx], reason };

        let block_number = field(0)?.parse::<u64>().map_err(|e| bad(0, e.to_string()))?;
        let builder = field(1)?;
        let raw_x = field(2)?;
        let x = raw_x.parse::<f64>().map_err(|e| bad(2, format!("`{raw_x}`: {e}")))?;
        if !x.is_finite() {
            return Err(bad(2, format!("must be finite, got `{raw_x}`")));
        }
        let is_hft = match field(3)? {
            "0" => false,
            "1" => true,
            other => return Err(bad(3, format!("must be 0 or 1, got `{other}`"))),
        };
        if record.len() > OBSERVATION_COLUMNS.len() {
            return Err(IngestError::Row { row, column: "is_hft", reason: "trailing fields after the last column".into() });
        }
        out.push(Observation::new(block_number, builder, x, is_hft).map_err(|e| bad(2, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_observations<W: Write>(rows: &[Observation], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(OBSERVATION_COLUMNS)?;
    for o in rows {
        let block = o.block_number.to_string();
        let x = sig15(o.x);
        writer.write_record([block.as_str(), o.builder.as_str(), x.as_str(), if o.is_hft { "1" } else { "0" }])?;
    }
    writer.flush()?;
    Ok(())
}
