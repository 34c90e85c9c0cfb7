//! CSV result rows.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    /// SHA-256 of the canonical config and the row key.
    pub digest: String,
    pub method: String,
    pub predicted: Option<f64>,
    pub predicted_exact: Option<String>,
    pub certainty: String,
    /// Published numerical value, where one exists.
    pub reference: Option<f64>,
    /// Contact level y_c or balanced level y* of entry-exit runs.
    pub level: Option<f64>,
    pub estimated: Option<f64>,
    pub stderr: Option<f64>,
    pub snapped: Option<String>,
    pub bound: Option<String>,
    pub error: Option<String>,
    pub runtime_s: Option<f64>,
}

pub fn digest(canonical_config: &str, key: &str) -> String {
    let mut h = Sha256::new();
    h.update(canonical_config.as_bytes());
    h.update(b"\n");
    h.update(key.as_bytes());
    hex::encode(h.finalize())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Domain(format!("csv: {e}"))
}

pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(HEADER).map_err(csv_err)?;
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()
        .map_err(|e| Error::Domain(format!("csv: {e}")))?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != HEADER {
        return Err(Error::Domain(format!("unexpected CSV header {header:?}")));
    }
    rd.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub const HEADER: [&str; 14] = [
    "experiment",
    "digest",
    "method",
    "predicted",
    "predicted_exact",
    "certainty",
    "reference",
    "level",
    "estimated",
    "stderr",
    "snapped",
    "bound",
    "error",
    "runtime_s",
];
