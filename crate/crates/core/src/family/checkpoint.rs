//! Resumable main-term sweeps: one CSV row per prime plus a JSON sidecar.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{prime_aggregates, sweep_primes, FamilyError, PrimeAggregate};
use crate::invariants::ArithmeticFunction;
use crate::numtheory::is_prime;

pub const SCHEMA_VERSION: u32 = 1;

const HEADER: [&str; 4] = ["p", "main_term_contrib", "howe_max_dev", "census_json"];

/// Primes per batch between checkpoint appends.
const BATCH: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub function: String,
    pub x_max: f64,
    pub schema_version: u32,
}

fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_meta(path: &Path, meta: &CheckpointMeta) -> Result<(), FamilyError> {
    let text = serde_json::to_string_pretty(meta).expect("plain struct serializes");
    std::fs::write(meta_path(path), text + "\n")?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> FamilyError {
    let line = e.position().map_or(0, |pos| pos.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FamilyError::Io(io),
        kind => FamilyError::CorruptCheckpoint { path: path.display().to_string(), line, reason: format!("{kind:?}") },
    }
}

fn write_rows(path: &Path, file: File, header: bool, aggs: &[PrimeAggregate]) -> Result<(), FamilyError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if header {
        w.write_record(HEADER).map_err(|e| csv_error(path, e))?;
    }
    for a in aggs {
        let census = serde_json::to_string(&a.census).expect("integer map serializes");
        // `Display` for f64 prints the shortest string that parses back to the same value
        w.write_record([
            a.p.to_string(),
            a.main_term_contrib.to_string(),
            a.howe_max_dev.to_string(),
            census,
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Creates (or truncates) a checkpoint holding `aggs`.
pub fn write_checkpoint(path: &Path, meta: &CheckpointMeta, aggs: &[PrimeAggregate]) -> Result<(), FamilyError> {
    write_rows(path, File::create(path)?, true, aggs)?;
    write_meta(path, meta)
}

/// Appends rows to an existing checkpoint.
pub fn append_checkpoint(path: &Path, aggs: &[PrimeAggregate]) -> Result<(), FamilyError> {
    write_rows(path, OpenOptions::new().append(true).open(path)?, false, aggs)
}

/// Reads the sidecar and every row, checking the header, the schema and row order.
pub fn read_checkpoint(path: &Path) -> Result<(CheckpointMeta, Vec<PrimeAggregate>), FamilyError> {
    let shown = path.display().to_string();
    let mismatch = |reason: String| FamilyError::CheckpointMismatch { path: shown.clone(), reason };
    let meta_text = std::fs::read_to_string(meta_path(path))?;
    let meta: CheckpointMeta =
        serde_json::from_str(&meta_text).map_err(|e| mismatch(format!("unreadable metadata: {e}")))?;
    if meta.schema_version != SCHEMA_VERSION {
        return Err(mismatch(format!("schema version {} (expected {SCHEMA_VERSION})", meta.schema_version)));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(HEADER) {
        return Err(FamilyError::CorruptCheckpoint { path: shown, line: 1, reason: "unexpected header".into() });
    }
    let mut out: Vec<PrimeAggregate> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |pos| pos.line());
        let corrupt = |reason: String| FamilyError::CorruptCheckpoint { path: shown.clone(), line, reason };
        if record.len() != HEADER.len() {
            return Err(corrupt(format!("expected {} fields, found {}", HEADER.len(), record.len())));
        }
        let p: u64 = record[0].parse().map_err(|e| corrupt(format!("bad p: {e}")))?;
        if p < 5 || !is_prime(p) {
            return Err(corrupt(format!("{p} is not a prime >= 5")));
        }
        if out.last().is_some_and(|prev| prev.p >= p) {
            return Err(corrupt(format!("prime {p} out of ascending order")));
        }
        let real = |i: usize, what: &str| -> Result<f64, FamilyError> {
            record[i].parse().map_err(|e| corrupt(format!("bad {what}: {e}")))
        };
        let main_term_contrib = real(1, "main_term_contrib")?;
        let howe_max_dev = real(2, "howe_max_dev")?;
        let census: BTreeMap<u64, u64> =
            serde_json::from_str(&record[3]).map_err(|e| corrupt(format!("bad census_json: {e}")))?;
        out.push(PrimeAggregate { p, main_term_contrib, census, howe_max_dev });
    }
    Ok((meta, out))
}

/// Aggregates for every prime `5 <= p <= x_max`, reusing and extending the checkpoint at `path`.
///
/// Rows already present are not recomputed. New primes are computed in ascending batches and
/// appended after each batch, so an interrupted run loses at most one batch.
pub fn resume_sweep(path: &Path, af: &ArithmeticFunction, x_max: f64) -> Result<Vec<PrimeAggregate>, FamilyError> {
    let mut have = if path.exists() {
        let (meta, rows) = read_checkpoint(path)?;
        if meta.function != af.name() {
            return Err(FamilyError::CheckpointMismatch {
                path: path.display().to_string(),
                reason: format!("written for `{}`, not `{}`", meta.function, af.name()),
            });
        }
        if x_max > meta.x_max {
            write_meta(path, &CheckpointMeta { x_max, ..meta })?;
        }
        rows
    } else {
        let meta = CheckpointMeta { function: af.name().to_string(), x_max, schema_version: SCHEMA_VERSION };
        write_checkpoint(path, &meta, &[])?;
        Vec::new()
    };
    let last = have.last().map_or(0, |a| a.p);
    let todo: Vec<u64> = sweep_primes(x_max).into_iter().filter(|&p| p > last).collect();
    for batch in todo.chunks(BATCH) {
        let aggs = prime_aggregates(batch, af)?;
        append_checkpoint(path, &aggs)?;
        have.extend(aggs);
    }
    have.retain(|a| a.p as f64 <= x_max);
    Ok(have)
}
