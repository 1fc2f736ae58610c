//! CSV traces and their JSON sidecars.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::run::IterationRecord;
use super::stopping::StopReason;
use crate::entropy::Extended;
use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub const TRACE_COLUMNS: [&str; 8] =
    ["k", "residual", "kl_to_truth", "D_to_truth", "l1_error", "mass", "ln_ck", "clamp_events"];

/// Run metadata written next to a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub problem_id: String,
    pub method: String,
    pub m: u8,
    pub lambda: f64,
    pub c: f64,
    pub tau: f64,
    /// Noise level used by the stopping rule and the descent checks.
    pub delta: f64,
    pub seed: Option<u64>,
    pub blocks: Option<usize>,
    pub grid: GridSpec,
    pub data_len: usize,
    pub operator_id: String,
    pub stop_rule: String,
    pub stop_reason: Option<StopReason>,
    pub k_star: Option<usize>,
    pub rows: usize,
    pub initial: String,
    pub noise_sigma: f64,
    pub noise_model: String,
    pub clamp_events: usize,
    pub error: Option<String>,
}

impl TraceMeta {
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_ext(v: Option<Extended>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(records: &[IterationRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_COLUMNS)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.residual.to_string(),
            opt_ext(r.kl_to_truth),
            opt_ext(r.d_to_truth),
            opt_f64(r.l1_error),
            r.mass.to_string(),
            opt_f64(r.ln_ck),
            r.clamp_events.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(cell: &str, column: &str, line: usize) -> Result<f64> {
    match cell.trim() {
        "inf" => Ok(f64::INFINITY),
        s => s
            .parse()
            .map_err(|_| Error::Trace(format!("line {line}: column {column} holds {s:?}"))),
    }
}

fn parse_opt(cell: &str, column: &str, line: usize) -> Result<Option<f64>> {
    if cell.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(cell, column, line).map(Some)
    }
}

fn to_ext(v: Option<f64>) -> Option<Extended> {
    v.map(|x| if x == f64::INFINITY { Extended::Infinite } else { Extended::Finite(x) })
}

/// Reads a trace; every header column must be present (order is free).
pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<IterationRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut index = [0usize; 8];
    for (slot, name) in index.iter_mut().zip(TRACE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Trace(format!("missing column {name}")))?;
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let cell = |i: usize| rec.get(index[i]).unwrap_or("");
        let k = cell(0)
            .trim()
            .parse()
            .map_err(|_| Error::Trace(format!("line {line}: bad k {:?}", cell(0))))?;
        let clamp_events = cell(7)
            .trim()
            .parse()
            .map_err(|_| Error::Trace(format!("line {line}: bad clamp_events {:?}", cell(7))))?;
        out.push(IterationRecord {
            k,
            residual: parse_f64(cell(1), TRACE_COLUMNS[1], line)?,
            kl_to_truth: to_ext(parse_opt(cell(2), TRACE_COLUMNS[2], line)?),
            d_to_truth: to_ext(parse_opt(cell(3), TRACE_COLUMNS[3], line)?),
            l1_error: parse_opt(cell(4), TRACE_COLUMNS[4], line)?,
            mass: parse_f64(cell(5), TRACE_COLUMNS[5], line)?,
            ln_ck: parse_opt(cell(6), TRACE_COLUMNS[6], line)?,
            clamp_events,
            d_step: None,
            fidelity: None,
        });
    }
    Ok(out)
}
