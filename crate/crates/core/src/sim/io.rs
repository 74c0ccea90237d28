use std::io::Write;

use serde::{Deserialize, Serialize};

use super::integrate::{Classification, SimulationResult};
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes the stored trajectory as CSV rows `time, cell, x0, x1, ...`.
pub fn write_trajectory_csv<W: Write>(out: W, result: &SimulationResult, state_dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string(), "cell".to_string()];
    header.extend((0..state_dim).map(|k| format!("x{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for s in &result.trajectory {
        for (cell, chunk) in s.state.chunks(state_dim).enumerate() {
            let mut row = vec![s.time.to_string(), cell.to_string()];
            row.extend(chunk.iter().map(f64::to_string));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes per-cell final states as CSV rows `cell, x0, x1, ...`.
pub fn write_snapshot_csv<W: Write>(out: W, state: &[f64], state_dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cell".to_string()];
    header.extend((0..state_dim).map(|k| format!("x{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for (cell, chunk) in state.chunks(state_dim).enumerate() {
        let mut row = vec![cell.to_string()];
        row.extend(chunk.iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON sidecar of a pattern snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub classification: Classification,
    pub converged: bool,
    pub residual: f64,
    pub final_time: f64,
    pub initial_spread: f64,
    pub max_spread: f64,
}

impl From<&SimulationResult> for SnapshotMeta {
    fn from(r: &SimulationResult) -> Self {
        Self {
            classification: r.classification,
            converged: r.converged,
            residual: r.residual,
            final_time: r.final_time,
            initial_spread: r.initial_spread,
            max_spread: r.max_spread,
        }
    }
}

/// Reads a trajectory CSV back into `(time, cell, state)` rows.
pub fn read_trajectory_csv(text: &str) -> Result<Vec<(f64, usize, Vec<f64>)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = |m: &str| Error::Parse { line: i + 2, message: m.into() };
        let time: f64 = rec.get(0).ok_or_else(|| bad("missing time"))?.parse().map_err(|_| bad("bad time"))?;
        let cell: usize = rec.get(1).ok_or_else(|| bad("missing cell"))?.parse().map_err(|_| bad("bad cell"))?;
        let state = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|_| bad("bad state value")))
            .collect::<Result<Vec<_>>>()?;
        rows.push((time, cell, state));
    }
    Ok(rows)
}
