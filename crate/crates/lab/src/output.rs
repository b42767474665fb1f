//! CSV and JSON persistence.

use std::fs;
use std::path::Path;

use nls_core::evolution::EvolutionTrace;
use serde::Serialize;

use crate::{LabError, Result};

pub const TRACE_COLUMNS: [&str; 10] =
    ["time", "mass", "energy", "grad_norm", "hsc_norm", "j", "jprime", "int_p1", "int_p2", "edge_fraction"];

fn columns(t: &EvolutionTrace) -> [&Vec<f64>; 10] {
    [&t.times, &t.mass, &t.energy, &t.grad_norm, &t.hsc_norm, &t.j, &t.jprime, &t.int_p1, &t.int_p2, &t.edge_fraction]
}

/// Shortest round-trip formatting, so reloaded traces are bit-identical.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_trace_csv(path: &Path, trace: &EvolutionTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_COLUMNS)?;
    let cols = columns(trace);
    for i in 0..trace.len() {
        w.write_record(cols.iter().map(|c| fmt_f64(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the scalar columns back; snapshots are loaded separately.
pub fn read_trace_csv(path: &Path) -> Result<EvolutionTrace> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(TRACE_COLUMNS) {
        return Err(LabError::Data(format!("{}: unexpected trace header", path.display())));
    }
    let mut t = EvolutionTrace::default();
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| LabError::Data(format!("{}: {e}", path.display()))))
            .collect::<Result<_>>()?;
        if v.len() != TRACE_COLUMNS.len() {
            return Err(LabError::Data(format!("{}: short trace row", path.display())));
        }
        for (col, x) in [
            &mut t.times,
            &mut t.mass,
            &mut t.energy,
            &mut t.grad_norm,
            &mut t.hsc_norm,
            &mut t.j,
            &mut t.jprime,
            &mut t.int_p1,
            &mut t.int_p2,
            &mut t.edge_fraction,
        ]
        .into_iter()
        .zip(v)
        {
            col.push(x);
        }
    }
    Ok(t)
}

/// Column-wise series with optional entries written as empty cells.
pub fn write_series_csv(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.map(fmt_f64).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Data(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trips_exactly() {
        let mut t = EvolutionTrace::default();
        for i in 0..5 {
            let x = 0.1 * i as f64 + 1.0 / 3.0;
            t.times.push(x);
            t.mass.push(x.sin());
            t.energy.push(-x.exp());
            t.grad_norm.push(1e-300 * x);
            t.hsc_norm.push(x);
            t.j.push(x);
            t.jprime.push(-0.0);
            t.int_p1.push(x);
            t.int_p2.push(x);
            t.edge_fraction.push(1e-17);
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trace.csv");
        write_trace_csv(&p, &t).unwrap();
        let back = read_trace_csv(&p).unwrap();
        assert_eq!(back.times, t.times);
        assert_eq!(back.energy, t.energy);
        assert_eq!(back.grad_norm, t.grad_norm);
        assert_eq!(back.edge_fraction, t.edge_fraction);
    }
}
