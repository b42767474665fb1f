//! Parameter sweeps on a bounded worker pool.

use std::path::Path;
use std::str::FromStr;

use nls_core::evolution::energy;
use nls_core::ground::min_rho;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, InitialData};
use crate::output::{fmt_f64, write_json};
use crate::run::{critical_q, initial_field};
use crate::{LabError, Result, THREADS_ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    MassRatio,
    C,
    Rho,
    L0,
    B,
    Amplitude,
    Width,
}

impl AxisName {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "mass_ratio" => Self::MassRatio,
            "c" => Self::C,
            "rho" => Self::Rho,
            "l0" => Self::L0,
            "b" => Self::B,
            "amplitude" => Self::Amplitude,
            "width" => Self::Width,
            _ => return Err(LabError::Usage(format!("unknown sweep axis '{s}'"))),
        })
    }
}

/// `name=v1,v2,...`; an empty value list is allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl FromStr for Axis {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, list) =
            s.split_once('=').ok_or_else(|| LabError::Usage(format!("axis '{s}' is not of the form name=v1,v2")))?;
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| v.parse::<f64>().map_err(|e| LabError::Usage(format!("axis value '{v}': {e}"))))
            .collect::<Result<_>>()?;
        Ok(Self { name: AxisName::parse(name.trim())?, values })
    }
}

impl Axis {
    /// The config with the axis coordinate set to `v`.
    pub fn apply(&self, base: &ExperimentConfig, v: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        let bad = || LabError::Usage(format!("axis {:?} does not apply to {:?}", self.name, base.initial));
        cfg.initial = match (self.name, base.initial) {
            (AxisName::MassRatio, InitialData::MassRatio { .. }) => InitialData::MassRatio { ratio: v },
            (AxisName::MassRatio, InitialData::ThresholdFamily { .. }) => InitialData::MassRatio { ratio: v },
            (AxisName::C, InitialData::ThresholdFamily { c_im, rho, .. }) => {
                InitialData::ThresholdFamily { c_re: v, c_im, rho }
            }
            (AxisName::Rho, InitialData::ThresholdFamily { c_re, c_im, .. }) => {
                InitialData::ThresholdFamily { c_re, c_im, rho: v }
            }
            (AxisName::L0, InitialData::Collapse { b, .. }) => InitialData::Collapse { l0: v, b },
            (AxisName::B, InitialData::Collapse { l0, .. }) => InitialData::Collapse { l0, b: v },
            (AxisName::Amplitude, InitialData::Gaussian { width, .. }) => InitialData::Gaussian { amplitude: v, width },
            (AxisName::Width, InitialData::Gaussian { amplitude, .. }) => InitialData::Gaussian { amplitude, width: v },
            _ => return Err(bad()),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub blew_up: Option<bool>,
    pub reason: Option<String>,
    pub t_star: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub final_time: Option<f64>,
    pub steps: Option<usize>,
    pub energy0: Option<f64>,
    /// `ρ*(c)` for threshold-family points.
    pub rho_star: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub axis: Axis,
    /// Runs never resume global behaviour after the first blow-up along the sorted axis.
    pub monotone: bool,
    /// Last global and first blow-up coordinate, when both occur.
    pub transition: Option<(f64, f64)>,
    pub failures: usize,
}

fn run_point(base: &ExperimentConfig, axis: &Axis, v: f64) -> SweepRow {
    let mut row = SweepRow {
        value: v,
        blew_up: None,
        reason: None,
        t_star: None,
        final_grad_norm: None,
        final_time: None,
        steps: None,
        energy0: None,
        rho_star: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let cfg = axis.apply(base, v)?;
        if let InitialData::ThresholdFamily { c_re, c_im, .. } = cfg.initial {
            let q = critical_q(&cfg, None)?;
            row.rho_star = min_rho(&q, Complex64::new(c_re, c_im), &cfg.params).ok();
        }
        let out = crate::run::execute(&cfg, None)?;
        let q = out.q.as_ref();
        row.energy0 = Some(energy(&initial_field(&cfg, q)?, &cfg.params));
        row.blew_up = Some(out.report.blew_up);
        row.reason = Some(format!("{:?}", out.report.reason));
        row.t_star = out.report.t_star_estimate;
        row.final_grad_norm = Some(out.report.final_grad_norm);
        row.final_time = Some(out.report.final_time);
        row.steps = Some(out.report.steps);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Pool size from the environment, 0 meaning rayon's default.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| LabError::Usage(format!("{THREADS_ENV}='{s}' is not a count"))),
        Err(_) => Ok(0),
    }
}

pub fn sweep(base: &ExperimentConfig, axis: &Axis, threads: usize) -> Result<(Vec<SweepRow>, SweepSummary)> {
    base.validate()?;
    // Surface usage errors before spending time on any run.
    if let Some(&v) = axis.values.first() {
        axis.apply(base, v)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Data(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| axis.values.par_iter().map(|&v| run_point(base, axis, v)).collect());
    Ok((rows.clone(), summarize(axis, &rows)))
}

pub fn summarize(axis: &Axis, rows: &[SweepRow]) -> SweepSummary {
    let mut ok: Vec<(f64, bool)> = rows.iter().filter_map(|r| r.blew_up.map(|b| (r.value, b))).collect();
    ok.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first_blow = ok.iter().position(|r| r.1);
    let monotone = first_blow.map_or(true, |i| ok[i..].iter().all(|r| r.1));
    let transition = match first_blow {
        Some(i) if i > 0 => Some((ok[i - 1].0, ok[i].0)),
        _ => None,
    };
    SweepSummary { axis: axis.clone(), monotone, transition, failures: rows.iter().filter(|r| r.error.is_some()).count() }
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "value",
    "blew_up",
    "reason",
    "t_star",
    "final_grad_norm",
    "final_time",
    "steps",
    "energy0",
    "rho_star",
    "error",
];

pub fn write_sweep(dir: &Path, rows: &[SweepRow], summary: &SweepSummary) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    w.write_record(SWEEP_COLUMNS)?;
    let f = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        w.write_record([
            fmt_f64(r.value),
            r.blew_up.map(|b| b.to_string()).unwrap_or_default(),
            r.reason.clone().unwrap_or_default(),
            f(r.t_star),
            f(r.final_grad_norm),
            f(r.final_time),
            r.steps.map(|s| s.to_string()).unwrap_or_default(),
            f(r.energy0),
            f(r.rho_star),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    write_json(&dir.join("sweep.json"), summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    fn row(value: f64, blew: bool) -> SweepRow {
        SweepRow {
            value,
            blew_up: Some(blew),
            reason: None,
            t_star: None,
            final_grad_norm: None,
            final_time: None,
            steps: None,
            energy0: None,
            rho_star: None,
            error: None,
        }
    }

    #[test]
    fn axis_parsing() {
        let a: Axis = "mass_ratio=0.5, 0.9".parse().unwrap();
        assert_eq!(a, Axis { name: AxisName::MassRatio, values: vec![0.5, 0.9] });
        let e: Axis = "c=".parse().unwrap();
        assert!(e.values.is_empty());
        assert!(matches!("bogus=1".parse::<Axis>(), Err(LabError::Usage(_))));
        assert!("c=x".parse::<Axis>().is_err());
    }

    #[test]
    fn transition_summary() {
        let axis = Axis { name: AxisName::MassRatio, values: vec![] };
        let s = summarize(&axis, &[row(1.1, true), row(0.9, false), row(1.2, true), row(1.0, false)]);
        assert!(s.monotone);
        assert_eq!(s.transition, Some((1.0, 1.1)));
        let s = summarize(&axis, &[row(0.9, true), row(1.0, false)]);
        assert!(!s.monotone);
    }

    #[test]
    fn empty_axis_gives_header_only() {
        let base = ExperimentConfig::preset(Preset::Custom);
        let axis: Axis = "mass_ratio=".parse().unwrap();
        let (rows, summary) = sweep(&base, &axis, 1).unwrap();
        assert!(rows.is_empty());
        let dir = tempfile::tempdir().unwrap();
        write_sweep(dir.path(), &rows, &summary).unwrap();
        let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert_eq!(text.trim(), SWEEP_COLUMNS.join(","));
    }

    #[test]
    fn mismatched_axis_is_a_usage_error() {
        let base = ExperimentConfig::preset(Preset::Supercritical52);
        let axis: Axis = "c=1.1".parse().unwrap();
        assert!(matches!(sweep(&base, &axis, 1), Err(LabError::Usage(_))));
    }
}
