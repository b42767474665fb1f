//! Verdicts for the diagnostics of a finished run.

use std::collections::BTreeMap;
use std::path::Path;

use nls_core::diagnostics::{
    concentration_track, dirac_witness, h1_scale, profile_track, rate_check, rate_check_at, supercritical_track,
    Verdict,
};
use nls_core::evolution::{virial_series, EvolutionTrace};
use nls_core::ground::{GroundState, GroundStateKind};
use nls_core::GridSpec;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use crate::output::{write_json, write_series_csv};
use crate::run::{load_or_solve, solver_options, RunOutput};
use crate::{LabError, Result};

pub const VERDICT_FILE: &str = "verdicts.json";

/// Snapshots in the final decade below which window diagnostics refuse to run.
pub const MIN_DECADE_SNAPSHOTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Conservation,
    Virial,
    Concentration,
    Profile,
    Dirac,
    Rate,
    Supercritical,
    All,
}

impl Selector {
    pub const EACH: [Selector; 7] = [
        Self::Conservation,
        Self::Virial,
        Self::Concentration,
        Self::Profile,
        Self::Dirac,
        Self::Rate,
        Self::Supercritical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Conservation => "conservation",
            Self::Virial => "virial",
            Self::Concentration => "concentration",
            Self::Profile => "profile",
            Self::Dirac => "dirac",
            Self::Rate => "rate",
            Self::Supercritical => "supercritical",
            Self::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Selector> {
        if self == Self::All {
            Self::EACH.to_vec()
        } else {
            vec![self]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub diagnostic: String,
    pub verdict: Verdict,
    pub measured: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub note: String,
}

impl VerdictRecord {
    fn new(which: Selector, verdict: Verdict) -> Self {
        Self {
            diagnostic: which.name().into(),
            verdict,
            measured: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            note: String::new(),
        }
    }

    fn unmet(which: Selector, note: impl Into<String>) -> Self {
        Self { note: note.into(), ..Self::new(which, Verdict::HypothesesUnmet) }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.into(), value);
        self
    }

    fn limit(mut self, key: &str, value: f64) -> Self {
        self.thresholds.insert(key.into(), value);
        self
    }
}

/// Column series accompanying a verdict.
pub struct Series {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub struct Diagnosis {
    pub record: VerdictRecord,
    pub series: Option<Series>,
}

fn max_rel_drift(xs: &[f64]) -> f64 {
    let x0 = xs.first().copied().unwrap_or(0.0);
    let scale = if x0 != 0.0 { x0.abs() } else { 1.0 };
    xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max) / scale
}

fn is_monotone(xs: &[f64], decreasing: bool) -> bool {
    xs.windows(2).all(|w| if decreasing { w[1] <= w[0] } else { w[1] >= w[0] })
}

/// Fails with the stride a rerun would need when the final decade is too sparse.
fn require_decade_snapshots(trace: &EvolutionTrace, stride: usize) -> Result<()> {
    let have = trace.final_decade_snapshots().len();
    if have >= MIN_DECADE_SNAPSHOTS {
        return Ok(());
    }
    let steps = trace.len() - trace.final_decade_start();
    let need = (steps / (2 * MIN_DECADE_SNAPSHOTS)).max(1);
    Err(LabError::Data(format!(
        "final decade holds {have} snapshots, need {MIN_DECADE_SNAPSHOTS}: rerun with snapshot_stride <= {need} (was {stride})"
    )))
}

fn critical_mass(out: &RunOutput, q: &GroundState) -> bool {
    out.trace.mass.first().is_some_and(|m| ((m / q.mass()).sqrt() - 1.0).abs() <= 1e-6)
}

pub fn diagnose(cfg: &ExperimentConfig, out: &RunOutput, which: Selector, cache: Option<&Path>) -> Result<Diagnosis> {
    let diag = &cfg.diag;
    let trace = &out.trace;
    let rep = &out.report;
    let plain = |record| Ok(Diagnosis { record, series: None });
    match which {
        Selector::All => Err(LabError::Usage("diagnose one selector at a time".into())),
        Selector::Conservation => {
            let (dm, de) = (max_rel_drift(&trace.mass), max_rel_drift(&trace.energy));
            let (tm, te) = (diag.tolerance("conservation_mass"), diag.tolerance("conservation_energy"));
            let r = VerdictRecord::new(which, Verdict::from_bool(dm <= tm && de <= te))
                .with("mass_drift", dm)
                .with("energy_drift", de)
                .limit("conservation_mass", tm)
                .limit("conservation_energy", te);
            if rep.blew_up {
                return plain(VerdictRecord {
                    verdict: Verdict::HypothesesUnmet,
                    note: "conservation is judged on global runs".into(),
                    ..r
                });
            }
            plain(r)
        }
        Selector::Virial => {
            let v = virial_series(trace, &cfg.params)?;
            let scale = v.jpp_formula.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let err = |other: &[f64]| {
                v.jpp_fd.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
            };
            let e_formula = err(&v.jpp_formula);
            let tol = diag.tolerance("virial_relative");
            let mut r = VerdictRecord::new(which, Verdict::from_bool(e_formula <= tol))
                .with("fd_vs_formula", e_formula)
                .limit("virial_relative", tol);
            if let Some(red) = &v.jpp_reduced {
                let e = err(red);
                r = r.with("fd_vs_reduced", e);
                r.verdict = Verdict::from_bool(e_formula <= tol && e <= tol);
            }
            if rep.blew_up {
                r.verdict = Verdict::HypothesesUnmet;
                r.note = "the virial comparison is judged on smooth runs".into();
            } else if !v.valid {
                r.verdict = Verdict::Flagged;
                r.note = "mass reached the box edge; the periodic virial identity does not apply".into();
            }
            let rows = (0..v.times.len())
                .map(|i| {
                    vec![
                        Some(v.times[i]),
                        Some(v.j[i]),
                        Some(v.jpp_fd[i]),
                        Some(v.jpp_formula[i]),
                        v.jpp_reduced.as_ref().map(|x| x[i]),
                    ]
                })
                .collect();
            let series = Series { header: vec!["time", "j", "jpp_fd", "jpp_formula", "jpp_reduced"], rows };
            Ok(Diagnosis { record: r, series: Some(series) })
        }
        Selector::Concentration | Selector::Profile | Selector::Dirac | Selector::Rate => {
            if !rep.blew_up {
                return plain(VerdictRecord::unmet(which, "run did not blow up"));
            }
            if which == Selector::Rate {
                let tol = diag.tolerance("rate_min_slope");
                let rc = rate_check(rep, trace)?;
                return plain(
                    VerdictRecord::new(which, Verdict::from_bool(rc.consistent(tol)))
                        .with("slope", rc.slope)
                        .with("r2", rc.r2)
                        .with("c_lower", rc.c_lower)
                        .with("points", rc.points as f64)
                        .limit("rate_min_slope", tol),
                );
            }
            let Some(q) = out.q.as_ref() else {
                return plain(VerdictRecord::unmet(which, "needs the critical ground state (p1 = 4/N)"));
            };
            require_decade_snapshots(trace, cfg.stepper.snapshot_stride)?;
            match which {
                Selector::Concentration => concentration(cfg, out, q),
                Selector::Profile => profile(cfg, out, q),
                _ => dirac(cfg, out, q),
            }
        }
        Selector::Supercritical => {
            if cfg.params.s_c() <= 0.0 {
                return plain(VerdictRecord::unmet(which, "needs p1 > 4/N"));
            }
            if !rep.blew_up {
                return plain(VerdictRecord::unmet(which, "run did not blow up"));
            }
            require_decade_snapshots(trace, cfg.stepper.snapshot_stride)?;
            supercritical(cfg, out, cache)
        }
    }
}

fn concentration(cfg: &ExperimentConfig, out: &RunOutput, q: &GroundState) -> Result<Diagnosis> {
    let which = Selector::Concentration;
    let frac = cfg.diag.tolerance("concentration_fraction");
    let s = concentration_track(&out.trace, q, cfg.diag.delta)?;
    let mut r = VerdictRecord::new(which, Verdict::Flagged).limit("concentration_fraction", frac).with("delta", s.delta);
    match s.terminal_ratio() {
        Some(ratio) => {
            r.verdict = Verdict::from_bool(ratio >= frac);
            r = r.with("terminal_ratio", ratio).with("terminal_time", s.times[s.last_resolved().expect("resolved")]);
        }
        None => r.note = "no snapshot resolves the window".into(),
    }
    let rows = (0..s.times.len())
        .map(|i| {
            vec![
                Some(s.times[i]),
                Some(s.grad_norm[i]),
                Some(s.a_of_t[i]),
                s.center[i].map(|c| c[0]),
                s.window_mass[i],
                Some(s.total_mass[i]),
            ]
        })
        .collect();
    let header = vec!["time", "grad_norm", "radius", "center_x", "window_mass", "total_mass"];
    Ok(Diagnosis { record: r, series: Some(Series { header, rows }) })
}

fn profile(cfg: &ExperimentConfig, out: &RunOutput, q: &GroundState) -> Result<Diagnosis> {
    let frac = cfg.diag.tolerance("profile_h1_fraction");
    let entries = profile_track(&out.trace, q, &cfg.params)?;
    let h1: Vec<f64> = entries.iter().map(|e| e.fit.h1_distance).collect();
    let hh: Vec<f64> = entries.iter().map(|e| e.fit.reduced_h.abs()).collect();
    let scale = h1_scale(q);
    let last = *h1.last().expect("decade is non-empty");
    let bound = entries.iter().all(|e| e.bound_holds());
    let ok = is_monotone(&h1, true) && last <= frac * scale && is_monotone(&hh, true) && bound;
    let r = VerdictRecord::new(Selector::Profile, Verdict::from_bool(ok))
        .with("h1_first", h1[0])
        .with("h1_last", last)
        .with("q_h1_norm", scale)
        .with("h_first", hh[0])
        .with("h_last", *hh.last().expect("non-empty"))
        .with("h1_monotone", is_monotone(&h1, true) as u8 as f64)
        .with("h_monotone", is_monotone(&hh, true) as u8 as f64)
        .with("bound_everywhere", bound as u8 as f64)
        .limit("profile_h1_fraction", frac);
    let rows = entries
        .iter()
        .map(|e| {
            vec![
                Some(e.fit.time),
                Some(e.fit.rho),
                Some(e.fit.phase),
                Some(e.fit.h1_distance),
                Some(e.fit.reduced_h),
                Some(e.h_bound),
            ]
        })
        .collect();
    let header = vec!["time", "rho", "phase", "h1_distance", "reduced_h", "h_bound"];
    Ok(Diagnosis { record: r, series: Some(Series { header, rows }) })
}

fn dirac(cfg: &ExperimentConfig, out: &RunOutput, q: &GroundState) -> Result<Diagnosis> {
    let which = Selector::Dirac;
    if !critical_mass(out, q) {
        return Ok(Diagnosis { record: VerdictRecord::unmet(which, "initial mass is not ‖Q‖²"), series: None });
    }
    let t_star = out.report.t_star_estimate.expect("blow-up reports carry T*");
    let w = dirac_witness(&out.trace, q)?;
    let min_r2 = cfg.diag.tolerance("dirac_min_r2");
    let tail = &w.variance[w.decade_start..];
    let shrinks = is_monotone(tail, true) && tail.last() < tail.first();
    let mut r = VerdictRecord::new(which, Verdict::Fail)
        .with("x0", w.x0[0])
        .with("variance_first", tail[0])
        .with("variance_last", *tail.last().expect("non-empty"))
        .limit("dirac_min_r2", min_r2);
    if let Some((slope, r2)) = w.variance_slope(t_star) {
        r = r.with("variance_slope", slope).with("variance_r2", r2);
        r.verdict = Verdict::from_bool(shrinks && slope > 0.0 && r2 >= min_r2);
    }
    let rows = (0..w.times.len())
        .map(|i| vec![Some(w.times[i]), Some(w.com[i][0]), Some(w.com[i][1]), Some(w.variance[i])])
        .collect();
    Ok(Diagnosis { record: r, series: Some(Series { header: vec!["time", "com_x", "com_y", "variance"], rows }) })
}

fn supercritical(cfg: &ExperimentConfig, out: &RunOutput, cache: Option<&Path>) -> Result<Diagnosis> {
    let grid = GridSpec::new(cfg.params.dim, cfg.ground.extent, cfg.ground.points)?;
    let opts = solver_options(cfg);
    let q_frac = load_or_solve(GroundStateKind::FractionalSupercritical, &cfg.params, grid, &opts, cache)?;
    let r_mixed = load_or_solve(GroundStateKind::MixedSupercritical, &cfg.params, grid, &opts, cache)?;
    let s = supercritical_track(&out.trace, &q_frac, &r_mixed, &cfg.params, cfg.diag.lambda_rule, cfg.diag.hsc_cap_factor)?;
    let frac = cfg.diag.tolerance("supercritical_fraction");
    let t0 = out.trace.times[out.trace.final_decade_start()];
    let decade: Vec<usize> = (0..s.times.len()).filter(|&i| s.times[i] >= t0).collect();
    let lpc: Option<Vec<f64>> = decade.iter().map(|&i| s.lpc_window[i]).collect();
    let mut r = VerdictRecord::new(Selector::Supercritical, Verdict::Flagged)
        .with("q_frac_residual", q_frac.residual_linf)
        .with("r_mixed_residual", r_mixed.residual_linf)
        .with("q_hsc_sq", s.q_hsc_sq)
        .with("r_lpc", s.r_lpc)
        .with("sup_hsc_norm", s.sup_hsc_norm)
        .with("hsc_cap", s.hsc_cap)
        .limit("supercritical_fraction", frac);
    match (s.last_resolved(), lpc) {
        (Some(i), Some(lpc)) if !s.hypothesis_violated => {
            let hsc = s.hsc_window[i].expect("resolved");
            let lpc_ok = lpc.iter().all(|&x| x > 0.0) && is_monotone(&lpc, false);
            r = r
                .with("terminal_hsc_window", hsc)
                .with("terminal_hsc_ratio", hsc / s.q_hsc_sq)
                .with("terminal_lpc_window", *lpc.last().expect("decade is non-empty"))
                .with("lpc_nondecreasing", lpc_ok as u8 as f64);
            r.verdict = Verdict::from_bool(hsc >= frac * s.q_hsc_sq && lpc_ok);
        }
        _ if s.hypothesis_violated => r.note = "Ḣ^{s_c} norm exceeded its cap".into(),
        _ => r.note = "final-decade windows are under-resolved".into(),
    }
    let rows = (0..s.times.len())
        .map(|i| vec![Some(s.times[i]), Some(s.lambda[i]), s.hsc_window[i], s.lpc_window[i], Some(s.hsc_norm[i])])
        .collect();
    let header = vec!["time", "lambda", "hsc_window", "lpc_window", "hsc_norm"];
    Ok(Diagnosis { record: r, series: Some(Series { header, rows }) })
}

/// `‖∇u‖ = (T - t)^{-exponent}` on times approaching `T` geometrically.
pub fn synthetic_rate_trace(exponent: f64, t_star: f64, points: usize) -> EvolutionTrace {
    let mut t = EvolutionTrace::default();
    for i in 0..points {
        let gap = t_star * 10f64.powf(-4.0 * i as f64 / (points - 1) as f64);
        t.times.push(t_star - gap);
        t.grad_norm.push(gap.powf(-exponent));
    }
    t
}

pub fn diagnose_synthetic_rate(cfg: &ExperimentConfig, exponent: f64) -> Result<VerdictRecord> {
    let t_star = 1.0;
    let rc = rate_check_at(t_star, &synthetic_rate_trace(exponent, t_star, 200))?;
    let tol = cfg.diag.tolerance("rate_min_slope");
    Ok(VerdictRecord::new(Selector::Rate, Verdict::from_bool(rc.consistent(tol)))
        .with("slope", rc.slope)
        .with("c_lower", rc.c_lower)
        .with("exponent", exponent)
        .limit("rate_min_slope", tol))
}

/// Runs the selected diagnostics on a run directory, writing the verdict
/// JSON, one CSV per series and refreshing the manifest.
pub fn diagnose_dir(dir: &Path, which: Selector, cache: Option<&Path>) -> Result<Vec<VerdictRecord>> {
    let loaded = crate::run::load_run(dir)?;
    let mut manifest: RunManifest = loaded.manifest;
    let mut records = Vec::new();
    for sel in which.expand() {
        let d = diagnose(&loaded.config, &loaded.output, sel, cache)?;
        if let Some(s) = &d.series {
            let rel = format!("{}.csv", sel.name());
            write_series_csv(&dir.join(&rel), &s.header, &s.rows)?;
            manifest.record_output(dir, &rel)?;
        }
        manifest.verdicts.insert(sel.name().into(), d.record.verdict);
        records.push(d.record);
    }
    let mut all: Vec<VerdictRecord> =
        crate::output::read_json(&dir.join(VERDICT_FILE)).unwrap_or_default();
    all.retain(|r| records.iter().all(|n| n.diagnostic != r.diagnostic));
    all.extend(records.iter().cloned());
    all.sort_by(|a, b| a.diagnostic.cmp(&b.diagnostic));
    write_json(&dir.join(VERDICT_FILE), &all)?;
    manifest.record_output(dir, VERDICT_FILE)?;
    manifest.save(dir)?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    #[test]
    fn synthetic_controls_are_classified() {
        let cfg = ExperimentConfig::preset(Preset::Rate45);
        let one = diagnose_synthetic_rate(&cfg, 1.0).unwrap();
        assert_eq!(one.verdict, Verdict::Pass);
        assert!((one.measured["slope"] - 1.0).abs() < 1e-3);
        let slow = diagnose_synthetic_rate(&cfg, 2.0 / 3.0).unwrap();
        assert_eq!(slow.verdict, Verdict::Fail);
        assert!((slow.measured["slope"] - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn monotone_helpers() {
        assert!(is_monotone(&[3.0, 2.0, 2.0, 1.0], true));
        assert!(!is_monotone(&[3.0, 2.0, 2.5], true));
        assert!(is_monotone(&[1.0, 1.0, 4.0], false));
        assert!((max_rel_drift(&[2.0, 2.2, 1.9]) - 0.1).abs() < 1e-15);
    }
}
