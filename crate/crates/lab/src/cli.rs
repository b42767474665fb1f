//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nls_core::ground::{
    pohozaev_residual, sharp_gn_constant, solve_ground_state, GroundStateKind, SolverOptions,
};
use nls_core::{snapshot, GridSpec, NlsError, PhysParams};
use serde_json::json;

use crate::config::{ExperimentConfig, InitialData, Preset};
use crate::diagnose::{diagnose_dir, diagnose_synthetic_rate, Selector, VerdictRecord, VERDICT_FILE};
use crate::output::{read_json, write_json, write_series_csv};
use crate::run::{default_run_dir, execute, write_run};
use crate::sweep::{sweep, threads_from_env, write_sweep, Axis};
use crate::{LabError, Result, OUTPUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "nlslab", version, about = "Combined-power NLS experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for a ground state and write its snapshot and certificate.
    Groundstate(GroundArgs),
    /// Run one evolution and persist trace, snapshots and report.
    Evolve(ConfigArgs),
    /// Judge a finished run directory.
    Diagnose(DiagnoseArgs),
    /// Run a one-parameter family of evolutions.
    Sweep(SweepArgs),
    /// Collect verdicts from run directories into one table.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Critical,
    Frac,
    Mixed,
}

impl From<KindArg> for GroundStateKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Critical => Self::Critical,
            KindArg::Frac => Self::FractionalSupercritical,
            KindArg::Mixed => Self::MixedSupercritical,
        }
    }
}

#[derive(Args, Debug)]
pub struct GroundArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long)]
    pub p1: f64,
    /// Defaults to `p1/2`.
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long, default_value_t = 40.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 1024)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ConfigArgs {
    /// TOML experiment file; flags below override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt_init: Option<f64>,
    #[arg(long)]
    pub dt_min: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub linear_cfl: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub blowup_factor: Option<f64>,
    #[arg(long)]
    pub no_dealias: bool,
    #[arg(long)]
    pub mass_ratio: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub l0: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Write into this directory instead of a hashed one under the output directory.
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// Run directory written by `evolve`.
    pub run_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub which: Selector,
    /// Judge a synthetic `(T - t)^{-e}` gradient trace instead of a run.
    #[arg(long, conflicts_with = "run_dir")]
    pub synthetic_rate: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// `name=v1,v2,...` with name one of mass_ratio, c, rho, l0, b, amplitude, width.
    #[arg(long)]
    pub axis: String,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding run directories (searched one level deep).
    pub dir: PathBuf,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| LabError::Usage(format!("{}: {e}", path.display())))?;
                let mut cfg: ExperimentConfig =
                    toml::from_str(&text).map_err(|e| LabError::Usage(format!("{}: {e}", path.display())))?;
                if let Some(p) = self.preset {
                    cfg.preset = p;
                }
                cfg
            }
            None => ExperimentConfig::preset(self.preset.unwrap_or(Preset::Custom)),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        set!(
            dim => grid.dim, extent => grid.extent, points => grid.points,
            lambda1 => params.lambda1, lambda2 => params.lambda2, p1 => params.p1, p2 => params.p2,
            horizon => horizon, dt_init => stepper.dt_init, dt_min => stepper.dt_min,
            cfl => stepper.cfl_safety, linear_cfl => stepper.linear_cfl, stride => stepper.snapshot_stride,
            blowup_factor => stepper.grad_blowup_factor, delta => diag.delta, seed => seed,
        );
        if let Some(d) = self.dim {
            cfg.params.dim = d;
        }
        if self.no_dealias {
            cfg.stepper.dealias = false;
        }
        cfg.initial = self.initial(cfg.initial)?;
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        } else if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn initial(&self, cur: InitialData) -> Result<InitialData> {
        let families = [
            self.mass_ratio.is_some(),
            self.c.is_some() || self.rho.is_some(),
            self.l0.is_some() || self.b.is_some(),
            self.amplitude.is_some() || self.width.is_some(),
        ];
        if families.iter().filter(|&&f| f).count() > 1 {
            return Err(LabError::Usage("initial-data flags from different families".into()));
        }
        Ok(match cur {
            _ if self.mass_ratio.is_some() => InitialData::MassRatio { ratio: self.mass_ratio.unwrap() },
            InitialData::ThresholdFamily { c_re, c_im, rho } if families[1] => {
                InitialData::ThresholdFamily { c_re: self.c.unwrap_or(c_re), c_im, rho: self.rho.unwrap_or(rho) }
            }
            _ if families[1] => InitialData::ThresholdFamily {
                c_re: self.c.unwrap_or(1.1),
                c_im: 0.0,
                rho: self.rho.unwrap_or(3.0),
            },
            InitialData::Collapse { l0, b } if families[2] => {
                InitialData::Collapse { l0: self.l0.unwrap_or(l0), b: self.b.unwrap_or(b) }
            }
            _ if families[2] => InitialData::Collapse { l0: self.l0.unwrap_or(0.01), b: self.b.unwrap_or(1.0) },
            InitialData::Gaussian { amplitude, width } if families[3] => InitialData::Gaussian {
                amplitude: self.amplitude.unwrap_or(amplitude),
                width: self.width.unwrap_or(width),
            },
            _ if families[3] => InitialData::Gaussian {
                amplitude: self.amplitude.unwrap_or(1.0),
                width: self.width.unwrap_or(1.0),
            },
            other => other,
        })
    }
}

fn output_root() -> PathBuf {
    std::env::var(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|_| PathBuf::from("runs"))
}

fn cmd_groundstate(a: &GroundArgs) -> Result<()> {
    let kind: GroundStateKind = a.kind.into();
    let p2 = a.p2.unwrap_or(0.5 * a.p1);
    let params = PhysParams::new(-1.0, 1.0, a.p1, p2, a.dim).map_err(|e| LabError::Usage(e.to_string()))?;
    let critical = params.is_l2_critical();
    match kind {
        GroundStateKind::Critical if !critical => {
            return Err(LabError::Usage(format!("--kind critical needs p1 = 4/N = {}", 4.0 / a.dim as f64)))
        }
        GroundStateKind::FractionalSupercritical | GroundStateKind::MixedSupercritical if params.s_c() <= 0.0 => {
            return Err(LabError::Usage(format!("--kind {} needs p1 > 4/N", if matches!(a.kind, KindArg::Frac) { "frac" } else { "mixed" })))
        }
        _ => {}
    }
    let grid = GridSpec::new(a.dim, a.extent, a.points).map_err(|e| LabError::Usage(e.to_string()))?;
    let dir = a.out.clone().unwrap_or_else(|| output_root().join("groundstates"));
    std::fs::create_dir_all(&dir)?;
    let stem = format!("{kind:?}-n{}-p{}", a.dim, a.p1).to_lowercase();
    let opts = SolverOptions { tol: a.tol, max_iters: a.max_iters, ..Default::default() };
    let q = match solve_ground_state(kind, &params, grid, &opts) {
        Ok(q) => q,
        Err(NlsError::IterationFailure { iterations, last_residual, history }) => {
            let rows: Vec<Vec<Option<f64>>> =
                history.iter().enumerate().map(|(i, r)| vec![Some(i as f64), Some(*r)]).collect();
            let path = dir.join(format!("{stem}-residuals.csv"));
            write_series_csv(&path, &["iteration", "residual"], &rows)?;
            eprintln!("residual history written to {}", path.display());
            return Err(NlsError::IterationFailure { iterations, last_residual, history }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let snap = dir.join(format!("{stem}.snap"));
    snapshot::write(&snap, &q.field)?;
    let mut cert = json!({
        "kind": kind,
        "params": params,
        "grid": { "dim": a.dim, "extent": a.extent, "points": a.points },
        "residual_linf": q.residual_linf,
        "tolerance": a.tol,
        "iterations": q.iterations,
        "mass": q.mass(),
        "snapshot": snap.file_name().and_then(|s| s.to_str()),
    });
    if kind == GroundStateKind::Critical {
        let c = sharp_gn_constant(&q)?;
        cert["sharp_gn_constant"] = json!(c.value);
        cert["gn_equality_residual"] = json!(c.equality_residual);
        cert["pohozaev_residual"] = json!(pohozaev_residual(&q));
    }
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &cert)?;
    println!("{}", serde_json::to_string(&cert)?);
    Ok(())
}

fn cmd_evolve(a: &ConfigArgs) -> Result<PathBuf> {
    let cfg = a.resolve()?;
    let dir = a.run_dir.clone().unwrap_or_else(|| default_run_dir(&cfg));
    let cache = cfg.output_dir.join("cache");
    let out = execute(&cfg, Some(&cache))?;
    write_run(&dir, &cfg, &out)?;
    let summary = json!({
        "run_dir": dir,
        "blew_up": out.report.blew_up,
        "reason": out.report.reason,
        "t_star": out.report.t_star_estimate,
        "steps": out.report.steps,
        "final_time": out.report.final_time,
        "rows": out.trace.len(),
        "snapshots": out.trace.snapshots.len(),
    });
    println!("{}", serde_json::to_string(&summary)?);
    Ok(dir)
}

fn print_records(records: &[VerdictRecord]) {
    for r in records {
        let measured: Vec<String> = r.measured.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        println!("{:<14} {:<16} {}{}", r.diagnostic, format!("{:?}", r.verdict), measured.join(" "), {
            if r.note.is_empty() {
                String::new()
            } else {
                format!(" ({})", r.note)
            }
        });
    }
}

fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    if let Some(e) = a.synthetic_rate {
        let r = diagnose_synthetic_rate(&ExperimentConfig::preset(Preset::Rate45), e)?;
        print_records(std::slice::from_ref(&r));
        return Ok(());
    }
    let dir = a.run_dir.as_ref().ok_or_else(|| LabError::Usage("diagnose needs a run directory".into()))?;
    let cache = output_root().join("cache");
    let records = diagnose_dir(dir, a.which, Some(&cache))?;
    print_records(&records);
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<PathBuf> {
    let cfg = a.config.resolve()?;
    let axis: Axis = a.axis.parse()?;
    let threads = threads_from_env()?;
    let (rows, summary) = sweep(&cfg, &axis, threads)?;
    let dir = a.config.run_dir.clone().unwrap_or_else(|| {
        let hash = crate::manifest::sha256_hex(format!("{}{}", cfg.to_toml(), a.axis).as_bytes());
        cfg.output_dir.join(format!("sweep-{}", &hash[..12]))
    });
    write_sweep(&dir, &rows, &summary)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    println!("{}", serde_json::to_string(&json!({ "dir": dir, "summary": summary }))?);
    Ok(dir)
}

/// Verdict files in `dir` and its immediate subdirectories.
fn verdict_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if dir.join(VERDICT_FILE).exists() {
        out.push(dir.join(VERDICT_FILE));
    }
    let mut subs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(VERDICT_FILE).exists())
        .collect();
    subs.sort();
    out.extend(subs.into_iter().map(|p| p.join(VERDICT_FILE)));
    Ok(out)
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    if !a.dir.is_dir() {
        return Err(LabError::Usage(format!("{} is not a directory", a.dir.display())));
    }
    let files = verdict_files(&a.dir)?;
    let mut w = csv::Writer::from_path(a.dir.join("report.csv"))?;
    w.write_record(["run", "diagnostic", "verdict", "measured", "note"])?;
    for f in &files {
        let run = f.parent().and_then(|p| p.file_name()).and_then(|s| s.to_str()).unwrap_or(".").to_string();
        let records: Vec<VerdictRecord> = read_json(f)?;
        for r in &records {
            let measured = serde_json::to_string(&r.measured)?;
            let verdict = serde_json::to_value(r.verdict)?.as_str().unwrap_or_default().to_string();
            println!("{run:<32} {:<14} {verdict}", r.diagnostic);
            w.write_record([run.as_str(), &r.diagnostic, &verdict, &measured, &r.note])?;
        }
    }
    w.flush()?;
    println!("{} verdict files -> {}", files.len(), a.dir.join("report.csv").display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Groundstate(a) => cmd_groundstate(a),
        Command::Evolve(a) => cmd_evolve(a).map(|_| ()),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Sweep(a) => cmd_sweep(a).map(|_| ()),
        Command::Report(a) => cmd_report(a),
    }
}
