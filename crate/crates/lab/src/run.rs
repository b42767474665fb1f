//! Building initial data, running the evolution and persisting a run directory.

use std::fs;
use std::path::{Path, PathBuf};

use nls_core::evolution::{evolve, BlowupReport, EvolutionTrace};
use nls_core::ground::{
    closed_form_q_1d, gaussian, solve_ground_state, threshold_family_on, GroundState, GroundStateKind, SolverOptions,
};
use nls_core::{snapshot, Field, GridSpec, PhysParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, InitialData};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::output::{read_json, read_trace_csv, write_json, write_trace_csv};
use crate::{LabError, Result};

pub const CONFIG_FILE: &str = "config.toml";
pub const TRACE_FILE: &str = "trace.csv";
pub const REPORT_FILE: &str = "report.json";
pub const Q_FILE: &str = "q.snap";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub struct RunOutput {
    pub trace: EvolutionTrace,
    pub report: BlowupReport,
    /// Critical ground state used to build the data, when there is one.
    pub q: Option<GroundState>,
}

/// Ground state of `kind`, read from `cache` when a certified copy is there.
pub fn load_or_solve(
    kind: GroundStateKind,
    params: &PhysParams,
    grid: GridSpec,
    opts: &SolverOptions,
    cache: Option<&Path>,
) -> Result<GroundState> {
    let file = cache.map(|dir| {
        dir.join(format!(
            "{kind:?}-n{}-p{}-{}-l{}-{}-L{}-m{}.snap",
            params.dim,
            params.p1,
            params.p2,
            params.lambda1,
            params.lambda2,
            grid.extent(),
            grid.points()
        ))
    });
    if let Some(f) = file.as_ref().filter(|f| f.exists()) {
        let field = snapshot::read(f)?;
        let q = GroundState::from_field(kind, *params, field)?;
        if q.is_accepted(opts.tol) && q.grid() == &grid {
            return Ok(q);
        }
    }
    let q = if kind == GroundStateKind::Critical && params.dim == 1 {
        closed_form_q_1d(params.p1, grid)?
    } else {
        solve_ground_state(kind, params, grid, opts)?
    };
    if let Some(f) = file {
        fs::create_dir_all(f.parent().expect("cache file has a parent"))?;
        snapshot::write(&f, &q.field)?;
    }
    Ok(q)
}

pub fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions { tol: cfg.ground.tol, max_iters: cfg.ground.max_iters, ..Default::default() }
}

/// Critical ground state on the configured reference grid.
pub fn critical_q(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<GroundState> {
    let grid = GridSpec::new(cfg.params.dim, cfg.ground.extent, cfg.ground.points)?;
    load_or_solve(GroundStateKind::Critical, &cfg.params, grid, &solver_options(cfg), cache)
}

pub fn initial_field(cfg: &ExperimentConfig, q: Option<&GroundState>) -> Result<Field> {
    let grid = cfg.grid.build()?;
    let need_q = || q.ok_or_else(|| LabError::Usage("initial data needs the critical ground state".into()));
    let field = match cfg.initial {
        InitialData::MassRatio { ratio } => threshold_family_on(need_q()?, Complex64::new(ratio, 0.0), 1.0, &grid)?,
        InitialData::ThresholdFamily { c_re, c_im, rho } => {
            threshold_family_on(need_q()?, Complex64::new(c_re, c_im), rho, &grid)?
        }
        InitialData::Collapse { l0, b } => {
            let beta = b / (l0 * l0);
            let mut u = threshold_family_on(need_q()?, Complex64::new(1.0, 0.0), 1.0 / l0, &grid)?;
            for (k, z) in u.values_mut().iter_mut().enumerate() {
                let x = grid.position(k);
                *z *= Complex64::from_polar(1.0, -beta * (x[0] * x[0] + x[1] * x[1]));
            }
            u
        }
        InitialData::Gaussian { amplitude, width } => gaussian(grid, amplitude, width, [0.0; 2]),
        InitialData::RandomBumps { count, amplitude } => random_bumps(grid, count, amplitude, cfg.seed),
    };
    Ok(field)
}

/// Seeded sum of Gaussians well inside the box.
pub fn random_bumps(grid: GridSpec, count: usize, amplitude: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.extent();
    let bumps: Vec<([f64; 2], f64, f64, f64)> = (0..count)
        .map(|_| {
            let c = [rng.gen_range(-l / 8.0..l / 8.0), rng.gen_range(-l / 8.0..l / 8.0)];
            (c, l / 32.0 * rng.gen_range(0.5..1.5), amplitude * rng.gen_range(0.5..1.0), rng.gen_range(0.0..6.28))
        })
        .collect();
    let dim = grid.dim();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(c, w, a, phase)| {
                let r2: f64 = (0..dim).map(|d| (x[d] - c[d]).powi(2)).sum();
                Complex64::from_polar(a * (-r2 / (w * w)).exp(), phase)
            })
            .sum()
    })
}

pub fn execute(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let q = if cfg.initial.needs_q() || cfg.params.is_l2_critical() { Some(critical_q(cfg, cache)?) } else { None };
    let u0 = initial_field(cfg, q.as_ref())?;
    let (trace, report) = evolve(&u0, &cfg.params, &cfg.stepper, cfg.horizon)?;
    Ok(RunOutput { trace, report, q })
}

/// Default run directory: `<output_dir>/<preset>-<config hash prefix>`.
pub fn default_run_dir(cfg: &ExperimentConfig) -> PathBuf {
    let hash = crate::manifest::sha256_hex(cfg.to_toml().as_bytes());
    cfg.output_dir.join(format!("{}-{}", cfg.preset.name(), &hash[..12]))
}

pub fn snapshot_name(i: usize) -> String {
    format!("{SNAPSHOT_DIR}/{i:05}.snap")
}

pub fn write_run(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<RunManifest> {
    fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
    let toml = cfg.to_toml();
    fs::write(dir.join(CONFIG_FILE), &toml)?;
    let mut m = RunManifest::new(&toml);
    m.inputs.push(crate::manifest::entry(dir, CONFIG_FILE)?);
    write_trace_csv(&dir.join(TRACE_FILE), &out.trace)?;
    m.record_output(dir, TRACE_FILE)?;
    write_json(&dir.join(REPORT_FILE), &out.report)?;
    m.record_output(dir, REPORT_FILE)?;
    if let Some(q) = &out.q {
        snapshot::write(&dir.join(Q_FILE), &q.field)?;
        m.record_output(dir, Q_FILE)?;
    }
    for (i, s) in out.trace.snapshots.iter().enumerate() {
        let rel = snapshot_name(i);
        snapshot::write(&dir.join(&rel), s)?;
        m.record_output(dir, &rel)?;
    }
    m.save(dir)?;
    Ok(m)
}

/// A persisted run, re-read for diagnosis.
pub struct LoadedRun {
    pub config: ExperimentConfig,
    pub manifest: RunManifest,
    pub output: RunOutput,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    if !dir.join(MANIFEST_FILE).exists() {
        return Err(LabError::Usage(format!("{} holds no {MANIFEST_FILE}", dir.display())));
    }
    let manifest = RunManifest::load(dir)?;
    manifest.verify(dir)?;
    let config = ExperimentConfig::from_toml(&fs::read_to_string(dir.join(CONFIG_FILE))?)?;
    let mut trace = read_trace_csv(&dir.join(TRACE_FILE))?;
    let report: BlowupReport = read_json(&dir.join(REPORT_FILE))?;
    let mut names: Vec<&str> = manifest
        .outputs
        .iter()
        .map(|e| e.path.as_str())
        .filter(|p| p.starts_with(SNAPSHOT_DIR))
        .collect();
    names.sort_unstable();
    trace.snapshots = names.iter().map(|n| snapshot::read(&dir.join(n))).collect::<nls_core::Result<_>>()?;
    let q = if manifest.outputs.iter().any(|e| e.path == Q_FILE) {
        let field = snapshot::read(&dir.join(Q_FILE))?;
        Some(GroundState::from_field(GroundStateKind::Critical, config.params, field)?)
    } else {
        None
    };
    Ok(LoadedRun { config, manifest, output: RunOutput { trace, report, q } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    #[test]
    fn random_bumps_are_seeded() {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        let a = random_bumps(g, 3, 1.0, 7);
        assert_eq!(a.values(), random_bumps(g, 3, 1.0, 7).values());
        assert_ne!(a.values(), random_bumps(g, 3, 1.0, 8).values());
    }

    #[test]
    fn collapse_data_has_critical_mass() {
        let cfg = ExperimentConfig::preset(Preset::Concentration42);
        let q = critical_q(&cfg, None).unwrap();
        let u = initial_field(&cfg, Some(&q)).unwrap();
        let m = nls_core::spectral::norm_l2(&u).powi(2);
        assert!((m / q.mass() - 1.0).abs() < 1e-10, "{m}");
    }

    #[test]
    fn ground_state_cache_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let p = PhysParams::new(-1.0, 0.0, 6.0, 2.0, 1).unwrap();
        let g = GridSpec::new(1, 40.0, 1024).unwrap();
        let opts = SolverOptions::default();
        let a = load_or_solve(GroundStateKind::FractionalSupercritical, &p, g, &opts, Some(dir.path())).unwrap();
        assert!(a.iterations > 0);
        let b = load_or_solve(GroundStateKind::FractionalSupercritical, &p, g, &opts, Some(dir.path())).unwrap();
        assert_eq!(b.iterations, 0);
        assert_eq!(a.field.values(), b.field.values());
    }
}
