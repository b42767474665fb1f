//! Experiment configuration: presets, TOML ingestion and validation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nls_core::diagnostics::LambdaRule;
use nls_core::evolution::StepperConfig;
use nls_core::{GridSpec, PhysParams};
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Preset {
    Threshold31,
    Concentration42,
    Profile43,
    Dirac44,
    Rate45,
    Supercritical52,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Self::Threshold31,
        Self::Concentration42,
        Self::Profile43,
        Self::Dirac44,
        Self::Rate45,
        Self::Supercritical52,
        Self::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Threshold31 => "threshold31",
            Self::Concentration42 => "concentration42",
            Self::Profile43 => "profile43",
            Self::Dirac44 => "dirac44",
            Self::Rate45 => "rate45",
            Self::Supercritical52 => "supercritical52",
            Self::Custom => "custom",
        }
    }

    /// Presets built on the pseudo-conformal collapse run.
    pub fn is_collapse(self) -> bool {
        matches!(self, Self::Concentration42 | Self::Profile43 | Self::Dirac44 | Self::Rate45)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dim: usize,
    pub extent: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec, LabError> {
        Ok(GridSpec::new(self.dim, self.extent, self.points)?)
    }
}

/// Initial data families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `ratio · Q`, mass ratio `‖u₀‖/‖Q‖ = ratio`.
    MassRatio { ratio: f64 },
    /// `c ρ^{N/2} Q(ρx)`.
    ThresholdFamily { c_re: f64, c_im: f64, rho: f64 },
    /// `L₀^{-N/2} Q(x/L₀) e^{-iβ|x|²}` with `β = b/L₀²`; collapses near `T = L₀²/(4b)`.
    Collapse { l0: f64, b: f64 },
    Gaussian { amplitude: f64, width: f64 },
    /// Sum of `count` Gaussians with seeded random centres, widths and phases.
    RandomBumps { count: usize, amplitude: f64 },
}

impl InitialData {
    pub fn needs_q(&self) -> bool {
        matches!(self, Self::MassRatio { .. } | Self::ThresholdFamily { .. } | Self::Collapse { .. })
    }
}

/// Grid on which reference ground states are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundConfig {
    pub extent: f64,
    pub points: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for GroundConfig {
    fn default() -> Self {
        Self { extent: 64.0, points: 2048, tol: 1e-10, max_iters: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagConfig {
    /// Window exponent `a(t) = ‖∇u‖^{-(1-δ)}`.
    pub delta: f64,
    pub lambda_rule: LambdaRule,
    /// `sup ‖u‖_{Ḣ^{s_c}}` may grow by at most this factor.
    pub hsc_cap_factor: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for DiagConfig {
    fn default() -> Self {
        let tolerances = [
            ("conservation_mass", 1e-10),
            ("conservation_energy", 1e-8),
            ("virial_relative", 1e-4),
            ("concentration_fraction", 0.95),
            ("profile_h1_fraction", 0.2),
            ("dirac_min_r2", 0.9),
            ("rate_min_slope", 0.9),
            ("supercritical_fraction", 0.5),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self { delta: 0.5, lambda_rule: LambdaRule::GradPower { delta: 0.98 }, hsc_cap_factor: 5.0, tolerances }
    }
}

impl DiagConfig {
    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .copied()
            .or_else(|| DiagConfig::default().tolerances.get(key).copied())
            .unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub params: PhysParams,
    pub grid: GridConfig,
    pub stepper: StepperConfig,
    pub initial: InitialData,
    pub horizon: f64,
    #[serde(default)]
    pub ground: GroundConfig,
    #[serde(default)]
    pub diag: DiagConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn collapse_stepper() -> StepperConfig {
    StepperConfig {
        dt_init: 1.0,
        dt_min: 1e-16,
        cfl_safety: 0.01,
        linear_cfl: 1e9,
        grad_blowup_factor: 20.0,
        snapshot_stride: 50,
        ..Default::default()
    }
}

impl ExperimentConfig {
    /// The preset's reference scenario.
    pub fn preset(preset: Preset) -> Self {
        let critical = PhysParams { lambda1: -1.0, lambda2: 1.0, p1: 4.0, p2: 2.0, dim: 1 };
        let base = Self {
            preset,
            params: critical,
            grid: GridConfig { dim: 1, extent: 64.0, points: 1024 },
            stepper: StepperConfig::default(),
            initial: InitialData::MassRatio { ratio: 0.9 },
            horizon: 5.0,
            ground: GroundConfig::default(),
            diag: DiagConfig::default(),
            output_dir: default_output_dir(),
            seed: 0,
        };
        match preset {
            Preset::Threshold31 => Self {
                grid: GridConfig { dim: 1, extent: 16.0, points: 4096 },
                stepper: StepperConfig {
                    dt_init: 1e-3,
                    dt_min: 1e-16,
                    cfl_safety: 0.01,
                    linear_cfl: 1e9,
                    grad_blowup_factor: 10.0,
                    snapshot_stride: 50,
                    ..Default::default()
                },
                initial: InitialData::ThresholdFamily { c_re: 1.1, c_im: 0.0, rho: 3.0 },
                ..base
            },
            p if p.is_collapse() => {
                let (l0, b) = (0.01, 1.0);
                Self {
                    grid: GridConfig { dim: 1, extent: 40.0 * l0, points: 8192 },
                    stepper: collapse_stepper(),
                    initial: InitialData::Collapse { l0, b },
                    horizon: 2.0 * l0 * l0 / (4.0 * b),
                    ..base
                }
            }
            Preset::Supercritical52 => Self {
                params: PhysParams { lambda1: -1.0, lambda2: 0.0, p1: 6.0, p2: 2.0, dim: 1 },
                grid: GridConfig { dim: 1, extent: 20.0, points: 8192 },
                stepper: StepperConfig {
                    dt_init: 1e-3,
                    dt_min: 1e-16,
                    cfl_safety: 0.05,
                    linear_cfl: 1e9,
                    grad_blowup_factor: 100.0,
                    snapshot_stride: 2,
                    ..Default::default()
                },
                initial: InitialData::Gaussian { amplitude: 2.0, width: 1.0 },
                horizon: 10.0,
                ground: GroundConfig { extent: 40.0, points: 1024, ..Default::default() },
                ..base
            },
            _ => base,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    /// Preset hypotheses plus structural checks; violations are usage errors.
    pub fn validate(&self) -> Result<(), LabError> {
        let usage = |m: String| Err(LabError::Usage(m));
        self.params.validate().map_err(|e| LabError::Usage(e.to_string()))?;
        self.stepper.validate().map_err(|e| LabError::Usage(e.to_string()))?;
        self.grid.build().map_err(|e| LabError::Usage(e.to_string()))?;
        GridSpec::new(self.params.dim, self.ground.extent, self.ground.points)
            .map_err(|e| LabError::Usage(format!("ground grid: {e}")))?;
        if self.grid.dim != self.params.dim {
            return usage(format!("grid dim {} differs from params dim {}", self.grid.dim, self.params.dim));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return usage(format!("horizon {} must be finite and non-negative", self.horizon));
        }
        if !(self.diag.delta > 0.0 && self.diag.delta < 1.0) {
            return usage(format!("diag.delta {} must lie in (0, 1)", self.diag.delta));
        }
        let p = &self.params;
        let critical = p.is_l2_critical();
        match self.preset {
            Preset::Threshold31 => {
                if !(p.lambda1 == -1.0 && p.lambda2 == 1.0 && critical && p.p2 < 4.0 / p.dim as f64) {
                    return usage("threshold31 needs lambda1 = -1, lambda2 = 1, p1 = 4/N, p2 < 4/N".into());
                }
            }
            pr if pr.is_collapse() => {
                if !(p.lambda1 == -1.0 && critical) {
                    return usage(format!("{} needs lambda1 = -1 and p1 = 4/N", pr.name()));
                }
            }
            Preset::Supercritical52 => {
                if !(p.lambda1 == -1.0 && p.s_c() > 0.0) {
                    return usage("supercritical52 needs lambda1 = -1 and p1 > 4/N".into());
                }
                if matches!(self.initial, InitialData::MassRatio { .. } | InitialData::ThresholdFamily { .. }) {
                    return usage("supercritical52 initial data cannot reference the critical Q".into());
                }
            }
            _ => {}
        }
        if self.initial.needs_q() && !critical {
            return usage("initial data built from Q needs p1 = 4/N".into());
        }
        match self.initial {
            InitialData::MassRatio { ratio } if !(ratio > 0.0) => usage("mass ratio must be positive".into()),
            InitialData::ThresholdFamily { rho, .. } if !(rho > 0.0) => usage("rho must be positive".into()),
            InitialData::Collapse { l0, b } if !(l0 > 0.0 && b > 0.0) => usage("collapse needs l0, b > 0".into()),
            InitialData::Gaussian { width, .. } if !(width > 0.0) => usage("gaussian width must be positive".into()),
            InitialData::RandomBumps { count, .. } if count == 0 => usage("random_bumps needs count >= 1".into()),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for p in Preset::ALL {
            let cfg = ExperimentConfig::preset(p);
            cfg.validate().unwrap();
            let text = cfg.to_toml();
            let back = ExperimentConfig::from_toml(&text).unwrap();
            assert_eq!(back, cfg, "{}", p.name());
            assert_eq!(back.to_toml(), text);
        }
    }

    #[test]
    fn threshold_preset_enforces_its_hypotheses() {
        let mut cfg = ExperimentConfig::preset(Preset::Threshold31);
        cfg.params.lambda2 = -1.0;
        assert!(matches!(cfg.validate(), Err(LabError::Usage(_))));
        let mut cfg = ExperimentConfig::preset(Preset::Threshold31);
        cfg.params.p1 = 5.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn supercritical_preset_rejects_critical_exponent() {
        let mut cfg = ExperimentConfig::preset(Preset::Supercritical52);
        cfg.params.p1 = 4.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_files_fill_defaults() {
        let mut cfg = ExperimentConfig::preset(Preset::Custom);
        cfg.diag = DiagConfig::default();
        let text = cfg.to_toml();
        let trimmed: String = text.split("[diag]").next().unwrap().to_string();
        let back = ExperimentConfig::from_toml(&trimmed).unwrap();
        assert_eq!(back.diag, DiagConfig::default());
    }
}
