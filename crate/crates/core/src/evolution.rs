//! Strang split-step integration of `i u_t + Δu = λ₁|u|^{p₁}u + λ₂|u|^{p₂}u`
//! with adaptive time steps, conservation monitoring and blow-up detection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::grid::{Field, GridSpec, PhysParams};
use crate::spectral::{
    dealias_in_place, forward_in_place, fractional_symbol, integral_abs_pow, inverse_in_place, pow_half, wavenumbers,
    xi_squared,
};

pub mod virial;

pub use virial::{virial_series, VirialSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepperConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub cfl_safety: f64,
    /// 2/3-rule filtering after every nonlinear substep.
    pub dealias: bool,
    /// Keep every `snapshot_stride`-th field (the first and last are always kept).
    pub snapshot_stride: usize,
    /// Declare blow-up once `‖∇u‖ ≥ factor · ‖∇u₀‖`.
    pub grad_blowup_factor: f64,
    /// Linear accuracy limit `dt ≤ linear_cfl · h²`.
    pub linear_cfl: f64,
    /// Hard cap on the number of steps; reaching it ends the run like the horizon.
    pub max_steps: usize,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-3,
            dt_min: 1e-12,
            cfl_safety: 0.5,
            dealias: true,
            snapshot_stride: 10,
            grad_blowup_factor: 1e3,
            linear_cfl: 1.0,
            max_steps: 50_000_000,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0 && self.dt_min > 0.0 && self.dt_min < self.dt_init) {
            return Err(NlsError::Argument("need 0 < dt_min < dt_init".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(NlsError::Argument("cfl_safety must lie in (0, 1]".into()));
        }
        if !(self.grad_blowup_factor > 1.0) {
            return Err(NlsError::Argument("grad_blowup_factor must exceed 1".into()));
        }
        if self.snapshot_stride == 0 || !(self.linear_cfl > 0.0) {
            return Err(NlsError::Argument("snapshot_stride and linear_cfl must be positive".into()));
        }
        Ok(())
    }
}

/// Per-step record of conserved and diagnostic quantities plus sparse snapshots.
#[derive(Debug, Clone, Default)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub hsc_norm: Vec<f64>,
    pub j: Vec<f64>,
    pub jprime: Vec<f64>,
    /// `∫|u|^{p₁+2}` and `∫|u|^{p₂+2}`, needed by the virial formulas.
    pub int_p1: Vec<f64>,
    pub int_p2: Vec<f64>,
    /// Fraction of the mass within 10% of the box edge.
    pub edge_fraction: Vec<f64>,
    pub snapshots: Vec<Field>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the first row of the final decade of gradient growth, i.e.
    /// the earliest row after which `‖∇u‖ ≥ ‖∇u‖_final / 10` holds throughout.
    pub fn final_decade_start(&self) -> usize {
        let Some(&last) = self.grad_norm.last() else { return 0 };
        let floor = 0.1 * last;
        let mut start = self.grad_norm.len() - 1;
        while start > 0 && self.grad_norm[start - 1] >= floor {
            start -= 1;
        }
        start
    }

    /// Snapshots whose time falls in the final decade of growth.
    pub fn final_decade_snapshots(&self) -> Vec<&Field> {
        let start = self.final_decade_start();
        let t0 = self.times.get(start).copied().unwrap_or(0.0);
        self.snapshots.iter().filter(|s| s.time >= t0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradThreshold,
    DtUnderflow,
    TimeHorizon,
}

/// Power law `‖∇u‖ ≈ C (T* - t)^{-exponent}` fitted over the final decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub c: f64,
    pub exponent: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub blew_up: bool,
    pub t_star_estimate: Option<f64>,
    pub final_grad_norm: f64,
    pub reason: StopReason,
    pub rate_fit: Option<RateFit>,
    pub steps: usize,
    pub final_time: f64,
    /// `dt` fell below `dt_min` without gradient growth: a stiffness failure, not blow-up.
    pub stiffness_failure: bool,
}

/// Hamiltonian `½‖∇u‖² + λ₁/(p₁+2)∫|u|^{p₁+2} + λ₂/(p₂+2)∫|u|^{p₂+2}`.
pub fn energy(u: &Field, params: &PhysParams) -> f64 {
    let grad2 = crate::spectral::norm_grad_l2(u).powi(2);
    energy_from_parts(params, grad2, integral_abs_pow(u, params.p1 + 2.0), integral_abs_pow(u, params.p2 + 2.0))
}

fn energy_from_parts(params: &PhysParams, grad2: f64, int_p1: f64, int_p2: f64) -> f64 {
    0.5 * grad2 + params.lambda1 / (params.p1 + 2.0) * int_p1 + params.lambda2 / (params.p2 + 2.0) * int_p2
}

/// Reusable split-step integrator for one grid and parameter set.
///
/// After [`Stepper::advance`] the internal spectrum holds the transform of
/// the new field, so [`Stepper::sample`] needs only the gradient inverses.
pub struct Stepper {
    grid: GridSpec,
    params: PhysParams,
    xi2: Vec<f64>,
    hsc_symbol: Vec<f64>,
    /// Per-axis `i ξ` with the Nyquist mode dropped.
    deriv: [Vec<f64>; 2],
    positions: Vec<[f64; 2]>,
    edge: Vec<bool>,
    dealias: bool,
    buf: Vec<Complex64>,
    spec: Vec<Complex64>,
    spec_valid: bool,
    propagator: Vec<Complex64>,
    propagator_dt: f64,
}

impl Stepper {
    pub fn new(grid: GridSpec, params: PhysParams, dealias: bool) -> Self {
        let xi2 = xi_squared(&grid);
        let sc = params.s_c();
        let hsc_symbol = xi2.iter().map(|&k2| fractional_symbol(k2, sc)).collect();
        let xi = wavenumbers(&grid);
        let nyq = grid.points() / 2;
        let deriv = [0, 1].map(|axis| {
            if axis >= grid.dim() {
                return Vec::new();
            }
            (0..grid.len())
                .map(|k| {
                    let idx = grid.unflatten(k)[axis];
                    if idx == nyq { 0.0 } else { xi[idx] }
                })
                .collect()
        });
        let positions: Vec<[f64; 2]> = (0..grid.len()).map(|k| grid.position(k)).collect();
        let cut = 0.4 * grid.extent();
        let edge = positions.iter().map(|x| x[0].abs() > cut || x[1].abs() > cut).collect();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            grid,
            params,
            xi2,
            hsc_symbol,
            deriv,
            positions,
            edge,
            dealias,
            buf: vec![zero; grid.len()],
            spec: vec![zero; grid.len()],
            spec_valid: false,
            propagator: vec![zero; grid.len()],
            propagator_dt: f64::NAN,
        }
    }

    fn nonlinear(&self, vals: &mut [Complex64], tau: f64) {
        for z in vals.iter_mut() {
            let phase = -tau * self.params.nonlinear_rate(z.norm_sqr());
            *z *= Complex64::from_polar(1.0, phase);
        }
    }

    /// One Strang step `N(dt/2) L(dt) N(dt/2)` in place.
    pub fn advance(&mut self, u: &mut Field, dt: f64) -> Result<()> {
        if u.grid() != &self.grid {
            return Err(NlsError::Structural("field grid differs from stepper grid".into()));
        }
        if dt != self.propagator_dt {
            for (e, k2) in self.propagator.iter_mut().zip(&self.xi2) {
                *e = Complex64::from_polar(1.0, -k2 * dt);
            }
            self.propagator_dt = dt;
        }
        let vals = u.values_mut();
        self.nonlinear(vals, 0.5 * dt);
        self.buf.copy_from_slice(vals);
        forward_in_place(&self.grid, &mut self.buf);
        if self.dealias {
            dealias_in_place(&self.grid, &mut self.buf);
        }
        for (z, e) in self.buf.iter_mut().zip(&self.propagator) {
            *z *= e;
        }
        inverse_in_place(&self.grid, &mut self.buf);
        vals.copy_from_slice(&self.buf);
        self.nonlinear(vals, 0.5 * dt);
        self.spec.copy_from_slice(vals);
        forward_in_place(&self.grid, &mut self.spec);
        if self.dealias {
            dealias_in_place(&self.grid, &mut self.spec);
            self.buf.copy_from_slice(&self.spec);
            inverse_in_place(&self.grid, &mut self.buf);
            vals.copy_from_slice(&self.buf);
        }
        self.spec_valid = true;
        u.time += dt;
        if !u.is_finite() {
            return Err(NlsError::Overflow(u.time));
        }
        Ok(())
    }

    /// Largest pointwise nonlinear frequency `|λ₁||u|^{p₁} + |λ₂||u|^{p₂}`.
    pub fn max_nonlinear_rate(&self, u: &Field) -> f64 {
        let rho = u.values().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        self.params.lambda1.abs() * pow_half(rho, self.params.p1)
            + self.params.lambda2.abs() * pow_half(rho, self.params.p2)
    }

    /// All per-step diagnostics. `u` must be the field last passed to
    /// `advance`, or any field if no step has been taken yet.
    pub(crate) fn sample(&mut self, u: &Field) -> Sample {
        let grid = self.grid;
        if !self.spec_valid {
            self.spec.copy_from_slice(u.values());
            forward_in_place(&grid, &mut self.spec);
        }
        let params = &self.params;
        let sc = params.s_c();
        let norm = grid.cell_volume() / grid.len() as f64;
        let (mut g2, mut h2) = (0.0, 0.0);
        for ((z, &k2), &s) in self.spec.iter().zip(&self.xi2).zip(&self.hsc_symbol) {
            let w = z.norm_sqr();
            g2 += k2 * w;
            h2 += s * w;
        }
        let (g2, h2) = (g2 * norm, h2 * norm);
        let dv = grid.cell_volume();
        let vals = u.values();
        let (mut mass, mut j, mut edge_mass) = (0.0, 0.0, 0.0);
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for ((z, x), &e) in vals.iter().zip(&self.positions).zip(&self.edge) {
            let rho = z.norm_sqr();
            mass += rho;
            j += (x[0] * x[0] + x[1] * x[1]) * rho;
            p1 += pow_half(rho, params.p1 + 2.0);
            p2 += pow_half(rho, params.p2 + 2.0);
            if e {
                edge_mass += rho;
            }
        }
        // J' = 4 Im ∫ ū x·∇u
        let mut jp = 0.0;
        for axis in 0..grid.dim() {
            for ((b, s), &d) in self.buf.iter_mut().zip(&self.spec).zip(&self.deriv[axis]) {
                *b = s * Complex64::new(0.0, d);
            }
            inverse_in_place(&grid, &mut self.buf);
            for ((b, z), x) in self.buf.iter().zip(vals).zip(&self.positions) {
                jp += x[axis] * (z.conj() * b).im;
            }
        }
        self.spec_valid = false;
        let (int_p1, int_p2) = (p1 * dv, p2 * dv);
        Sample {
            mass: mass * dv,
            energy: energy_from_parts(params, g2, int_p1, int_p2),
            grad_norm: g2.sqrt(),
            hsc_norm: if sc == 0.0 { (mass * dv).sqrt() } else { h2.max(0.0).sqrt() },
            j: j * dv,
            jprime: 4.0 * jp * dv,
            int_p1,
            int_p2,
            edge_fraction: if mass > 0.0 { edge_mass / mass } else { 0.0 },
        }
    }
}

/// One Strang step; see [`Stepper::advance`].
pub fn step(u: &Field, dt: f64, params: &PhysParams, dealias: bool) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(NlsError::Argument(format!("time step {dt} must be positive")));
    }
    let mut out = u.clone();
    Stepper::new(*u.grid(), *params, dealias).advance(&mut out, dt)?;
    Ok(out)
}

/// Per-step diagnostics from one transform and one gradient.
pub(crate) struct Sample {
    pub mass: f64,
    pub energy: f64,
    pub grad_norm: f64,
    pub hsc_norm: f64,
    pub j: f64,
    pub jprime: f64,
    pub int_p1: f64,
    pub int_p2: f64,
    pub edge_fraction: f64,
}

impl EvolutionTrace {
    fn push(&mut self, t: f64, s: Sample) {
        self.times.push(t);
        self.mass.push(s.mass);
        self.energy.push(s.energy);
        self.grad_norm.push(s.grad_norm);
        self.hsc_norm.push(s.hsc_norm);
        self.j.push(s.j);
        self.jprime.push(s.jprime);
        self.int_p1.push(s.int_p1);
        self.int_p2.push(s.int_p2);
        self.edge_fraction.push(s.edge_fraction);
    }
}

/// Growth factor above which a `dt` underflow counts as blow-up rather than stiffness.
pub const UNDERFLOW_GROWTH: f64 = 2.0;

/// Integrates up to `horizon` or until blow-up is declared.
pub fn evolve(
    u0: &Field,
    params: &PhysParams,
    cfg: &StepperConfig,
    horizon: f64,
) -> Result<(EvolutionTrace, BlowupReport)> {
    cfg.validate()?;
    params.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(NlsError::Argument(format!("horizon {horizon} must be finite and non-negative")));
    }
    if u0.grid().dim() != params.dim {
        return Err(NlsError::Argument("field and parameter dimensions differ".into()));
    }
    let grid = *u0.grid();
    let mut stepper = Stepper::new(grid, *params, cfg.dealias);
    let mut u = u0.clone();
    let t0 = u.time;
    let t_end = t0 + horizon;

    let mut trace = EvolutionTrace::default();
    trace.push(u.time, stepper.sample(&u));
    trace.snapshots.push(u.clone());
    let grad0 = trace.grad_norm[0];
    let dt_linear = cfg.linear_cfl * grid.spacing().powi(2);

    let mut steps = 0usize;
    let mut reason = StopReason::TimeHorizon;
    let mut blew_up = false;
    let mut stiffness_failure = false;

    while u.time < t_end && steps < cfg.max_steps {
        let rate = stepper.max_nonlinear_rate(&u);
        let dt_nl = if rate > 0.0 { 1.0 / rate } else { f64::INFINITY };
        let dt_adapt = cfg.cfl_safety * cfg.dt_init.min(dt_linear).min(dt_nl);
        if dt_adapt < cfg.dt_min {
            reason = StopReason::DtUnderflow;
            let grad = *trace.grad_norm.last().expect("non-empty");
            blew_up = grad >= UNDERFLOW_GROWTH * grad0;
            stiffness_failure = !blew_up;
            break;
        }
        let remaining = t_end - u.time;
        // Land on the horizon without leaving a sliver step behind.
        let dt = if remaining <= dt_adapt * (1.0 + 1e-9) {
            remaining
        } else if remaining < 2.0 * dt_adapt {
            0.5 * remaining
        } else {
            dt_adapt
        };
        stepper.advance(&mut u, dt)?;
        if dt == remaining {
            u.time = t_end;
        }
        steps += 1;
        let s = stepper.sample(&u);
        let grad = s.grad_norm;
        trace.push(u.time, s);
        if steps % cfg.snapshot_stride == 0 {
            trace.snapshots.push(u.clone());
        }
        if grad0 > 0.0 && grad >= cfg.grad_blowup_factor * grad0 {
            reason = StopReason::GradThreshold;
            blew_up = true;
            break;
        }
    }
    if trace.snapshots.last().map(|s| s.time) != Some(u.time) {
        trace.snapshots.push(u.clone());
    }

    let (t_star_estimate, rate_fit) = if blew_up {
        let t_star = estimate_t_star(&trace);
        (t_star, t_star.and_then(|ts| fit_rate(&trace, ts)))
    } else {
        (None, None)
    };
    let report = BlowupReport {
        blew_up: blew_up && t_star_estimate.is_some(),
        t_star_estimate,
        final_grad_norm: *trace.grad_norm.last().expect("non-empty"),
        reason,
        rate_fit,
        steps,
        final_time: u.time,
        stiffness_failure,
    };
    Ok((trace, report))
}

/// Zero crossing of the least-squares line through `1/‖∇u‖` over the final
/// decade of growth; always strictly after the last recorded time.
pub fn estimate_t_star(trace: &EvolutionTrace) -> Option<f64> {
    let n = trace.len();
    if n < 2 {
        return None;
    }
    let start = trace.final_decade_start().min(n - 2);
    let ts = &trace.times[start..];
    let ys: Vec<f64> = trace.grad_norm[start..].iter().map(|g| 1.0 / g).collect();
    let t_last = trace.times[n - 1];
    let y_last = ys[ys.len() - 1];
    let fit = linear_fit(ts, &ys)?;
    if fit.slope < 0.0 {
        let t_star = -fit.intercept / fit.slope;
        if t_star > t_last {
            return Some(t_star);
        }
    }
    // Fall back on the local secant through the last two rows.
    let (t_prev, y_prev) = (trace.times[n - 2], 1.0 / trace.grad_norm[n - 2]);
    let local = (y_last - y_prev) / (t_last - t_prev);
    if local < 0.0 {
        Some(t_last - y_last / local)
    } else {
        None
    }
}

/// Regression of `log ‖∇u‖` on `-log(T* - t)` over the final decade.
pub fn fit_rate(trace: &EvolutionTrace, t_star: f64) -> Option<RateFit> {
    let start = trace.final_decade_start();
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace.times[start..]
        .iter()
        .zip(&trace.grad_norm[start..])
        .filter(|(t, _)| **t < t_star)
        .map(|(t, g)| (-(t_star - t).ln(), g.ln()))
        .unzip();
    let LinearFit { slope, intercept, r2 } = linear_fit(&xs, &ys)?;
    Some(RateFit { c: intercept.exp(), exponent: slope, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::norm_l2;
    use std::f64::consts::PI;

    fn free() -> PhysParams {
        PhysParams { lambda1: 0.0, lambda2: 0.0, p1: 4.0, p2: 2.0, dim: 1 }
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = GridSpec::new(1, 10.0, 32).unwrap();
        let p = PhysParams::critical_threshold(1, 2.0).unwrap();
        assert_eq!(energy(&Field::zeros(g), &p), 0.0);
    }

    #[test]
    fn free_flow_rotates_a_plane_wave_exactly() {
        let g = GridSpec::new(1, 2.0 * PI, 32).unwrap();
        let k = 3.0;
        let u = Field::from_fn(g, |x| Complex64::new(0.0, k * x[0]).exp());
        let dt = 0.0137;
        let out = step(&u, dt, &free(), false).unwrap();
        for (a, b) in out.values().iter().zip(u.values()) {
            assert!((a - b * Complex64::from_polar(1.0, -k * k * dt)).norm() < 1e-12);
        }
        assert!(step(&u, 0.0, &free(), false).is_err());
    }

    #[test]
    fn nonlinear_substep_preserves_modulus_and_mass() {
        let g = GridSpec::new(1, 20.0, 128).unwrap();
        let p = PhysParams::critical_threshold(1, 2.0).unwrap();
        let u = Field::from_real_fn(g, |x| 1.2 * (-x[0] * x[0]).exp());
        let out = step(&u, 1e-3, &p, false).unwrap();
        let rel = (norm_l2(&out) - norm_l2(&u)).abs() / norm_l2(&u);
        assert!(rel < 1e-14, "{rel}");
    }

    #[test]
    fn zero_horizon_gives_single_row() {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        let p = PhysParams::critical_threshold(1, 2.0).unwrap();
        let u = Field::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let (trace, report) = evolve(&u, &p, &StepperConfig::default(), 0.0).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(!report.blew_up);
        assert_eq!(report.reason, StopReason::TimeHorizon);
    }

    #[test]
    fn underflow_without_growth_is_stiffness() {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        let p = PhysParams::critical_threshold(1, 2.0).unwrap();
        let u = Field::from_real_fn(g, |x| 30.0 * (-x[0] * x[0]).exp());
        let cfg = StepperConfig { dt_min: 1e-4, ..StepperConfig::default() };
        let (_, report) = evolve(&u, &p, &cfg, 1.0).unwrap();
        assert_eq!(report.reason, StopReason::DtUnderflow);
        assert!(report.stiffness_failure && !report.blew_up);
    }

    #[test]
    fn final_decade_tracks_last_growth() {
        let trace = EvolutionTrace { grad_norm: vec![1.0, 50.0, 3.0, 20.0, 40.0, 100.0], ..Default::default() };
        assert_eq!(trace.final_decade_start(), 3);
    }
}
