//! Post-processing of evolution traces into concentration, profile,
//! δ-collapse, rate and supercritical-concentration series.
//!
//! liminf statements cannot be evaluated on a finite run; every series
//! here is reported as measured and judged by the caller against a
//! tolerance at the last resolvable snapshot.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::evolution::{BlowupReport, EvolutionTrace};
use crate::fit::linear_fit;
use crate::grid::{Field, GridSpec, PhysParams};
use crate::ground::{rescaled_sample, GroundState, GroundStateKind};
use crate::spectral::{
    apply_fractional_laplacian, forward_in_place, integral_abs_pow, inverse_in_place, norm_grad_l2, norm_hdot,
    norm_l2, pow_half,
};
use crate::window::{window_mass, window_max};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Measured, but some entries were under-resolved or a monitored hypothesis broke.
    Flagged,
    /// The run does not meet the diagnostic's hypotheses; nothing to judge.
    HypothesesUnmet,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// Maximal window masses along the snapshots of a run.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationSeries {
    pub times: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub a_of_t: Vec<f64>,
    /// `None` where the window radius is below two grid cells.
    pub center: Vec<Option<[f64; 2]>>,
    pub window_mass: Vec<Option<f64>>,
    pub total_mass: Vec<f64>,
    pub delta: f64,
    /// `‖Q‖²_{L²}`.
    pub reference: f64,
}

impl ConcentrationSeries {
    pub fn last_resolved(&self) -> Option<usize> {
        self.window_mass.iter().rposition(Option::is_some)
    }

    /// Window mass at the last resolvable snapshot divided by `‖Q‖²`.
    pub fn terminal_ratio(&self) -> Option<f64> {
        self.last_resolved().and_then(|i| self.window_mass[i]).map(|m| m / self.reference)
    }

    pub fn any_flagged(&self) -> bool {
        self.window_mass.iter().any(Option::is_none)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(NlsError::Argument(format!("delta = {delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Window masses for radii `radius(‖∇u‖)`, clamped to half the box.
pub fn window_track(
    snapshots: &[&Field],
    reference: f64,
    delta: f64,
    radius: impl Fn(f64) -> f64,
) -> Result<ConcentrationSeries> {
    let mut s = ConcentrationSeries {
        times: Vec::new(),
        grad_norm: Vec::new(),
        a_of_t: Vec::new(),
        center: Vec::new(),
        window_mass: Vec::new(),
        total_mass: Vec::new(),
        delta,
        reference,
    };
    for u in snapshots {
        let grid = u.grid();
        let g = norm_grad_l2(u);
        let a = radius(g).min(0.5 * grid.extent());
        s.times.push(u.time);
        s.grad_norm.push(g);
        s.a_of_t.push(a);
        s.total_mass.push(norm_l2(u).powi(2));
        if a < 2.0 * grid.spacing() {
            s.center.push(None);
            s.window_mass.push(None);
        } else {
            let w = window_mass(u, a)?;
            s.center.push(Some(w.center));
            s.window_mass.push(Some(w.mass));
        }
    }
    Ok(s)
}

/// `a(t) = ‖∇u(t)‖^{-(1-δ)}` windows over every snapshot of the trace.
pub fn concentration_track(trace: &EvolutionTrace, q: &GroundState, delta: f64) -> Result<ConcentrationSeries> {
    check_delta(delta)?;
    let snaps: Vec<&Field> = trace.snapshots.iter().collect();
    window_track(&snaps, q.mass(), delta, |g| g.powf(-(1.0 - delta)))
}

/// Alignment of a rescaled snapshot with the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub time: f64,
    /// `‖∇Q‖ / ‖∇u‖`.
    pub rho: f64,
    pub shift: [f64; 2],
    /// In `[0, 2π)`.
    pub phase: f64,
    /// `‖e^{iθ}v(· + shift) - Q‖_{H¹}`.
    pub h1_distance: f64,
    /// `½‖∇v‖² - ‖v‖^{p₁+2}_{p₁+2}/(p₁+2)`.
    pub reduced_h: f64,
    /// `‖∇v‖ / ‖∇Q‖ - 1`, zero up to resampling error.
    pub grad_mismatch: f64,
}

fn h1_norm(f: &Field) -> f64 {
    (norm_l2(f).powi(2) + norm_grad_l2(f).powi(2)).sqrt()
}

/// `‖Q‖_{H¹}`, the natural scale for profile distances.
pub fn h1_scale(q: &GroundState) -> f64 {
    h1_norm(&q.field)
}

/// Rescales `u` to `v = ρ^{N/2} u(ρx)` on the ground state grid, finds the
/// translation maximising the modulus correlation with `Q` and the phase
/// of the overlap, then measures the aligned `H¹` distance.
pub fn profile_fit(u: &Field, q: &GroundState, params: &PhysParams) -> Result<ProfileFit> {
    if q.kind != GroundStateKind::Critical {
        return Err(NlsError::Argument("profile fit needs the critical ground state".into()));
    }
    if u.grid().dim() != q.grid().dim() {
        return Err(NlsError::Structural("field and ground state dimensions differ".into()));
    }
    let grad_u = norm_grad_l2(u);
    if !(grad_u > 0.0) {
        return Err(NlsError::Argument("profile fit of a field with zero gradient".into()));
    }
    let grid = *q.grid();
    let dim = grid.dim();
    let grad_q = norm_grad_l2(&q.field);
    let rho = grad_q / grad_u;
    let mut v = rescaled_sample(u, rho, &grid)?;
    v.scale(Complex64::new(rho.powf(0.5 * dim as f64), 0.0));

    let m = modulus_correlation_peak(&v, &q.field);
    let n = grid.points() as isize;
    let wrap = |i: usize| {
        let i = i as isize;
        if i >= n / 2 {
            i - n
        } else {
            i
        }
    };
    let offset = [wrap(m[0]), if dim == 2 { wrap(m[1]) } else { 0 }];
    let h = grid.spacing();
    let shift = [offset[0] as f64 * h, offset[1] as f64 * h];
    let aligned = v.shifted([-offset[0], -offset[1]]);

    let overlap: Complex64 = aligned.values().iter().zip(q.field.values()).map(|(a, b)| a * b.conj()).sum();
    let tau = 2.0 * std::f64::consts::PI;
    let phase = if overlap.norm() > 0.0 { (-overlap.arg()).rem_euclid(tau) } else { 0.0 };
    let phase = if phase >= tau { 0.0 } else { phase };
    let rot = Complex64::from_polar(1.0, phase);
    let diff = Field::new(
        grid,
        aligned.values().iter().zip(q.field.values()).map(|(a, b)| a * rot - b).collect(),
        u.time,
    )?;
    let p = params.p1;
    let grad_v = norm_grad_l2(&v);
    Ok(ProfileFit {
        time: u.time,
        rho,
        shift,
        phase,
        h1_distance: h1_norm(&diff),
        reduced_h: 0.5 * grad_v * grad_v - integral_abs_pow(&v, p + 2.0) / (p + 2.0),
        grad_mismatch: grad_v / grad_q - 1.0,
    })
}

/// Grid index `y` maximising `Σ_x |v|(x + y) Q(x)`, computed spectrally;
/// ties go to the smallest flat index.
fn modulus_correlation_peak(v: &Field, q: &Field) -> [usize; 2] {
    let grid = v.grid();
    let mut a: Vec<Complex64> = v.values().iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
    let mut b: Vec<Complex64> = q.values().iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
    forward_in_place(grid, &mut a);
    forward_in_place(grid, &mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y.conj());
    inverse_in_place(grid, &mut a);
    let best = a.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(f64::MIN_POSITIVE);
    let k = a.iter().position(|z| z.re >= best - tol).unwrap_or(0);
    grid.unflatten(k)
}

/// Right side of the reduced-Hamiltonian bound
/// `|H(v)| ≤ (‖∇Q‖²/‖∇u‖²)(|E(u₀)| + ‖u‖^{p₂+2}_{p₂+2}/(p₂+2))`.
pub fn reduced_h_bound(u: &Field, q: &GroundState, params: &PhysParams, energy0: f64) -> f64 {
    let rho2 = (norm_grad_l2(&q.field) / norm_grad_l2(u)).powi(2);
    let p2 = params.p2;
    rho2 * (energy0.abs() + integral_abs_pow(u, p2 + 2.0) / (p2 + 2.0))
}

/// Profile fit plus its reduced-Hamiltonian bound at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub fit: ProfileFit,
    pub h_bound: f64,
}

impl ProfileEntry {
    pub fn bound_holds(&self) -> bool {
        self.fit.reduced_h.abs() <= self.h_bound
    }
}

/// Profile fits over the final decade of gradient growth.
pub fn profile_track(trace: &EvolutionTrace, q: &GroundState, params: &PhysParams) -> Result<Vec<ProfileEntry>> {
    let e0 = *trace.energy.first().ok_or_else(|| NlsError::InsufficientData("empty trace".into()))?;
    trace
        .final_decade_snapshots()
        .into_iter()
        .map(|u| {
            Ok(ProfileEntry { fit: profile_fit(u, q, params)?, h_bound: reduced_h_bound(u, q, params, e0) })
        })
        .collect()
}

/// Centre-of-mass and variance series of a run.
#[derive(Debug, Clone, Serialize)]
pub struct DiracWitness {
    pub x0: [f64; 2],
    pub times: Vec<f64>,
    pub com: Vec<[f64; 2]>,
    pub variance: Vec<f64>,
    /// Whether `‖u₀‖ = ‖Q‖` to 1e-6 relative (required for the witness).
    pub critical_mass: bool,
    /// Index of the first snapshot in the final decade.
    pub decade_start: usize,
}

impl DiracWitness {
    pub fn verdict_hint(&self) -> Verdict {
        if self.critical_mass {
            Verdict::Pass
        } else {
            Verdict::HypothesesUnmet
        }
    }

    /// Log-log slope of the variance against `T* - t` over the final decade.
    pub fn variance_slope(&self, t_star: f64) -> Option<(f64, f64)> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self.times[self.decade_start..]
            .iter()
            .zip(&self.variance[self.decade_start..])
            .filter(|(t, v)| **t < t_star && **v > 0.0)
            .map(|(t, v)| ((t_star - t).ln(), v.ln()))
            .unzip();
        linear_fit(&xs, &ys).map(|f| (f.slope, f.r2))
    }
}

fn first_moment(u: &Field) -> [f64; 2] {
    let grid = u.grid();
    let mut m = [0.0; 2];
    for (k, z) in u.values().iter().enumerate() {
        let x = grid.position(k);
        let r = z.norm_sqr();
        m[0] += x[0] * r;
        m[1] += x[1] * r;
    }
    let dv = grid.cell_volume();
    [m[0] * dv, m[1] * dv]
}

fn variance_about(u: &Field, x0: [f64; 2]) -> f64 {
    let grid = u.grid();
    let s: f64 = u
        .values()
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let x = grid.position(k);
            ((x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2)) * z.norm_sqr()
        })
        .sum();
    s * grid.cell_volume()
}

/// Centre of mass `∫x|u|²/‖u₀‖²`, its final-decade average `x₀` and the
/// variance `∫|x - x₀|²|u|²` at every snapshot.
pub fn dirac_witness(trace: &EvolutionTrace, q: &GroundState) -> Result<DiracWitness> {
    let first = trace.snapshots.first().ok_or_else(|| NlsError::InsufficientData("trace has no snapshots".into()))?;
    let m0 = norm_l2(first).powi(2);
    if !(m0 > 0.0) {
        return Err(NlsError::Argument("zero initial mass".into()));
    }
    let qm = q.mass();
    let critical_mass = ((m0 / qm).sqrt() - 1.0).abs() <= 1e-6;
    let times: Vec<f64> = trace.snapshots.iter().map(|s| s.time).collect();
    let com: Vec<[f64; 2]> = trace
        .snapshots
        .iter()
        .map(|s| {
            let m = first_moment(s);
            [m[0] / m0, m[1] / m0]
        })
        .collect();
    let t_decade = trace.times[trace.final_decade_start()];
    let decade_start = times.iter().position(|&t| t >= t_decade).unwrap_or(times.len() - 1);
    let tail = &com[decade_start..];
    let k = tail.len() as f64;
    let x0 = [tail.iter().map(|c| c[0]).sum::<f64>() / k, tail.iter().map(|c| c[1]).sum::<f64>() / k];
    let variance = trace.snapshots.iter().map(|s| variance_about(s, x0)).collect();
    Ok(DiracWitness { x0, times, com, variance, critical_mass, decade_start })
}

/// Lower-bound check `‖∇u‖ ≥ C/(T* - t)` over the final decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    /// `min ‖∇u‖·(T* - t)` over the window.
    pub c_lower: f64,
    /// Slope of `log ‖∇u‖` against `-log(T* - t)`.
    pub slope: f64,
    pub r2: f64,
    pub points: usize,
}

impl RateCheck {
    /// The lower bound predicts growth at least as fast as `(T* - t)^{-1}`.
    pub fn consistent(&self, min_slope: f64) -> bool {
        self.slope >= min_slope && self.c_lower > 0.0
    }
}

pub const RATE_MIN_POINTS: usize = 10;

pub fn rate_check(report: &BlowupReport, trace: &EvolutionTrace) -> Result<RateCheck> {
    let t_star = match (report.blew_up, report.t_star_estimate) {
        (true, Some(t)) => t,
        _ => return Err(NlsError::Argument("rate check needs a blow-up report with T*".into())),
    };
    rate_check_at(t_star, trace)
}

/// Rate check against a given blow-up time.
pub fn rate_check_at(t_star: f64, trace: &EvolutionTrace) -> Result<RateCheck> {
    let start = trace.final_decade_start();
    let rows: Vec<(f64, f64)> = trace.times[start..]
        .iter()
        .zip(&trace.grad_norm[start..])
        .filter(|(t, _)| **t < t_star)
        .map(|(t, g)| (*t, *g))
        .collect();
    if rows.len() < RATE_MIN_POINTS {
        return Err(NlsError::InsufficientData(format!(
            "rate window holds {} points, need {RATE_MIN_POINTS}",
            rows.len()
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|(t, _)| -(t_star - t).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, g)| g.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| NlsError::InsufficientData("degenerate rate window".into()))?;
    let c_lower = rows.iter().map(|(t, g)| g * (t_star - t)).fold(f64::INFINITY, f64::min);
    Ok(RateCheck { c_lower, slope: fit.slope, r2: fit.r2, points: rows.len() })
}

/// Radius rule for the supercritical windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// `λ = ‖∇u‖^{-(1-δ)/s_c}`, so `λ‖∇u‖^{1/s_c} = ‖∇u‖^{δ/s_c} → ∞`.
    GradPower { delta: f64 },
    Fixed { radius: f64 },
}

impl LambdaRule {
    pub fn radius(&self, grad: f64, s_c: f64) -> f64 {
        match *self {
            Self::GradPower { delta } => grad.powf(-(1.0 - delta) / s_c),
            Self::Fixed { radius } => radius,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SupercriticalSeries {
    pub times: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Maximal ball amount of `|(-Δ)^{s_c/2}u|²`; `None` when under-resolved.
    pub hsc_window: Vec<Option<f64>>,
    /// Maximal ball amount of `|u|^{p_c}`.
    pub lpc_window: Vec<Option<f64>>,
    pub hsc_norm: Vec<f64>,
    pub sup_hsc_norm: f64,
    pub hsc_cap: f64,
    pub hypothesis_violated: bool,
    /// `‖Q‖²_{Ḣ^{s_c}}` of the fractional ground state.
    pub q_hsc_sq: f64,
    /// `‖R‖^{p_c}_{L^{p_c}}` of the mixed ground state.
    pub r_lpc: f64,
}

impl SupercriticalSeries {
    pub fn last_resolved(&self) -> Option<usize> {
        self.hsc_window.iter().rposition(Option::is_some)
    }
}

/// Windows of `|(-Δ)^{s/2}u|²` and `|u|^{p}` with radii from `radius(‖∇u‖)`.
pub fn fractional_window_track(
    snapshots: &[&Field],
    s: f64,
    p: f64,
    radius: impl Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<Option<f64>>, Vec<Option<f64>>)> {
    let mut lambda = Vec::with_capacity(snapshots.len());
    let mut hsc = Vec::with_capacity(snapshots.len());
    let mut lpc = Vec::with_capacity(snapshots.len());
    for u in snapshots {
        let grid: &GridSpec = u.grid();
        let r = radius(norm_grad_l2(u)).min(0.5 * grid.extent());
        lambda.push(r);
        if r < 2.0 * grid.spacing() {
            hsc.push(None);
            lpc.push(None);
            continue;
        }
        let w = apply_fractional_laplacian(u, 0.5 * s)?;
        hsc.push(Some(window_max(grid, &w.density(), r)?.mass));
        let dens: Vec<f64> = u.values().iter().map(|z| pow_half(z.norm_sqr(), p)).collect();
        lpc.push(Some(window_max(grid, &dens, r)?.mass));
    }
    Ok((lambda, hsc, lpc))
}

/// Ḣ^{s_c} and L^{p_c} window concentration with the hypothesis monitor
/// `sup_t ‖u(t)‖_{Ḣ^{s_c}} ≤ cap_factor·‖u₀‖_{Ḣ^{s_c}}`.
pub fn supercritical_track(
    trace: &EvolutionTrace,
    q_frac: &GroundState,
    r_mixed: &GroundState,
    params: &PhysParams,
    rule: LambdaRule,
    cap_factor: f64,
) -> Result<SupercriticalSeries> {
    let sc = params.s_c();
    if sc <= 0.0 {
        return Err(NlsError::Argument(format!("supercritical tracking needs s_c > 0, got {sc}")));
    }
    if q_frac.kind != GroundStateKind::FractionalSupercritical || r_mixed.kind != GroundStateKind::MixedSupercritical {
        return Err(NlsError::Argument("references must be the fractional and mixed ground states".into()));
    }
    if let LambdaRule::GradPower { delta } = rule {
        check_delta(delta)?;
    }
    let pc = params.p_c();
    let snaps: Vec<&Field> = trace.snapshots.iter().collect();
    let (lambda, hsc_window, lpc_window) = fractional_window_track(&snaps, sc, pc, |g| rule.radius(g, sc))?;
    let hsc_norm: Vec<f64> = snaps.iter().map(|u| norm_hdot(u, sc)).collect::<Result<_>>()?;
    let sup_hsc_norm = trace.hsc_norm.iter().chain(&hsc_norm).cloned().fold(0.0, f64::max);
    let hsc_cap = cap_factor * hsc_norm.first().copied().unwrap_or(0.0);
    Ok(SupercriticalSeries {
        times: snaps.iter().map(|u| u.time).collect(),
        lambda,
        hsc_window,
        lpc_window,
        hsc_norm,
        sup_hsc_norm,
        hsc_cap,
        hypothesis_violated: sup_hsc_norm > hsc_cap,
        q_hsc_sq: norm_hdot(&q_frac.field, sc)?.powi(2),
        r_lpc: integral_abs_pow(&r_mixed.field, pc),
    })
}
