//! Fourier transforms, spectral multipliers and grid quadrature.
//!
//! Conventions: the forward transform is the unnormalised DFT
//! `F_k = Σ_j f_j e^{-i ξ_k·(x_j + L/2)}`, the inverse carries the `1/M`
//! factor (`M = points^dim`), and wavenumbers are `ξ_k = 2πk/L` with
//! `k ∈ [-N/2, N/2)`. Multipliers act on the DFT coefficients, so the
//! offset of the box origin never matters. Quadrature is the rectangle
//! rule with weight `h^dim`, which is exact for trigonometric polynomials.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::error::{NlsError, Result};
use crate::grid::{Field, GridSpec};

type Plan = Arc<dyn Fft<f64>>;

static PLANS: Lazy<Mutex<HashMap<usize, (Plan, Plan)>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plans(n: usize) -> (Plan, Plan) {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Discrete Fourier coefficients of a [`Field`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(NlsError::Structural(format!(
                "{} coefficients for a grid of {} nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

fn transform(grid: &GridSpec, buf: &mut [Complex64], inverse: bool) {
    let n = grid.points();
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(buf, &mut scratch);
    if grid.dim() == 2 {
        transpose_square(buf, n);
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, n);
    }
    if inverse {
        let scale = 1.0 / grid.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }
}

/// In-place forward DFT of a buffer laid out on `grid`.
pub fn forward_in_place(grid: &GridSpec, buf: &mut [Complex64]) {
    debug_assert_eq!(buf.len(), grid.len());
    transform(grid, buf, false);
}

/// In-place normalised inverse DFT.
pub fn inverse_in_place(grid: &GridSpec, buf: &mut [Complex64]) {
    debug_assert_eq!(buf.len(), grid.len());
    transform(grid, buf, true);
}

pub fn fft_forward(f: &Field) -> Result<SpectralField> {
    if f.values().len() != f.grid().len() {
        return Err(NlsError::Structural("field length does not match its grid".into()));
    }
    let mut coeffs = f.values().to_vec();
    forward_in_place(f.grid(), &mut coeffs);
    SpectralField::new(*f.grid(), coeffs)
}

pub fn fft_inverse(spec: &SpectralField) -> Result<Field> {
    let mut values = spec.coeffs.clone();
    inverse_in_place(&spec.grid, &mut values);
    Field::new(spec.grid, values, 0.0)
}

/// Wavenumbers along one axis in DFT order.
pub fn wavenumbers(grid: &GridSpec) -> Vec<f64> {
    let n = grid.points() as isize;
    let dk = 2.0 * PI / grid.extent();
    (0..n).map(|k| if k < n / 2 { k } else { k - n }).map(|k| k as f64 * dk).collect()
}

/// Wave vector of flat coefficient `k`; unused trailing axes are zero.
pub fn wave_vector(grid: &GridSpec, axis_xi: &[f64], k: usize) -> [f64; 2] {
    let idx = grid.unflatten(k);
    match grid.dim() {
        1 => [axis_xi[idx[0]], 0.0],
        _ => [axis_xi[idx[0]], axis_xi[idx[1]]],
    }
}

/// `|ξ|²` for every coefficient in DFT order.
pub fn xi_squared(grid: &GridSpec) -> Vec<f64> {
    let xi = wavenumbers(grid);
    (0..grid.len())
        .map(|k| {
            let v = wave_vector(grid, &xi, k);
            v[0] * v[0] + v[1] * v[1]
        })
        .collect()
}

/// Largest `|ξ|` along an axis (the Nyquist wavenumber).
pub fn nyquist(grid: &GridSpec) -> f64 {
    PI / grid.spacing()
}

/// Applies a radial multiplier `m(|ξ|²)` to `f`.
pub fn apply_radial_multiplier(f: &Field, m: impl Fn(f64) -> Complex64) -> Field {
    let grid = *f.grid();
    let mut buf = f.values().to_vec();
    forward_in_place(&grid, &mut buf);
    for (z, xi2) in buf.iter_mut().zip(xi_squared(&grid)) {
        *z *= m(xi2);
    }
    inverse_in_place(&grid, &mut buf);
    Field::new(grid, buf, f.time).expect("length preserved")
}

/// `|ξ|^{2s}` with the convention `0^0 = 1`.
pub fn fractional_symbol(xi2: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if xi2 == 0.0 {
        0.0
    } else {
        xi2.powf(s)
    }
}

/// `(-Δ)^s f`, the inverse transform of `|ξ|^{2s} f̂`.
pub fn apply_fractional_laplacian(f: &Field, s: f64) -> Result<Field> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(NlsError::Argument(format!("fractional order {s} must be non-negative")));
    }
    Ok(apply_radial_multiplier(f, |xi2| Complex64::new(fractional_symbol(xi2, s), 0.0)))
}

/// Spectral Laplacian `Δf`.
pub fn laplacian(f: &Field) -> Field {
    apply_radial_multiplier(f, |xi2| Complex64::new(-xi2, 0.0))
}

/// Spectral partial derivatives, one field per axis. The Nyquist mode is
/// dropped, as usual for odd-order derivatives.
pub fn gradient(f: &Field) -> Vec<Field> {
    let grid = *f.grid();
    let xi = wavenumbers(&grid);
    let nyq = grid.points() / 2;
    let mut spec = f.values().to_vec();
    forward_in_place(&grid, &mut spec);
    (0..grid.dim())
        .map(|axis| {
            let mut buf = spec.clone();
            for (k, z) in buf.iter_mut().enumerate() {
                let idx = grid.unflatten(k)[axis];
                let factor = if idx == nyq { 0.0 } else { xi[idx] };
                *z *= Complex64::new(0.0, factor);
            }
            inverse_in_place(&grid, &mut buf);
            Field::new(grid, buf, f.time).expect("length preserved")
        })
        .collect()
}

/// Rectangle-rule integral of nodal values.
pub fn integrate(grid: &GridSpec, values: &[f64]) -> f64 {
    values.iter().sum::<f64>() * grid.cell_volume()
}

/// `ρ^{p/2}` for `ρ = |z|² ≥ 0`, using integer powers where `p` allows.
#[inline]
pub fn pow_half(rho: f64, p: f64) -> f64 {
    let half = 0.5 * p;
    if half.fract() == 0.0 && half.abs() <= 64.0 {
        rho.powi(half as i32)
    } else if p.fract() == 0.0 && p.abs() <= 128.0 {
        rho.powi(((p - 1.0) * 0.5) as i32) * rho.sqrt()
    } else {
        rho.powf(half)
    }
}

/// `∫ |f|^p`.
pub fn integral_abs_pow(f: &Field, p: f64) -> f64 {
    let sum: f64 = f.values().iter().map(|z| pow_half(z.norm_sqr(), p)).sum();
    sum * f.grid().cell_volume()
}

/// `∫ |ξ|^{2s} |f̂|²` in physical normalisation, i.e. `‖f‖²_{Ḣ^s}`.
fn spectral_energy(f: &Field, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = f.grid();
    let mut buf = f.values().to_vec();
    forward_in_place(grid, &mut buf);
    let sum: f64 = buf.iter().zip(xi_squared(grid)).map(|(z, xi2)| weight(xi2) * z.norm_sqr()).sum();
    sum * grid.cell_volume() / grid.len() as f64
}

pub fn norm_l2(f: &Field) -> f64 {
    integral_abs_pow(f, 2.0).sqrt()
}

pub fn norm_lp(f: &Field, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(NlsError::Argument(format!("Lebesgue exponent {p} must be >= 1")));
    }
    Ok(integral_abs_pow(f, p).powf(1.0 / p))
}

/// `‖∇f‖_{L²}`, computed from the spectrum.
pub fn norm_grad_l2(f: &Field) -> f64 {
    spectral_energy(f, |xi2| xi2).sqrt()
}

/// `‖f‖_{Ḣ^s} = ‖(-Δ)^{s/2} f‖_{L²}`; `s = 0` returns [`norm_l2`] exactly.
pub fn norm_hdot(f: &Field, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(NlsError::Argument(format!("Sobolev index {s} must be non-negative")));
    }
    if s == 0.0 {
        return Ok(norm_l2(f));
    }
    Ok(spectral_energy(f, |xi2| fractional_symbol(xi2, s)).sqrt())
}

/// Zeroes every coefficient outside the 2/3 band on any axis.
pub fn dealias_in_place(grid: &GridSpec, spec: &mut [Complex64]) {
    let n = grid.points();
    let cutoff = n / 3;
    let keep = |i: usize| {
        let k = if i < n / 2 { i } else { n - i };
        k <= cutoff
    };
    for (k, z) in spec.iter_mut().enumerate() {
        let idx = grid.unflatten(k);
        let inside = match grid.dim() {
            1 => keep(idx[0]),
            _ => keep(idx[0]) && keep(idx[1]),
        };
        if !inside {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}
