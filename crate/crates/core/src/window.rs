//! Maximal ball-window mass `sup_y ∫_{|x-y|≤r} w(x) dx` over grid centres.

use num_complex::Complex64;

use crate::error::{NlsError, Result};
use crate::grid::{Field, GridSpec};
use crate::spectral::{forward_in_place, inverse_in_place};

/// Result of a window search: maximising centre and the enclosed amount.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub center: [f64; 2],
    pub center_index: usize,
    pub mass: f64,
}

/// Periodic distance between two flat nodes.
pub fn periodic_distance(grid: &GridSpec, a: usize, b: usize) -> f64 {
    let (ia, ib) = (grid.unflatten(a), grid.unflatten(b));
    let n = grid.points();
    let h = grid.spacing();
    let mut d2 = 0.0;
    for axis in 0..grid.dim() {
        let diff = ia[axis].abs_diff(ib[axis]);
        let d = diff.min(n - diff) as f64 * h;
        d2 += d * d;
    }
    d2.sqrt()
}

/// Indicator of the closed ball of `radius` around node 0, by node membership.
fn ball_indicator(grid: &GridSpec, radius: f64) -> Vec<f64> {
    (0..grid.len()).map(|k| if periodic_distance(grid, 0, k) <= radius { 1.0 } else { 0.0 }).collect()
}

/// Maximal window amount of a non-negative nodal density.
///
/// Every candidate centre is scored at once by circular convolution with
/// the ball indicator; the winner is then re-summed directly so the
/// returned amount carries no FFT round-off. Ties (up to 1e-12 relative)
/// go to the smallest flat index.
pub fn window_max(grid: &GridSpec, density: &[f64], radius: f64) -> Result<Window> {
    if density.len() != grid.len() {
        return Err(NlsError::Structural("density length does not match grid".into()));
    }
    if !(radius > 0.0 && radius <= 0.5 * grid.extent()) {
        return Err(NlsError::Argument(format!(
            "window radius {radius} must lie in (0, L/2 = {}]",
            0.5 * grid.extent()
        )));
    }
    let ball = ball_indicator(grid, radius);
    let mut a: Vec<Complex64> = density.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let mut b: Vec<Complex64> = ball.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    forward_in_place(grid, &mut a);
    forward_in_place(grid, &mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
    inverse_in_place(grid, &mut a);

    let scores: Vec<f64> = a.iter().map(|z| z.re).collect();
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(f64::MIN_POSITIVE);
    let center_index = scores.iter().position(|&s| s >= best - tol).unwrap_or(0);
    Ok(Window {
        center: grid.position(center_index),
        center_index,
        mass: window_sum(grid, density, center_index, radius),
    })
}

/// Direct sum of `density` over the ball of `radius` around node `center`.
pub fn window_sum(grid: &GridSpec, density: &[f64], center: usize, radius: f64) -> f64 {
    let sum: f64 = density
        .iter()
        .enumerate()
        .filter(|(k, _)| periodic_distance(grid, center, *k) <= radius)
        .map(|(_, w)| w)
        .sum();
    sum * grid.cell_volume()
}

/// `sup_y ∫_{|x-y|≤radius} |f|²` with the maximising centre.
pub fn window_mass(f: &Field, radius: f64) -> Result<Window> {
    window_max(f.grid(), &f.density(), radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_window_returns_total_mass() {
        let g = GridSpec::new(1, 20.0, 128).unwrap();
        let f = Field::from_real_fn(g, |x| (-(x[0] - 1.5).powi(2)).exp());
        let w = window_mass(&f, 10.0 - g.spacing()).unwrap();
        let total = crate::spectral::integral_abs_pow(&f, 2.0);
        assert!((w.mass - total).abs() < 1e-12 * total);
    }

    #[test]
    fn oversized_radius_rejected() {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        let f = Field::zeros(g);
        assert!(window_mass(&f, 10.5).is_err());
        assert!(window_mass(&f, 0.0).is_err());
    }

    #[test]
    fn twin_bumps_tie_to_smaller_index() {
        let g = GridSpec::new(1, 40.0, 256).unwrap();
        let bump = |c: f64| move |x: f64| (-4.0 * (x - c).powi(2)).exp();
        let (left, right) = (bump(-10.0), bump(10.0));
        let f = Field::from_real_fn(g, |x| left(x[0]) + right(x[0]));
        let w = window_mass(&f, 0.5).unwrap();
        assert!((w.center[0] + 10.0).abs() < 1e-12, "centre {:?}", w.center);
    }

    #[test]
    fn two_dimensional_window_finds_bump() {
        let g = GridSpec::new(2, 16.0, 64).unwrap();
        let f = Field::from_real_fn(g, |x| (-((x[0] - 2.0).powi(2) + (x[1] + 3.0).powi(2))).exp());
        let w = window_mass(&f, 1.5).unwrap();
        assert!((w.center[0] - 2.0).abs() < 1e-12 && (w.center[1] + 3.0).abs() < 1e-12);
    }
}
