use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};

/// Uniform periodic box `[-L/2, L/2)^dim` with `points` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    extent: f64,
    points: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn new(dim: usize, extent: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(NlsError::Argument(format!("dimension {dim} unsupported (1 or 2)")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(NlsError::Argument(format!("box extent {extent} must be positive")));
        }
        if points < Self::MIN_POINTS || !points.is_power_of_two() {
            return Err(NlsError::Argument(format!(
                "points per axis {points} must be a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { dim, extent, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of nodes, `points^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    /// Quadrature weight of a single node, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.extent + i as f64 * self.spacing()
    }

    /// Index of the node at the origin along any axis.
    pub fn origin_index(&self) -> usize {
        self.points / 2
    }

    pub fn axis_coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// Per-axis indices of flat node `k` (row-major, last axis fastest).
    pub fn unflatten(&self, k: usize) -> [usize; 2] {
        match self.dim {
            1 => [k, 0],
            _ => [k / self.points, k % self.points],
        }
    }

    /// Physical position of flat node `k`; unused trailing axes are zero.
    pub fn position(&self, k: usize) -> [f64; 2] {
        let idx = self.unflatten(k);
        match self.dim {
            1 => [self.coord(idx[0]), 0.0],
            _ => [self.coord(idx[0]), self.coord(idx[1])],
        }
    }

    /// Flat index of the mirror image `x -> -x` of node `k`.
    pub fn reflect(&self, k: usize) -> usize {
        let n = self.points;
        let idx = self.unflatten(k);
        let r = |i: usize| (n - i) % n;
        match self.dim {
            1 => r(idx[0]),
            _ => r(idx[0]) * n + r(idx[1]),
        }
    }

    /// Same grid with a different resolution.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.dim, self.extent, points)
    }
}

/// Complex amplitude sampled on a [`GridSpec`], tagged with model time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::Structural(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()], time: 0.0 }
    }

    /// Samples `f(x)` at every node; `x[1]` is zero in one dimension.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.position(k))).collect();
        Self { grid, values, time: 0.0 }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, a: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= a);
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// Pointwise map keeping the grid and time tag.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&z| f(z)).collect(), time: self.time }
    }

    /// `|u|^2` at every node.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Circular shift by whole grid cells: `out(x) = self(x - shift*h)`.
    pub fn shifted(&self, shift: [isize; 2]) -> Self {
        let n = self.grid.points as isize;
        let wrap = |i: isize| (((i % n) + n) % n) as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (k, slot) in out.iter_mut().enumerate() {
            let idx = self.grid.unflatten(k);
            let src = match self.grid.dim {
                1 => wrap(idx[0] as isize - shift[0]),
                _ => wrap(idx[0] as isize - shift[0]) * n as usize + wrap(idx[1] as isize - shift[1]),
            };
            *slot = self.values[src];
        }
        Self { grid: self.grid, values: out, time: self.time }
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(NlsError::Structural("fields live on different grids".into()));
        }
        Ok(())
    }
}

/// Model coefficients of `i u_t + Δu = λ₁|u|^{p₁}u + λ₂|u|^{p₂}u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub p1: f64,
    pub p2: f64,
    pub dim: usize,
}

impl PhysParams {
    pub fn new(lambda1: f64, lambda2: f64, p1: f64, p2: f64, dim: usize) -> Result<Self> {
        let params = Self { lambda1, lambda2, p1, p2, dim };
        params.validate()?;
        Ok(params)
    }

    /// Focusing L²-critical problem `λ₁ = -1, λ₂ = 1, p₁ = 4/N`.
    pub fn critical_threshold(dim: usize, p2: f64) -> Result<Self> {
        Self::new(-1.0, 1.0, 4.0 / dim as f64, p2, dim)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(NlsError::Argument(format!("dimension {} unsupported", self.dim)));
        }
        let finite = [self.lambda1, self.lambda2, self.p1, self.p2].iter().all(|v| v.is_finite());
        if !finite {
            return Err(NlsError::Argument("non-finite model coefficient".into()));
        }
        if !(self.p2 > 0.0 && self.p2 < self.p1) {
            return Err(NlsError::Argument(format!(
                "exponents must satisfy 0 < p2 < p1 (got p1 = {}, p2 = {})",
                self.p1, self.p2
            )));
        }
        Ok(())
    }

    /// Critical Sobolev index `N/2 - 2/p₁`.
    pub fn s_c(&self) -> f64 {
        self.dim as f64 / 2.0 - 2.0 / self.p1
    }

    /// Critical Lebesgue exponent `N p₁ / 2`.
    pub fn p_c(&self) -> f64 {
        self.dim as f64 * self.p1 / 2.0
    }

    /// `p₁ = 4/N` up to rounding.
    pub fn is_l2_critical(&self) -> bool {
        (self.p1 - 4.0 / self.dim as f64).abs() < 1e-12
    }

    /// Local nonlinear frequency `λ₁|u|^{p₁} + λ₂|u|^{p₂}` for `|u|² = rho`.
    pub fn nonlinear_rate(&self, rho: f64) -> f64 {
        use crate::spectral::pow_half;
        self.lambda1 * pow_half(rho, self.p1) + self.lambda2 * pow_half(rho, self.p2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(1, 10.0, 8).is_err());
        assert!(GridSpec::new(1, 10.0, 48).is_err());
        assert!(GridSpec::new(3, 10.0, 32).is_err());
        assert!(GridSpec::new(1, 0.0, 32).is_err());
        let g = GridSpec::new(2, 8.0, 16).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coord(g.origin_index()), 0.0);
    }

    #[test]
    fn field_length_checked() {
        let g = GridSpec::new(1, 10.0, 16).unwrap();
        assert!(Field::new(g, vec![Complex64::new(0.0, 0.0); 15], 0.0).is_err());
    }

    #[test]
    fn reflection_is_involution() {
        let g = GridSpec::new(2, 8.0, 16).unwrap();
        for k in 0..g.len() {
            assert_eq!(g.reflect(g.reflect(k)), k);
            let (x, y) = (g.position(k), g.position(g.reflect(k)));
            // the seam node -L/2 maps onto itself
            let mirrored = |a: f64, b: f64| (a + b).abs() < 1e-12 || (a - b).abs() < 1e-12 && a == -4.0;
            assert!(mirrored(x[0], y[0]) && mirrored(x[1], y[1]));
        }
    }

    #[test]
    fn derived_indices_follow_exponents() {
        let p = PhysParams::new(-1.0, 0.0, 6.0, 2.0, 1).unwrap();
        assert!((p.s_c() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(p.p_c(), 3.0);
        assert!(PhysParams::new(-1.0, 1.0, 2.0, 3.0, 1).is_err());
        assert!(PhysParams::critical_threshold(1, 2.0).unwrap().is_l2_critical());
    }
}
