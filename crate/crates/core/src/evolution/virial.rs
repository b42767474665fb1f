//! Virial diagnostics `J = ∫|x|²|u|²`, `J' = -4 Im∫ u x·∇ū` and the two
//! closed forms of `J''`.

use serde::Serialize;

use super::EvolutionTrace;
use crate::error::{NlsError, Result};
use crate::grid::PhysParams;

#[derive(Debug, Clone, Serialize)]
pub struct VirialSeries {
    pub times: Vec<f64>,
    pub j: Vec<f64>,
    pub jprime: Vec<f64>,
    /// `8‖∇u‖² + 4Nλ₁p₁/(p₁+2)∫|u|^{p₁+2} + 4Nλ₂p₂/(p₂+2)∫|u|^{p₂+2}`.
    pub jpp_formula: Vec<f64>,
    /// Five-point finite-difference derivative of `jprime`.
    pub jpp_fd: Vec<f64>,
    /// `16E(u₀) + λ₂(4Np₂-16)/(p₂+2)∫|u|^{p₂+2}`, only for `p₁ = 4/N`.
    pub jpp_reduced: Option<Vec<f64>>,
    /// False when mass approached the box seam, where `|x|²` is discontinuous.
    pub valid: bool,
}

/// Edge-mass fraction above which the virial series is flagged invalid.
pub const EDGE_FRACTION_LIMIT: f64 = 1e-8;

/// Points in the finite-difference stencil.
pub const STENCIL: usize = 5;

/// Derivative of the local quartic interpolant through five neighbouring
/// samples (shifted one-sided at the ends); exact on quartics, any spacing.
pub fn derivative(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    let w = STENCIL.min(n);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2).min(n - w);
            let idx = lo..lo + w;
            let t = ts[i];
            let mut d = 0.0;
            for j in idx.clone() {
                // L_j'(t) = Σ_k 1/(t_j - t_k) Π_{m ≠ j,k} (t - t_m)/(t_j - t_m)
                let mut lj = 0.0;
                for k in idx.clone().filter(|&k| k != j) {
                    let mut prod = 1.0 / (ts[j] - ts[k]);
                    for m in idx.clone().filter(|&m| m != j && m != k) {
                        prod *= (t - ts[m]) / (ts[j] - ts[m]);
                    }
                    lj += prod;
                }
                d += lj * ys[j];
            }
            d
        })
        .collect()
}

pub fn virial_series(trace: &EvolutionTrace, params: &PhysParams) -> Result<VirialSeries> {
    if trace.len() < 3 {
        return Err(NlsError::Argument(format!("virial series needs at least 3 samples, got {}", trace.len())));
    }
    let n = params.dim as f64;
    let (l1, l2, p1, p2) = (params.lambda1, params.lambda2, params.p1, params.p2);
    let jpp_formula = (0..trace.len())
        .map(|i| {
            8.0 * trace.grad_norm[i].powi(2)
                + 4.0 * n * l1 * p1 / (p1 + 2.0) * trace.int_p1[i]
                + 4.0 * n * l2 * p2 / (p2 + 2.0) * trace.int_p2[i]
        })
        .collect();
    let jpp_reduced = params.is_l2_critical().then(|| {
        let e0 = trace.energy[0];
        trace.int_p2.iter().map(|i2| 16.0 * e0 + l2 * (4.0 * n * p2 - 16.0) / (p2 + 2.0) * i2).collect()
    });
    Ok(VirialSeries {
        times: trace.times.clone(),
        j: trace.j.clone(),
        jprime: trace.jprime.clone(),
        jpp_formula,
        jpp_fd: derivative(&trace.times, &trace.jprime),
        jpp_reduced,
        valid: trace.edge_fraction.iter().all(|f| *f < EDGE_FRACTION_LIMIT),
    })
}
