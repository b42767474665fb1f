//! wasm-bindgen surface for `www/index.html`: the critical ground state,
//! the threshold energy curve, and a live evolution of threshold data.

use nls_core::evolution::{energy, Stepper};
use nls_core::ground::{closed_form_q_1d, min_rho, threshold_energy, threshold_family_on, GroundState};
use nls_core::spectral::{norm_grad_l2, norm_l2};
use nls_core::{Field, GridSpec, PhysParams};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

/// Box used for the reference profile; wide enough for the closed form.
const Q_EXTENT: f64 = 64.0;
const Q_POINTS: usize = 2048;

fn params() -> PhysParams {
    PhysParams::critical_threshold(1, 2.0).expect("valid")
}

fn reference_q() -> Result<GroundState, String> {
    let grid = GridSpec::new(1, Q_EXTENT, Q_POINTS).map_err(|e| e.to_string())?;
    closed_form_q_1d(4.0, grid).map_err(|e| e.to_string())
}

/// Interleaved `[x0, Q(x0), x1, Q(x1), ...]` on `points` nodes of `[-L/2, L/2)`.
#[wasm_bindgen]
pub fn ground_state(extent: f64, points: usize) -> Result<Vec<f64>, String> {
    let q = reference_q()?;
    let grid = GridSpec::new(1, extent, points).map_err(|e| e.to_string())?;
    let u = threshold_family_on(&q, Complex64::new(1.0, 0.0), 1.0, &grid).map_err(|e| e.to_string())?;
    Ok(grid.axis_coords().iter().zip(u.values()).flat_map(|(x, z)| [*x, z.re]).collect())
}

/// `ρ*(c)`, the smallest scale with negative energy.
#[wasm_bindgen]
pub fn rho_star(c: f64) -> Result<f64, String> {
    min_rho(&reference_q()?, Complex64::new(c, 0.0), &params()).map_err(|e| e.to_string())
}

/// Interleaved `[ρ, E(ρ), ...]` for `samples` scales in `(0, rho_max]`.
#[wasm_bindgen]
pub fn threshold_curve(c: f64, rho_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(rho_max > 0.0) || samples == 0 {
        return Err("need rho_max > 0 and at least one sample".into());
    }
    let q = reference_q()?;
    let p = params();
    let c = Complex64::new(c, 0.0);
    Ok((1..=samples)
        .flat_map(|i| {
            let rho = rho_max * i as f64 / samples as f64;
            [rho, threshold_energy(&q, c, rho, &p)]
        })
        .collect())
}

/// Evolution of `c ρ^{1/2} Q(ρx)` under the critical threshold model.
#[wasm_bindgen]
pub struct Simulation {
    u: Field,
    stepper: Stepper,
    params: PhysParams,
    grad0: f64,
    energy0: f64,
    stopped: bool,
}

/// Gradient growth after which the demo declares blow-up and stops.
const STOP_GROWTH: f64 = 10.0;

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(c: f64, rho: f64, extent: f64, points: usize) -> Result<Simulation, String> {
        let q = reference_q()?;
        let grid = GridSpec::new(1, extent, points).map_err(|e| e.to_string())?;
        let u = threshold_family_on(&q, Complex64::new(c, 0.0), rho, &grid).map_err(|e| e.to_string())?;
        let params = params();
        Ok(Simulation {
            grad0: norm_grad_l2(&u),
            energy0: energy(&u, &params),
            stepper: Stepper::new(grid, params, true),
            u,
            params,
            stopped: false,
        })
    }

    /// Advances up to `steps` adaptive steps; returns false once blow-up stopped the run.
    pub fn advance(&mut self, steps: usize) -> Result<bool, String> {
        for _ in 0..steps {
            if self.stopped {
                break;
            }
            let rate = self.stepper.max_nonlinear_rate(&self.u);
            // The linear flow is exact, so only the nonlinear phase limits dt.
            let dt = (0.02 / rate.max(1e-12)).min(1e-3);
            self.stepper.advance(&mut self.u, dt).map_err(|e| e.to_string())?;
            if norm_grad_l2(&self.u) >= STOP_GROWTH * self.grad0 {
                self.stopped = true;
            }
        }
        Ok(!self.stopped)
    }

    pub fn density(&self) -> Vec<f64> {
        self.u.density()
    }

    pub fn coords(&self) -> Vec<f64> {
        self.u.grid().axis_coords()
    }

    pub fn time(&self) -> f64 {
        self.u.time
    }

    pub fn mass(&self) -> f64 {
        norm_l2(&self.u).powi(2)
    }

    pub fn grad_norm(&self) -> f64 {
        norm_grad_l2(&self.u)
    }

    pub fn energy(&self) -> f64 {
        energy(&self.u, &self.params)
    }

    pub fn initial_energy(&self) -> f64 {
        self.energy0
    }

    pub fn stopped(&self) -> bool {
        self.stopped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_peaks_at_origin() {
        let v = ground_state(32.0, 512).unwrap();
        let peak = v.chunks(2).max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
        assert_eq!(peak[0], 0.0);
        assert!((peak[1] - 3f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn curve_crosses_zero_at_rho_star() {
        let star = rho_star(1.1).unwrap();
        let curve = threshold_curve(1.1, 2.0 * star, 200).unwrap();
        for pair in curve.chunks(2) {
            let (rho, e) = (pair[0], pair[1]);
            if (rho - star).abs() > 1e-6 {
                assert_eq!(e < 0.0, rho > star, "rho {rho}, E {e}");
            }
        }
        assert!(rho_star(0.9).is_err());
    }

    #[test]
    fn subthreshold_run_keeps_mass() {
        let mut sim = Simulation::new(0.9, 1.0, 32.0, 512).unwrap();
        let m0 = sim.mass();
        assert!(sim.advance(200).unwrap());
        assert!(sim.time() > 0.0);
        assert!((sim.mass() - m0).abs() < 1e-10 * m0);
        assert_eq!(sim.density().len(), sim.coords().len());
    }

    #[test]
    fn negative_energy_run_stops() {
        let mut sim = Simulation::new(1.1, 3.0, 16.0, 2048).unwrap();
        assert!(sim.initial_energy() < 0.0);
        let mut running = true;
        for _ in 0..1000 {
            running = sim.advance(100).unwrap();
            if !running {
                break;
            }
        }
        assert!(!running && sim.stopped(), "t = {}, grad {}", sim.time(), sim.grad_norm());
    }
}
