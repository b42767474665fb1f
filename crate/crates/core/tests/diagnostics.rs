use std::f64::consts::PI;

use nls_core::diagnostics::*;
use nls_core::ground::{closed_form_q_1d, GroundState};
use nls_core::window::window_mass;
use nls_core::{Field, GridSpec, PhysParams};
use num_complex::Complex64;

fn setup() -> (PhysParams, GroundState) {
    let params = PhysParams::critical_threshold(1, 2.0).unwrap();
    let q = closed_form_q_1d(4.0, GridSpec::new(1, 64.0, 2048).unwrap()).unwrap();
    (params, q)
}

#[test]
fn ground_state_fits_itself() {
    let (params, q) = setup();
    let fit = profile_fit(&q.field, &q, &params).unwrap();
    assert!((fit.rho - 1.0).abs() < 1e-12);
    assert!(fit.h1_distance < 1e-9 * h1_scale(&q), "{}", fit.h1_distance);
    assert!(fit.reduced_h.abs() < 1e-9);
    assert!(fit.grad_mismatch.abs() < 1e-12);
}

#[test]
fn fit_recovers_shift_and_phase() {
    let (params, q) = setup();
    let h = q.grid().spacing();
    let alpha = PI / 3.0;
    let u = q.field.shifted([96, 0]).scaled(Complex64::from_polar(1.0, alpha));
    let fit = profile_fit(&u, &q, &params).unwrap();
    assert!((fit.shift[0] - 96.0 * h).abs() < 1e-9, "shift {:?}", fit.shift);
    assert!((fit.phase - (2.0 * PI - alpha)).abs() < 1e-9, "phase {}", fit.phase);
    assert!(fit.h1_distance < 1e-9 * h1_scale(&q));
}

#[test]
fn dilated_profile_is_undone_by_rho() {
    let (params, q) = setup();
    let u = nls_core::ground::threshold_family(&q, Complex64::new(1.0, 0.0), 2.0).unwrap();
    let fit = profile_fit(&u, &q, &params).unwrap();
    assert!((fit.rho - 0.5).abs() < 1e-9, "rho {}", fit.rho);
    assert!(fit.h1_distance < 1e-6 * h1_scale(&q), "{}", fit.h1_distance);
}

#[test]
fn soliton_window_matches_integral() {
    let (_, q) = setup();
    let h = q.grid().spacing();
    let w = window_mass(&q.field, 1.0).unwrap();
    assert_eq!(w.center[0], 0.0);
    // ∫_{-1}^{1} √3 sech(2x) dx = √3 gd(2); the nodal sum includes both
    // endpoints, so add the rectangle-rule end corrections.
    let f = |x: f64| 3f64.sqrt() / (2.0 * x).cosh();
    let df = |x: f64| -2.0 * f(x) * (2.0 * x).tanh();
    let gd2 = 2.0 * 1f64.tanh().atan();
    let want = 3f64.sqrt() * gd2 + h * f(1.0) + h * h / 6.0 * df(1.0);
    assert!((w.mass - want).abs() < 1e-8, "{} vs {want}", w.mass);
}

#[test]
fn order_zero_fractional_windows_are_mass_windows() {
    let g = GridSpec::new(1, 20.0, 256).unwrap();
    let u = Field::from_fn(g, |x| Complex64::new((-(x[0] - 2.0).powi(2)).exp(), 0.3 * (-(x[0] * x[0])).exp()));
    let (lam, hsc, lpc) = fractional_window_track(&[&u], 0.0, 2.0, |_| 1.5).unwrap();
    let direct = window_mass(&u, 1.5).unwrap().mass;
    assert_eq!(lam, vec![1.5]);
    assert!((hsc[0].unwrap() - direct).abs() < 1e-12);
    assert!((lpc[0].unwrap() - direct).abs() < 1e-12);
    let (_, hsc, _) = fractional_window_track(&[&u], 0.0, 2.0, |_| 0.5 * g.spacing()).unwrap();
    assert_eq!(hsc, vec![None]);
}

#[test]
fn delta_outside_unit_interval_rejected() {
    let (_, q) = setup();
    let trace = nls_core::evolution::EvolutionTrace::default();
    assert!(concentration_track(&trace, &q, 0.0).is_err());
    assert!(concentration_track(&trace, &q, 1.0).is_err());
}
