use std::f64::consts::PI;

use nls_core::evolution::energy;
use nls_core::ground::*;
use nls_core::spectral::integral_abs_pow;
use nls_core::{Field, GridSpec, NlsError, PhysParams};
use num_complex::Complex64;

fn critical_1d() -> (PhysParams, GroundState) {
    let params = PhysParams::critical_threshold(1, 2.0).unwrap();
    let q = closed_form_q_1d(4.0, GridSpec::new(1, 64.0, 2048).unwrap()).unwrap();
    (params, q)
}

fn supercritical() -> PhysParams {
    PhysParams::new(-1.0, 0.0, 6.0, 2.0, 1).unwrap()
}

/// Dense O(n²) DFT pair with an exact twiddle table; shares no code with the FFT path.
fn dense_multiplier(vals: &[f64], extent: f64, symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = vals.len();
    let tw: Vec<Complex64> = (0..n).map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / n as f64)).collect();
    let xi = |k: usize| {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        2.0 * PI * kk / extent
    };
    let coeffs: Vec<Complex64> = (0..n)
        .map(|k| (0..n).map(|j| tw[(j * k) % n] * vals[j]).sum::<Complex64>() * symbol(xi(k)))
        .collect();
    (0..n).map(|j| (0..n).map(|k| tw[(j * k) % n].conj() * coeffs[k]).sum::<Complex64>().re / n as f64).collect()
}

#[test]
fn closed_form_profile_values() {
    let (_, q) = critical_1d();
    let g = *q.grid();
    let centre = q.field.values()[g.origin_index()];
    assert!((centre.re - 3f64.powf(0.25)).abs() < 1e-14);
    assert!((q.mass() - 3f64.sqrt() * PI / 2.0).abs() < 1e-12, "mass {}", q.mass());
    for k in 1..g.points() {
        let a = q.field.values()[k];
        let b = q.field.values()[g.reflect(k)];
        assert!((a - b).norm() < 1e-15);
    }
    assert!(q.residual_linf < 1e-10);
}

#[test]
fn closed_form_refuses_a_truncating_box() {
    let err = closed_form_q_1d(4.0, GridSpec::new(1, 20.0, 1024).unwrap()).unwrap_err();
    assert!(matches!(err, NlsError::Truncation(_)), "{err}");
}

#[test]
fn sharp_constant_is_resolution_independent() {
    let exact = 4.0 / (3.0 * PI * PI);
    let params = PhysParams::critical_threshold(1, 2.0).unwrap();
    for points in [1024, 2048] {
        let g = GridSpec::new(1, 64.0, points).unwrap();
        let q = solve_ground_state(GroundStateKind::Critical, &params, g, &SolverOptions::default()).unwrap();
        let c = sharp_gn_constant(&q).unwrap();
        assert!((c.value - exact).abs() < 1e-9 * exact, "{points}: {} vs {exact}", c.value);
        assert!(pohozaev_residual(&q) < 1e-9);
    }
}

#[test]
fn gn_inequality_is_strict_off_the_ground_state() {
    let (_, q) = critical_1d();
    let c = sharp_gn_constant(&q).unwrap().value;
    let g = gaussian(*q.grid(), 1.3, 1.7, [0.0, 0.0]);
    let (lhs, rhs) = gn_sides(&g, 4.0, c);
    assert!(lhs < rhs * (1.0 - 1e-3), "{lhs} vs {rhs}");
}

#[test]
fn pohozaev_flags_scaled_profiles_and_ignores_shifts() {
    let (_, q) = critical_1d();
    let base = pohozaev_residual(&q);
    assert!(base < 1e-10);
    let doubled = q.field.scaled(Complex64::new(2.0, 0.0));
    assert!(pohozaev_residual_field(&doubled, 4.0) > 1.0);
    let moved = q.field.shifted([137, 0]);
    assert!((pohozaev_residual_field(&moved, 4.0) - base).abs() < 1e-12);
}

#[test]
fn coarse_grid_fails_loudly() {
    let params = PhysParams::critical_threshold(1, 2.0).unwrap();
    let g = GridSpec::new(1, 40.0, 16).unwrap();
    let opts = SolverOptions { max_iters: 200, ..Default::default() };
    let err = solve_ground_state(GroundStateKind::Critical, &params, g, &opts).unwrap_err();
    assert!(matches!(err, NlsError::Truncation(_) | NlsError::IterationFailure { .. }), "{err}");
    let fine = GridSpec::new(1, 40.0, 1024).unwrap();
    let q = solve_ground_state(GroundStateKind::Critical, &params, fine, &opts).unwrap();
    assert!(spectral_tail(&q.field) < TAIL_LIMIT);
}

#[test]
fn min_rho_matches_closed_form() {
    let (params, q) = critical_1d();
    // ‖Q‖⁴₄ = 3 and ‖Q'‖² = √3π/4 for the explicit profile.
    let oracle = |c: f64| 6.0 * c * c / ((c.powi(4) - 1.0) * 3f64.sqrt() * PI);
    for c in [1.05, 1.1, 1.5, 3.0] {
        let got = min_rho(&q, Complex64::new(c, 0.0), &params).unwrap();
        assert!((got - oracle(c)).abs() < 1e-9 * oracle(c), "c={c}: {got} vs {}", oracle(c));
    }
    let r1 = min_rho(&q, Complex64::new(1.1, 0.0), &params).unwrap();
    assert!((r1 - 2.874846).abs() < 1e-6);
    // Only the modulus matters.
    let rotated = min_rho(&q, Complex64::from_polar(1.1, 0.7), &params).unwrap();
    assert!((rotated - r1).abs() < 1e-12);
    assert!(min_rho(&q, Complex64::new(1.2, 0.0), &params).unwrap() < r1);
    assert!(min_rho(&q, Complex64::new(1.0, 0.0), &params).is_err());
}

#[test]
fn threshold_energy_changes_sign_at_min_rho() {
    let (params, q) = critical_1d();
    let c = Complex64::new(1.1, 0.0);
    let star = min_rho(&q, c, &params).unwrap();
    assert!(threshold_energy(&q, c, star, &params).abs() < 1e-10);
    for (rho, sign) in [(0.97 * star, 1.0), (1.03 * star, -1.0)] {
        let u = threshold_family(&q, c, rho).unwrap();
        let direct = energy(&u, &params);
        let formula = threshold_energy(&q, c, rho, &params);
        assert!(direct * sign > 0.0, "rho={rho}: E={direct}");
        assert!((direct - formula).abs() < 1e-8 * formula.abs().max(1.0), "{direct} vs {formula}");
    }
}

#[test]
fn threshold_family_preserves_mass() {
    let (_, q) = critical_1d();
    let c = Complex64::new(0.6, 0.8);
    let u = threshold_family(&q, c, 2.0).unwrap();
    assert!((integral_abs_pow(&u, 2.0) - q.mass()).abs() < 1e-10);
    let coarse = GridSpec::new(1, 64.0, 64).unwrap();
    assert!(matches!(threshold_family_on(&q, c, 8.0, &coarse), Err(NlsError::Truncation(_))));
}

#[test]
fn fractional_state_satisfies_equation_under_dense_dft() {
    let params = supercritical();
    let g = GridSpec::new(1, 40.0, 1024).unwrap();
    let q = solve_ground_state(GroundStateKind::FractionalSupercritical, &params, g, &SolverOptions::default())
        .unwrap();
    let s = params.s_c();
    assert!((s - 1.0 / 6.0).abs() < 1e-15);
    let vals: Vec<f64> = q.field.values().iter().map(|z| z.re).collect();
    assert!(q.field.values().iter().all(|z| z.im.abs() < 1e-14));
    let lin = dense_multiplier(&vals, g.extent(), |xi| xi * xi + 3.0 * xi.abs().powf(2.0 * s));
    let nl: Vec<f64> = vals.iter().map(|v| v.abs().powi(6) * v).collect();
    let mean = nl.iter().sum::<f64>() / nl.len() as f64;
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let res = lin.iter().zip(&nl).map(|(l, n)| (l - (n - mean)).abs()).fold(0.0, f64::max) / peak;
    assert!(res < 1e-9, "dense residual {res:.3e}");
    let floor = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(floor.abs() < 1e-14, "minimum {floor}");
}

/// `∫R^k dx = 2∫₀^{R₀} r^k / √(2r³/3 - r⁸/4) dr` for the whole-line
/// solution of `R'' = R² - R⁷`, after `r = R₀(1 - s²)`.
fn mixed_norm_oracle(k: i32) -> f64 {
    let r0 = (8.0f64 / 3.0).powf(0.2);
    let n = 400_000;
    let h = 1.0 / n as f64;
    let sum: f64 = (0..n)
        .map(|i| {
            let s = (i as f64 + 0.5) * h;
            let r = r0 * (1.0 - s * s);
            let f = 2.0 * r.powi(3) / 3.0 - r.powi(8) / 4.0;
            r.powi(k) * 2.0 * r0 * s / f.sqrt()
        })
        .sum();
    2.0 * sum * h
}

#[test]
fn mixed_state_matches_quadrature() {
    let params = supercritical();
    let g = GridSpec::new(1, 40.0, 1024).unwrap();
    let r = solve_ground_state(GroundStateKind::MixedSupercritical, &params, g, &SolverOptions::default()).unwrap();
    let peak = r.field.values()[g.origin_index()].re;
    let r0 = (8.0f64 / 3.0).powf(0.2);
    assert!((peak - r0).abs() < 1e-5, "peak {peak} vs {r0}");
    for k in [3, 8] {
        let got = integral_abs_pow(&r.field, k as f64);
        let want = mixed_norm_oracle(k);
        assert!((got - want).abs() < 1e-4 * want, "k={k}: {got} vs {want}");
    }
}

#[test]
fn kind_checks() {
    let g = GridSpec::new(1, 40.0, 256).unwrap();
    let crit = PhysParams::critical_threshold(1, 2.0).unwrap();
    let opts = SolverOptions::default();
    assert!(solve_ground_state(GroundStateKind::MixedSupercritical, &crit, g, &opts).is_err());
    assert!(solve_ground_state(GroundStateKind::Critical, &supercritical(), g, &opts).is_err());
    let field = Field::zeros(g);
    assert!(GroundState::from_field(GroundStateKind::Critical, supercritical(), field).is_err());
}
