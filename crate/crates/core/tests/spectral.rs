use std::f64::consts::PI;

use nls_core::spectral::*;
use nls_core::window::window_mass;
use nls_core::{Field, GridSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn max_err(a: &Field, b: impl Fn([f64; 2]) -> f64) -> f64 {
    (0..a.grid().len()).map(|k| (a.values()[k] - Complex64::new(b(a.grid().position(k)), 0.0)).norm()).fold(0.0, f64::max)
}

#[test]
fn half_laplacian_of_gaussian_matches_fourier_sum() {
    let extent = 20.0;
    let g = GridSpec::new(1, extent, 128).unwrap();
    let f = Field::from_real_fn(g, |x| (-0.5 * x[0] * x[0]).exp());
    let got = apply_fractional_laplacian(&f, 0.5).unwrap();
    // Fourier series of the periodised Gaussian, coefficients ĝ(ξ_k)/L.
    let oracle = |x: [f64; 2]| {
        (-400..=400)
            .map(|k| {
                let xi = 2.0 * PI * k as f64 / extent;
                xi.abs() * (2.0 * PI).sqrt() * (-0.5 * xi * xi).exp() * (xi * x[0]).cos()
            })
            .sum::<f64>()
            / extent
    };
    let err = max_err(&got, oracle);
    assert!(err < 1e-8, "{err:.3e}");
}

#[test]
fn sech_derivatives_and_norms() {
    let g = GridSpec::new(1, 60.0, 1024).unwrap();
    let sech = |x: f64| 1.0 / x.cosh();
    let f = Field::from_real_fn(g, |x| sech(x[0]));
    let lap = laplacian(&f);
    assert!(max_err(&lap, |x| sech(x[0]) - 2.0 * sech(x[0]).powi(3)) < 1e-11);
    let d = &gradient(&f)[0];
    assert!(max_err(d, |x| -sech(x[0]) * x[0].tanh()) < 1e-11);
    assert!((norm_l2(&f).powi(2) - 2.0).abs() < 1e-12);
    assert!((norm_grad_l2(&f).powi(2) - 2.0 / 3.0).abs() < 1e-12);
    assert!((norm_hdot(&f, 1.0).unwrap() - norm_grad_l2(&f)).abs() < 1e-12);
    assert_eq!(norm_hdot(&f, 0.0).unwrap(), norm_l2(&f));
    // ∫sech⁴ = 4/3.
    assert!((norm_lp(&f, 4.0).unwrap().powi(4) - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn two_dimensional_laplacian() {
    let g = GridSpec::new(2, 16.0, 64).unwrap();
    let f = Field::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
    let err = max_err(&laplacian(&f), |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        (4.0 * r2 - 4.0) * (-r2).exp()
    });
    assert!(err < 1e-9, "{err:.3e}");
}

#[test]
fn negative_orders_rejected() {
    let g = GridSpec::new(1, 10.0, 16).unwrap();
    let f = Field::zeros(g);
    assert!(apply_fractional_laplacian(&f, -0.1).is_err());
    assert!(norm_hdot(&f, f64::NAN).is_err());
    assert!(norm_lp(&f, 0.5).is_err());
}

fn field_from(re: Vec<f64>, im: Vec<f64>, dim: usize, points: usize) -> Field {
    let g = GridSpec::new(dim, 8.0, points).unwrap();
    let vals = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    Field::new(g, vals, 0.0).unwrap()
}

fn arb_field() -> impl Strategy<Value = Field> {
    prop_oneof![Just((1usize, 32usize)), Just((2usize, 16usize))].prop_flat_map(|(dim, n)| {
        let len = n.pow(dim as u32);
        (prop::collection::vec(-2.0..2.0f64, len), prop::collection::vec(-2.0..2.0f64, len))
            .prop_map(move |(re, im)| field_from(re, im, dim, n))
    })
}

proptest! {
    #[test]
    fn parseval(f in arb_field()) {
        let g = *f.grid();
        let mut spec = f.values().to_vec();
        forward_in_place(&g, &mut spec);
        let physical: f64 = f.values().iter().map(|z| z.norm_sqr()).sum();
        let fourier: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / g.len() as f64;
        prop_assert!((physical - fourier).abs() <= 1e-12 * physical.max(1.0));
    }

    #[test]
    fn round_trip(f in arb_field()) {
        let back = fft_inverse(&fft_forward(&f).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn fractional_powers_compose(f in arb_field(), s in 0.0..1.5f64, t in 0.0..1.5f64) {
        let lhs = apply_fractional_laplacian(&apply_fractional_laplacian(&f, s).unwrap(), t).unwrap();
        let rhs = apply_fractional_laplacian(&f, s + t).unwrap();
        let scale = rhs.max_abs().max(1.0);
        for (a, b) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((a - b).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn window_mass_is_monotone_in_radius(f in arb_field(), r in 0.05..2.0f64, dr in 0.0..2.0f64) {
        let small = window_mass(&f, r).unwrap().mass;
        let large = window_mass(&f, r + dr).unwrap().mass;
        let total = norm_l2(&f).powi(2);
        prop_assert!(small <= large * (1.0 + 1e-12));
        prop_assert!(large <= total * (1.0 + 1e-12));
    }
}
