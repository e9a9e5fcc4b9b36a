use std::f64::consts::PI;
use std::sync::Arc;

use okms::elliptic::{
    dirichlet_energy, hminus1_inner, hminus1_norm_sq, laplacian_apply, neumann_poisson_solve,
};
use okms::{field_mean, quadrature_integral, BoxGrid, Grid, RadialGrid, ScalarField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random mean-zero combination of low cosine modes on `[0, lx] x [0, ly]`.
fn cosine_field(g: Arc<Grid>, lengths: [f64; 2], amps: &[f64]) -> ScalarField {
    ScalarField::from_fn(g, move |x| {
        let y = x.get(1).copied().unwrap_or(0.0);
        amps.iter()
            .enumerate()
            .map(|(m, a)| {
                let (kx, ky) = ((m % 3) as f64, (m / 3) as f64);
                if m == 0 {
                    0.0
                } else {
                    a * (kx * PI * x[0] / lengths[0]).cos() * (ky * PI * y / lengths[1]).cos()
                }
            })
            .sum()
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn box_poisson_inverts_the_laplacian(
        lx in 0.5f64..3.0,
        ly in 0.5f64..3.0,
        nx in 8usize..40,
        ny in 8usize..40,
        amps in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let g: Arc<Grid> = Arc::new(BoxGrid::new(vec![lx, ly], vec![nx, ny]).unwrap().into());
        let f = cosine_field(g, [lx, ly], &amps);
        let v = neumann_poisson_solve(&f).unwrap();
        prop_assert!(field_mean(&v).unwrap().abs() < 1e-12);
        let back = laplacian_apply(&v).unwrap();
        let scale = f.max_abs().max(1e-12);
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a + b).abs() <= 1e-9 * scale);
        }
        let n2 = hminus1_norm_sq(&f).unwrap();
        prop_assert!(n2 >= 0.0);
        prop_assert!((n2 - hminus1_inner(&f, &f).unwrap()).abs() <= 1e-10 * n2.max(1e-14));
        prop_assert!((n2 - dirichlet_energy(&v).unwrap()).abs() <= 1e-10 * n2.max(1e-14));
    }

    #[test]
    fn box_hminus1_inner_is_symmetric(
        a in prop::collection::vec(-1.0f64..1.0, 9),
        b in prop::collection::vec(-1.0f64..1.0, 9),
        n in 8usize..48,
    ) {
        let g: Arc<Grid> = Arc::new(BoxGrid::new(vec![1.0, 2.0], vec![n, n + 3]).unwrap().into());
        let f = cosine_field(g.clone(), [1.0, 2.0], &a);
        let h = cosine_field(g, [1.0, 2.0], &b);
        let fh = hminus1_inner(&f, &h).unwrap();
        let hf = hminus1_inner(&h, &f).unwrap();
        prop_assert!((fh - hf).abs() <= 1e-10 * (1.0 + fh.abs()));
        // Cauchy-Schwarz
        let bound = (hminus1_norm_sq(&f).unwrap() * hminus1_norm_sq(&h).unwrap()).sqrt();
        prop_assert!(fh.abs() <= bound * (1.0 + 1e-10) + 1e-14);
    }
}

#[test]
fn radial_poisson_inverts_the_discrete_laplacian() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for dim in [2, 3, 4] {
        let g: Arc<Grid> = Arc::new(RadialGrid::new(dim, 301).unwrap().into());
        let raw: Vec<f64> = (0..301).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = ScalarField::new(g, raw).unwrap();
        let f = f.shifted(-field_mean(&f).unwrap());
        let v = neumann_poisson_solve(&f).unwrap();
        let back = laplacian_apply(&v).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a + b).abs() < 1e-8, "dim {dim}: {a} vs {b}");
        }
        let n2 = hminus1_norm_sq(&f).unwrap();
        assert!(rel(n2, dirichlet_energy(&v).unwrap()) < 1e-10);
        assert!(rel(n2, hminus1_inner(&f, &f).unwrap()) < 1e-10);
    }
}

#[test]
fn radial_quadrature_of_powers() {
    // ∫_B |x|^2 = ω_N / (N + 2)
    for (dim, omega) in [(2, 2.0 * PI), (3, 4.0 * PI)] {
        let g: Arc<Grid> = Arc::new(RadialGrid::new(dim, 801).unwrap().into());
        let f = ScalarField::from_fn(g, |x| x[0] * x[0]);
        let exact = omega / (dim as f64 + 2.0);
        assert!(rel(quadrature_integral(&f).unwrap(), exact) < 1e-5);
    }
}

#[test]
fn mean_of_a_tanh_layer() {
    // ∫_0^1 tanh((x - a)/ε) dx = ε ln(cosh((1-a)/ε) / cosh(a/ε)) ≈ 1 - 2a
    let (a, eps) = (0.3f64, 0.02f64);
    let exact = eps * (((1.0 - a) / eps).cosh() / (a / eps).cosh()).ln();
    let g: Arc<Grid> = Arc::new(BoxGrid::unit_interval(2000).unwrap().into());
    let u = ScalarField::from_fn(g, |x| ((x[0] - a) / eps).tanh());
    assert!((field_mean(&u).unwrap() - exact).abs() < 1e-6);
}
