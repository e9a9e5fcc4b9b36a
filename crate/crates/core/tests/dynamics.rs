use std::f64::consts::PI;
use std::sync::Arc;

use okms::dynamics::{ok_step_box, ok_step_radial, run_ok, OkState, RunOptions};
use okms::elliptic::laplacian_apply;
use okms::phasefield::{double_well_prime, extract_interface, layered_profile, InterfaceSpec};
use okms::{field_mean, l2_norm, BoxGrid, Grid, RadialGrid, ScalarField, SimParams};

fn unit_line(cells: usize) -> Arc<Grid> {
    Arc::new(BoxGrid::unit_interval(cells).unwrap().into())
}

fn smooth_2d() -> ScalarField {
    let g: Arc<Grid> = Arc::new(BoxGrid::new(vec![1.0, 1.0], vec![32, 32]).unwrap().into());
    ScalarField::from_fn(g, |x| {
        0.2 + 0.3 * (PI * x[0]).cos() * (2.0 * PI * x[1]).cos() + 0.1 * (3.0 * PI * x[1]).cos()
    })
}

#[test]
fn constant_state_is_a_fixed_point() {
    let p = SimParams::new(0.05, 2.0, 1.0).unwrap();
    let g: Arc<Grid> = Arc::new(BoxGrid::new(vec![1.0, 2.0], vec![16, 16]).unwrap().into());
    let mut s = OkState::new(ScalarField::constant(g, 0.3), p).unwrap();
    for _ in 0..10 {
        s = ok_step_box(s).unwrap();
    }
    assert!(s.u.values().iter().all(|v| (v - 0.3).abs() < 1e-13));

    let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 128).unwrap().into());
    let mut s = OkState::new(ScalarField::constant(g, -0.4), p).unwrap();
    for _ in 0..10 {
        s = ok_step_radial(s).unwrap();
    }
    assert!(s.u.values().iter().all(|v| (v + 0.4).abs() < 1e-13));
}

#[test]
fn steppers_reject_the_other_domain() {
    let p = SimParams::new(0.05, 0.0, 1.0).unwrap();
    let s = OkState::new(ScalarField::constant(unit_line(16), 0.0), p).unwrap();
    assert!(ok_step_radial(s).is_err());
}

#[test]
fn box_mass_is_exact_over_ten_thousand_steps() {
    let u = smooth_2d();
    let m0 = field_mean(&u).unwrap();
    let p = SimParams::new(0.1, 1.0, 1.0).unwrap();
    let mut s = OkState::new(u, p).unwrap();
    for _ in 0..10_000 {
        s.step().unwrap();
    }
    let drift = (field_mean(&s.u).unwrap() - m0).abs();
    assert!(drift <= 1e-12, "{drift:e}");
}

#[test]
fn radial_mass_drift_is_round_off() {
    let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 201).unwrap().into());
    let spec = InterfaceSpec::new(vec![0.4, 0.7], -1.0).unwrap();
    let u = layered_profile(g, &spec, 0.04);
    let m0 = field_mean(&u).unwrap();
    let p = SimParams::new(0.04, 1.0, 1.0).unwrap();
    let mut s = OkState::new(u, p).unwrap();
    for _ in 0..10_000 {
        s.step().unwrap();
    }
    let drift = (field_mean(&s.u).unwrap() - m0).abs();
    assert!(drift <= 1e-8, "{drift:e}");
}

#[test]
fn tiny_step_matches_explicit_euler() {
    let u = ScalarField::from_fn(unit_line(64), |x| 0.1 + 0.2 * (PI * x[0]).cos());
    let p = SimParams::new(0.1, 1.0, 1.0).unwrap();
    let dt = 1e-9;
    let eps = p.eps;
    // semi-discrete right-hand side -εΔ²u + Δ(f(u)/ε) - λ(u - ū)
    let lap = laplacian_apply(&u).unwrap();
    let bilap = laplacian_apply(&lap).unwrap();
    let fu = u.map(|x| double_well_prime(x) / eps);
    let lapf = laplacian_apply(&fu).unwrap();
    let ubar = field_mean(&u).unwrap();
    let euler: Vec<f64> = (0..u.len())
        .map(|i| {
            let v = u.values()[i];
            v + dt * (-eps * bilap.values()[i] + lapf.values()[i] - p.lambda * (v - ubar))
        })
        .collect();
    let mut s = OkState::with_dt(u.clone(), p, dt).unwrap();
    s.step().unwrap();
    let diff = s
        .u
        .values()
        .iter()
        .zip(&euler)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = u.max_abs();
    assert!(diff / scale <= 1e-12, "{:e}", diff / scale);
}

#[test]
fn zero_step_run_records_initial_state() {
    let u = layered_profile(unit_line(256), &InterfaceSpec::new(vec![0.5], -1.0).unwrap(), 0.03);
    let mut p = SimParams::new(0.03, 0.0, 1.0).unwrap();
    p.t_end = 0.0;
    let run = run_ok(u, &p, &RunOptions::default()).unwrap();
    assert_eq!(run.record.len(), 1);
    assert_eq!(run.record.times, vec![0.0]);
    assert_eq!(run.final_state.steps(), 0);
}

#[test]
fn energy_decreases_at_every_step_in_1d() {
    let eps = 0.02;
    let spec = InterfaceSpec::new(vec![0.3, 0.62], 1.0).unwrap();
    let u = layered_profile(unit_line(256), &spec, eps);
    let p = SimParams::new(eps, 0.0, 2e-3).unwrap();
    let run = run_ok(u, &p, &RunOptions { record_every: 20, ..Default::default() }).unwrap();
    assert!(run.monitor.max_increase <= 1e-10, "{:e}", run.monitor.max_increase);
    let e = &run.record.energy_total;
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-10));
}

/// Relative gap `|E(0) - E(T) - Σ dt ∫|∇w|²| / E(0)` of a 1D run with two interfaces
/// driven by the nonlocal term.
fn dissipation_gap(dt: f64) -> f64 {
    let eps = 0.02;
    let spec = InterfaceSpec::new(vec![0.3, 0.55], -1.0).unwrap();
    let u = layered_profile(unit_line(256), &spec, eps);
    let p = SimParams::new(eps, 5.0, 1e-2).unwrap().with_dt(dt);
    let run = run_ok(u, &p, &RunOptions { record_every: 100_000, ..Default::default() }).unwrap();
    assert!(run.monitor.max_increase <= 1e-10);
    let e = &run.record.energy_total;
    let drop = e[0] - e[e.len() - 1];
    (drop - run.monitor.cumulative_dissipation).abs() / e[0]
}

#[test]
fn dissipation_identity_and_first_order_gap() {
    let dt = SimParams::new(0.02, 5.0, 1.0).unwrap().dt;
    let g1 = dissipation_gap(dt);
    let g2 = dissipation_gap(dt / 2.0);
    assert!(g1 <= 0.05, "gap {g1}");
    assert!(g1 / g2 >= 1.6, "{g1} / {g2}");
}

#[test]
fn slab_and_box_agree_in_one_dimension() {
    let eps = 0.04;
    let spec = InterfaceSpec::new(vec![0.3, 0.55], -1.0).unwrap();
    let p = SimParams::new(eps, 20.0, 0.02).unwrap();
    let opts = RunOptions { record_every: 50, ..Default::default() };
    let bx = layered_profile(unit_line(400), &spec, eps);
    let slab: Arc<Grid> = Arc::new(RadialGrid::slab(401).unwrap().into());
    let sl = layered_profile(slab, &spec, eps);
    let a = run_ok(bx, &p, &opts).unwrap();
    let b = run_ok(sl, &p, &opts).unwrap();
    let ra = a.record.interface_radii.unwrap();
    let rb = b.record.interface_radii.unwrap();
    let moved = (ra[ra.len() - 1][0] - 0.3).abs() + (ra[ra.len() - 1][1] - 0.55).abs();
    let mut worst: f64 = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(y) {
            worst = worst.max((p - q).abs());
        }
    }
    assert!(worst <= 1e-3, "max radius mismatch {worst:e} (interfaces moved {moved:e})");
    let fa = extract_interface(&a.final_state.u).unwrap();
    assert_eq!(fa.len(), 2);
}

#[test]
fn divergence_persists_partial_record() {
    let dir = tempfile::tempdir().unwrap();
    let spec = InterfaceSpec::new(vec![0.5], -1.0).unwrap();
    let u = layered_profile(unit_line(64), &spec, 0.05).scaled(1.5);
    let p = SimParams::new(0.05, 0.0, 1.0)
        .unwrap()
        .with_dt(1e-1)
        .with_stabilization(0.0);
    let opts = RunOptions {
        record_every: 1,
        output_dir: Some(dir.path().to_path_buf()),
        stem: "blowup".into(),
        ..Default::default()
    };
    let err = run_ok(u, &p, &opts).unwrap_err();
    assert!(matches!(err, okms::Error::Divergence { .. }), "{err}");
    assert!(dir.path().join("blowup_partial.csv").exists());
    assert!(dir.path().join("blowup_partial.json").exists());
    let _ = l2_norm;
}
