//! The full acceptance suite: exact constants, conservation and dissipation checks,
//! the sharp-interface oracle, and the ε-sweeps.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::checks::*;
use super::{run_sweep, CheckReport, SweepPlan};
use crate::dynamics::{run_ok, OkRun, RunOptions};
use crate::error::{Error, Result};
use crate::field::{field_mean, ScalarField};
use crate::grid::{BoxGrid, Grid, RadialGrid};
use crate::params::SimParams;
use crate::phasefield::{diffuse_energy, layered_profile, sigma_by_quadrature, InterfaceSpec, SIGMA};
use crate::sharp::{run_ms, sphere_velocities, MsOptions, SphereFamily};

/// Settings of `check_all`. The defaults are the acceptance configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub eps_list: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub radii: Vec<f64>,
    pub innermost_phase: f64,
    pub space_dim: usize,
    pub t_end: f64,
    pub nodes_per_eps: f64,
    pub dt_factor: f64,
    pub intervals: usize,
    /// The negative control folds three interfaces `±offset·ε` around this radius.
    pub folded_center: f64,
    pub folded_offset: f64,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            eps_list: vec![0.08, 0.04, 0.02, 0.01],
            lambdas: vec![0.0, 1.0],
            radii: vec![0.4, 0.7],
            innermost_phase: -1.0,
            space_dim: 3,
            t_end: 0.005,
            nodes_per_eps: 8.0,
            dt_factor: 0.03,
            intervals: 64,
            folded_center: 0.5,
            folded_offset: 2.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    pub fn family(&self) -> Result<SphereFamily> {
        SphereFamily::new(self.radii.clone(), self.innermost_phase, self.space_dim)
    }

    pub fn plan(&self, lambda: f64) -> Result<SweepPlan> {
        let mut plan = SweepPlan::new(
            &format!("sweep_lambda{lambda}"),
            self.family()?,
            lambda,
            self.eps_list.clone(),
            self.t_end,
        );
        plan.nodes_per_eps = self.nodes_per_eps;
        plan.dt_factor = self.dt_factor;
        plan.intervals = self.intervals;
        Ok(plan)
    }

    /// One sharp sphere; each diffuse run starts with three interfaces `offset·ε` apart.
    pub fn folded_plans(&self) -> Result<Vec<SweepPlan>> {
        let family = SphereFamily::new(vec![self.folded_center], self.innermost_phase, self.space_dim)?;
        self.eps_list
            .iter()
            .map(|&eps| {
                let d = self.folded_offset * eps;
                let mut plan = SweepPlan::new("folded_control", family.clone(), 0.0, vec![eps], self.t_end);
                plan.diffuse_interfaces = Some(vec![self.folded_center - d, self.folded_center, self.folded_center + d]);
                plan.nodes_per_eps = self.nodes_per_eps;
                plan.dt_factor = self.dt_factor;
                plan.intervals = self.intervals;
                Ok(plan)
            })
            .collect()
    }
}

/// Written as `report.json`; read back only through its `checks`.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
    pub sweeps: BTreeMap<String, Vec<Measurements>>,
    pub config: SuiteConfig,
    pub wall_time_s: f64,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub fn sigma_check() -> CheckReport {
    let mut r = CheckReport::new("sigma", "int_{-1}^{1} sqrt(W/2) = 2/3 +- 1e-8");
    let s = sigma_by_quadrature(64);
    r.scalar("sigma", s).tolerance("abs", 1e-8);
    r.passed = (s - 2.0 / 3.0).abs() <= 1e-8;
    r
}

pub fn heteroclinic_check() -> Result<CheckReport> {
    let mut r = CheckReport::new("heteroclinic", "1D tanh profile, eps = 0.01, lambda = 0: E = 4/3 +- 1e-4");
    let eps = 0.01;
    let grid: Arc<Grid> = Arc::new(BoxGrid::unit_interval(4000)?.into());
    let u = layered_profile(grid, &InterfaceSpec::new(vec![0.5], -1.0)?, eps);
    let e = diffuse_energy(&u, &SimParams::new(eps, 0.0, 1.0)?)?.total;
    r.scalar("energy", e).scalar("two_sigma", 2.0 * SIGMA).tolerance("abs", 1e-4);
    r.passed = (e - 4.0 / 3.0).abs() <= 1e-4;
    Ok(r)
}

fn quiet_run(u: ScalarField, params: &SimParams) -> Result<OkRun> {
    run_ok(
        u,
        params,
        &RunOptions {
            record_every: usize::MAX,
            ..Default::default()
        },
    )
}

/// Returns the report and the largest per-step energy increase of its runs.
pub fn mass_check() -> Result<(CheckReport, f64)> {
    let mut r = CheckReport::new(
        "mass_conservation",
        "10^4 steps: box |mass drift| <= 1e-12, radial <= 1e-8",
    );
    let g: Arc<Grid> = Arc::new(BoxGrid::new(vec![1.0, 1.0], vec![32, 32])?.into());
    let u = ScalarField::from_fn(g, |x| {
        0.2 + 0.3 * (PI * x[0]).cos() * (2.0 * PI * x[1]).cos() + 0.1 * (3.0 * PI * x[1]).cos()
    });
    let p = SimParams::new(0.1, 1.0, 1.0)?;
    let p = SimParams { t_end: 1e4 * p.dt, ..p };
    let m0 = field_mean(&u)?;
    let run = quiet_run(u, &p)?;
    let box_drift = (field_mean(&run.final_state.u)? - m0).abs();

    let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 201)?.into());
    let u = layered_profile(g, &InterfaceSpec::new(vec![0.4, 0.7], -1.0)?, 0.04);
    let q = SimParams::new(0.04, 1.0, 1.0)?;
    let q = SimParams { t_end: 1e4 * q.dt, ..q };
    let m0 = field_mean(&u)?;
    let radial = quiet_run(u, &q)?;
    let radial_drift = (field_mean(&radial.final_state.u)? - m0).abs();

    r.scalar("box_drift", box_drift)
        .scalar("radial_drift", radial_drift)
        .scalar("box_steps", run.final_state.steps() as f64)
        .scalar("radial_steps", radial.final_state.steps() as f64)
        .tolerance("box", 1e-12)
        .tolerance("radial", 1e-8);
    r.passed = box_drift <= 1e-12
        && radial_drift <= 1e-8
        && run.final_state.steps() == 10_000
        && radial.final_state.steps() == 10_000;
    Ok((r, run.monitor.max_increase.max(radial.monitor.max_increase)))
}

/// `|E(0) - E(T) - Σ dt ∫|∇w|²| / E(0)` for a 1D run with two interfaces driven by
/// the nonlocal term, and the run's largest per-step energy increase.
fn dissipation_gap(dt: f64) -> Result<(f64, f64)> {
    let eps = 0.02;
    let grid: Arc<Grid> = Arc::new(BoxGrid::unit_interval(256)?.into());
    let u = layered_profile(grid, &InterfaceSpec::new(vec![0.3, 0.55], -1.0)?, eps);
    let p = SimParams::new(eps, 5.0, 1e-2)?.with_dt(dt);
    let run = quiet_run(u, &p)?;
    let e = &run.record.energy_total;
    let drop = e[0] - e[e.len() - 1];
    Ok(((drop - run.monitor.cumulative_dissipation).abs() / e[0], run.monitor.max_increase))
}

/// `other_increase` is the largest per-step energy increase over all other runs of the suite.
pub fn dissipation_check(other_increase: f64, tol: &Tolerances) -> Result<CheckReport> {
    let mut r = CheckReport::new(
        "energy_dissipation",
        "E non-increasing at every step of every run (slack 1e-10); identity gap <= 5% at default dt; gap ratio >= 1.6 when dt halves",
    );
    let dt = SimParams::new(0.02, 5.0, 1.0)?.dt;
    let (g1, i1) = dissipation_gap(dt)?;
    let (g2, i2) = dissipation_gap(0.5 * dt)?;
    let increase = other_increase.max(i1).max(i2);
    r.scalar("gap_default_dt", g1)
        .scalar("gap_half_dt", g2)
        .scalar("gap_ratio", g1 / g2)
        .scalar("max_energy_increase", increase)
        .tolerance("increase", tol.energy_increase)
        .tolerance("gap", 0.05)
        .tolerance("ratio", 1.6);
    r.passed = increase <= tol.energy_increase && g1 <= 0.05 && g1 / g2 >= 1.6;
    Ok(r)
}

/// Radial rates of two spheres in 3D with `λ = 0`, solved by hand: `w` is constant
/// inside and outside, `A + B ψ` in between with `ψ = -1/r`.
fn two_sphere_rates(r1: f64, r2: f64) -> (f64, f64) {
    let g1 = SIGMA * 2.0 / r1;
    let g2 = -SIGMA * 2.0 / r2;
    let b = (g1 - g2) / (-1.0 / r1 + 1.0 / r2);
    (0.5 * b / (r1 * r1), -0.5 * (-b / (r2 * r2)))
}

pub fn sharp_oracle_check() -> Result<CheckReport> {
    let mut r = CheckReport::new(
        "sharp_oracle",
        "two spheres (0.4, 0.7), N = 3, lambda = 0: rates = closed form +- 1e-6 (and -15.278, -4.9886 to printed digits); volume drift <= 1e-6 |Omega|; RK4 order >= 3.5",
    );
    let family = SphereFamily::new(vec![0.4, 0.7], -1.0, 3)?;
    let vel = sphere_velocities(&family, 0.0)?;
    let (c1, c2) = two_sphere_rates(0.4, 0.7);
    let closed = (vel.radial[0] - c1).abs().max((vel.radial[1] - c2).abs());
    let printed = (vel.radial[0] + 15.278).abs() <= 5e-4 && (vel.radial[1] + 4.9886).abs() <= 1e-4;

    let run = run_ms(&family, &MsOptions::new(0.0, 0.005))?;
    let v0 = family.volume_plus();
    let drift = (run.final_family.volume_plus() - v0).abs();
    let omega = 4.0 * PI / 3.0;

    let t = 0.004;
    let radius = |dt: f64| -> Result<f64> {
        let mut o = MsOptions::new(0.0, t);
        o.dt = Some(dt);
        o.record_times = vec![0.0, t];
        Ok(run_ms(&family, &o)?.final_family.radii()[0])
    };
    let (a, b, c) = (radius(2e-4)?, radius(1e-4)?, radius(5e-5)?);
    let order = ((a - b) / (b - c)).abs().log2();

    r.scalar("rate_1", vel.radial[0])
        .scalar("rate_2", vel.radial[1])
        .scalar("closed_form_error", closed)
        .scalar("volume_drift", drift)
        .scalar("rk4_order", order)
        .tolerance("closed_form", 1e-6)
        .tolerance("volume_drift", 1e-6 * omega)
        .tolerance("order", 3.5);
    r.passed = closed <= 1e-6 && printed && drift <= 1e-6 * omega && order >= 3.5;
    Ok(r)
}

fn measure_sweep(plan: &SweepPlan, out: Option<&Path>, full: bool) -> Result<Vec<Measurements>> {
    let runs = run_sweep(plan, out)?;
    Ok(runs
        .into_iter()
        .zip(&plan.eps_list)
        .map(|(run, &eps)| {
            let m = run.and_then(|run| if full { measure(&run) } else { measure_basic(&run) });
            m.unwrap_or_else(|e| Measurements::failed(eps, plan.lambda, e.to_string()))
        })
        .collect())
}

/// Runs everything and writes `<out>/report.json` if `out` is given.
pub fn check_all(cfg: &SuiteConfig, out: Option<&Path>) -> Result<SuiteReport> {
    let started = Instant::now();
    let tol = &cfg.tolerances;
    let mut checks = vec![sigma_check(), heteroclinic_check()?];
    let (mass, mut increase) = mass_check()?;
    checks.push(mass);
    checks.push(sharp_oracle_check()?);

    let mut sweeps = BTreeMap::new();
    let mut folded = Vec::new();
    for plan in cfg.folded_plans()? {
        folded.extend(measure_sweep(&plan, out, false)?);
    }
    for &lambda in &cfg.lambdas {
        let plan = cfg.plan(lambda)?;
        let ms = measure_sweep(&plan, out, true)?;
        increase = increase.max(monotonicity_summary(&ms));
        let tag = |mut c: CheckReport| {
            c.name = format!("{}[lambda={lambda}]", c.name);
            c
        };
        checks.push(tag(convergence_check(&ms, tol)));
        checks.push(tag(well_preparedness_check(&ms, &folded, tol)));
        checks.push(tag(equipartition_check(&ms)));
        checks.push(tag(holder_check(&ms, tol)));
        checks.push(tag(de_giorgi_check(&ms, tol)));
        checks.push(tag(gibbs_thomson_check(&ms, tol)));
        checks.push(tag(velocity_bound_check(&ms, tol)));
        checks.push(tag(transport_check(&ms, tol)));
        checks.push(tag(deformation_check(&ms, tol)));
        sweeps.insert(plan.experiment.clone(), ms);
    }
    increase = increase.max(monotonicity_summary(&folded));
    sweeps.insert("folded_control".into(), folded);
    checks.insert(4, dissipation_check(increase, tol)?);

    let report = SuiteReport {
        checks,
        sweeps,
        config: cfg.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out {
        report.write(&dir.join("report.json"))?;
    }
    if report.checks.is_empty() {
        return Err(Error::Structural("no checks ran".into()));
    }
    Ok(report)
}
