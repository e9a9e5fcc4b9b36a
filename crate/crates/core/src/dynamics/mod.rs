//! Time integration of the Ohta–Kawasaki flow with energy and mass bookkeeping.

mod stepper;

pub use stepper::{BoxStepper, RadialStepper};

use std::path::PathBuf;

use crate::elliptic::hminus1_norm_sq_unchecked;
use crate::error::{Error, Result};
use crate::field::{field_mean, ScalarField};
use crate::grid::Grid;
use crate::params::SimParams;
use crate::phasefield::{
    chemical_potential, diffuse_energy, discrepancy_l1, dissipation_rate, extract_interface,
    write_snapshot, EnergyBreakdown,
};
use crate::record::{RecordKind, RecordRow, RunMetadata, RunRecord};

#[derive(Debug, Clone)]
enum Stepper {
    Box(BoxStepper),
    Radial(RadialStepper),
}

/// The diffuse state `u(·, t)` together with its factorized implicit operator.
#[derive(Debug, Clone)]
pub struct OkState {
    pub u: ScalarField,
    pub t: f64,
    pub params: SimParams,
    steps: usize,
    stepper: Stepper,
}

impl OkState {
    /// Builds the stepper for `params.dt`.
    pub fn new(u: ScalarField, params: SimParams) -> Result<Self> {
        Self::with_dt(u, params, params.dt)
    }

    pub fn with_dt(u: ScalarField, params: SimParams, dt: f64) -> Result<Self> {
        params.validate()?;
        u.validate()?;
        if !(dt > 0.0) {
            return Err(Error::param("params.dt", "must be positive"));
        }
        let stepper = match u.grid().as_ref() {
            Grid::Box(b) => Stepper::Box(BoxStepper::new(b, &params, dt)?),
            Grid::Radial(r) => Stepper::Radial(RadialStepper::new(r, &params, dt)?),
        };
        Ok(OkState {
            u,
            t: 0.0,
            params,
            steps: 0,
            stepper,
        })
    }

    pub fn dt(&self) -> f64 {
        match &self.stepper {
            Stepper::Box(s) => s.dt(),
            Stepper::Radial(s) => s.dt(),
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&mut self) -> Result<()> {
        let n = self.steps + 1;
        let params = self.params;
        match &self.stepper {
            Stepper::Box(s) => s.step(self.u.values_mut(), &params, n)?,
            Stepper::Radial(s) => s.step(self.u.values_mut(), &params, n)?,
        }
        self.steps = n;
        self.t += self.dt();
        Ok(())
    }
}

pub fn ok_step_box(mut state: OkState) -> Result<OkState> {
    if !matches!(state.stepper, Stepper::Box(_)) {
        return Err(Error::UnsupportedDomain { op: "ok_step_box", domain: "radial" });
    }
    state.step()?;
    Ok(state)
}

pub fn ok_step_radial(mut state: OkState) -> Result<OkState> {
    if !matches!(state.stepper, Stepper::Radial(_)) {
        return Err(Error::UnsupportedDomain { op: "ok_step_radial", domain: "box" });
    }
    state.step()?;
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Record every this many steps (the final state is always recorded).
    pub record_every: usize,
    /// Keep a copy of `u` at each record.
    pub keep_fields: bool,
    /// Write snapshots every this many records into `output_dir`.
    pub snapshot_every: Option<usize>,
    /// Where to persist the record (and snapshots); also used for partial records on error.
    pub output_dir: Option<PathBuf>,
    pub stem: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            record_every: 100,
            keep_fields: false,
            snapshot_every: None,
            output_dir: None,
            stem: "ok_run".into(),
        }
    }
}

/// Energy bookkeeping, evaluated after every step.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnergyMonitor {
    pub steps_checked: usize,
    /// Largest `E(u^{n+1}) - E(u^n)` seen.
    pub max_increase: f64,
    /// `Σ dt ∫|∇w(u^n)|²` with the variational chemical potential (left-point rule).
    pub cumulative_dissipation: f64,
    /// `Σ ‖u^{n+1} - u^n‖²_{H⁻¹} / dt = Σ dt ∫|∇w̃^{n+1}|²`, with `w̃` the chemical
    /// potential of the scheme itself (implicit/explicit split, stabilization included).
    pub scheme_dissipation: f64,
}

#[derive(Debug, Clone)]
pub struct OkRun {
    pub record: RunRecord,
    pub fields: Vec<ScalarField>,
    pub final_state: OkState,
    pub monitor: EnergyMonitor,
    pub initial_mass: f64,
}

struct Diagnostics {
    energy: EnergyBreakdown,
    dissipation: f64,
}

fn diagnose(u: &ScalarField, params: &SimParams) -> Result<Diagnostics> {
    let energy = diffuse_energy(u, params)?;
    let mu = chemical_potential(u, params)?;
    Ok(Diagnostics {
        energy,
        dissipation: dissipation_rate(&mu.w)?,
    })
}

fn record_row(
    u: &ScalarField,
    t: f64,
    params: &SimParams,
    d: &Diagnostics,
    monitor: &EnergyMonitor,
) -> Result<RecordRow> {
    let radii = if u.grid().is_one_dimensional() {
        Some(extract_interface(u)?.radii)
    } else {
        None
    };
    Ok(RecordRow {
        time: t,
        energy_total: d.energy.total,
        energy_ac: d.energy.ac_part,
        energy_nonlocal: d.energy.nonlocal_part,
        mass: field_mean(u)?,
        dissipation: d.dissipation,
        radii,
        extra: vec![
            ("discrepancy", discrepancy_l1(u, params.eps)?),
            ("cumulative_dissipation", monitor.cumulative_dissipation),
            ("scheme_dissipation", monitor.scheme_dissipation),
        ],
    })
}

/// Number of steps and the step size that lands exactly on `t_end`.
pub fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    if t_end <= 0.0 {
        return (0, dt);
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

pub fn metadata(params: &SimParams, grid: &Grid, wall: f64) -> RunMetadata {
    RunMetadata::new(
        RecordKind::Diffuse,
        serde_json::to_value(params).unwrap_or_default(),
        grid.descriptor(),
        wall,
    )
}

fn save_partial(
    record: &RunRecord,
    params: &SimParams,
    state: &OkState,
    opts: &RunOptions,
    started: std::time::Instant,
) -> Result<()> {
    if let Some(dir) = &opts.output_dir {
        let mut meta = metadata(params, state.u.grid(), started.elapsed().as_secs_f64());
        meta.notes.push(format!("partial record: run failed after step {}", state.steps()));
        record.persist(dir, &format!("{}_partial", opts.stem), &meta)?;
    }
    Ok(())
}

/// Integrates from `initial` to `params.t_end`.
pub fn run_ok(initial: ScalarField, params: &SimParams, opts: &RunOptions) -> Result<OkRun> {
    let started = std::time::Instant::now();
    let (n_steps, dt) = step_plan(params.t_end, params.dt);
    let initial_mass = field_mean(&initial)?;
    let mut state = OkState::with_dt(initial, *params, dt)?;
    let mut record = RunRecord::new(RecordKind::Diffuse);
    let mut fields = Vec::new();
    let mut monitor = EnergyMonitor::default();
    let every = opts.record_every.max(1);

    let mut current = diagnose(&state.u, params)?;
    record.push(record_row(&state.u, 0.0, params, &current, &monitor)?)?;
    if opts.keep_fields {
        fields.push(state.u.clone());
    }
    let mut records = 1usize;
    let write_snap = |u: &ScalarField, t: f64, idx: usize| -> Result<()> {
        if let (Some(k), Some(dir)) = (opts.snapshot_every, &opts.output_dir) {
            if idx % k.max(1) == 0 {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}_snap_{idx:05}.bin", opts.stem));
                write_snapshot(&path, u, t, Some(params))?;
            }
        }
        Ok(())
    };
    write_snap(&state.u, 0.0, 0)?;

    for n in 1..=n_steps {
        let rate = current.dissipation;
        let previous = state.u.clone();
        let next = match state.step().and_then(|_| diagnose(&state.u, params)) {
            Ok(d) => d,
            Err(e) => {
                // the state itself is finite here, so a structural failure of the
                // diagnostics means an overflow of the derived fields
                let e = match e {
                    Error::Structural(_) => Error::Divergence { step: n, mode: 0 },
                    e => e,
                };
                save_partial(&record, params, &state, opts, started)?;
                return Err(e);
            }
        };
        monitor.cumulative_dissipation += dt * rate;
        let increment = state.u.zip_with(&previous, |a, b| a - b)?;
        monitor.scheme_dissipation += hminus1_norm_sq_unchecked(&increment) / dt;
        let at_record = n % every == 0 || n == n_steps;
        monitor.steps_checked += 1;
        monitor.max_increase = monitor.max_increase.max(next.energy.total - current.energy.total);
        current = next;
        if at_record {
            let t = if n == n_steps { params.t_end } else { state.t };
            record.push(record_row(&state.u, t, params, &current, &monitor)?)?;
            if opts.keep_fields {
                fields.push(state.u.clone());
            }
            write_snap(&state.u, t, records)?;
            records += 1;
        }
    }
    if let Some(dir) = &opts.output_dir {
        let meta = metadata(params, state.u.grid(), started.elapsed().as_secs_f64());
        record.persist(dir, &opts.stem, &meta)?;
    }
    Ok(OkRun {
        record,
        fields,
        final_state: state,
        monitor,
        initial_mass,
    })
}
