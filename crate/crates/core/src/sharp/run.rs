//! Fixed-step RK4 integration of the sphere radii up to the first geometric singularity.

use serde::{Deserialize, Serialize};

use super::{
    gibbs_thomson_values, h_half_norm_on_spheres, sharp_energy, sphere_velocities, SphereFamily,
};
use crate::error::{Error, Result};
use crate::record::{RecordKind, RecordRow, RunRecord};

/// Distance to collision, to the centre or to the boundary at which a run stops.
pub const TOL_GEOM: f64 = 1e-3;

/// `1e-4 · min(r_1, gaps)³`.
pub fn default_ms_dt(family: &SphereFamily) -> f64 {
    let r = family.radii();
    let mut m = r.first().copied().unwrap_or(1.0);
    for w in r.windows(2) {
        m = m.min(w[1] - w[0]);
    }
    1e-4 * m.powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Reached `t_end`.
    Completed,
    /// Two spheres came within `tol_geom`.
    Collision,
    /// The innermost sphere shrank below `tol_geom`.
    Vanished,
    /// The outermost sphere came within `tol_geom` of the boundary.
    BoundaryExit,
    /// A Runge–Kutta stage left the set of ordered families.
    OrderingViolated,
}

#[derive(Debug, Clone)]
pub struct MsOptions {
    pub lambda: f64,
    pub t_end: f64,
    /// Fixed step; defaults to `default_ms_dt` of the initial family.
    pub dt: Option<f64>,
    /// Times (within `[0, t_end]`) at which to record; steps are shortened to hit them.
    /// Empty means every step.
    pub record_times: Vec<f64>,
    pub tol_geom: f64,
}

impl MsOptions {
    pub fn new(lambda: f64, t_end: f64) -> Self {
        MsOptions {
            lambda,
            t_end,
            dt: None,
            record_times: Vec::new(),
            tol_geom: TOL_GEOM,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MsRun {
    pub record: RunRecord,
    pub final_family: SphereFamily,
    pub stop: StopReason,
    /// Time at which the run stopped (`t_end`, or the estimated `T_*`).
    pub stop_time: f64,
}

fn rates(family: &SphereFamily, lambda: f64) -> Result<Vec<f64>> {
    Ok(sphere_velocities(family, lambda)?.radial)
}

fn offset(family: &SphereFamily, k: &[f64], h: f64) -> Result<SphereFamily> {
    let radii = family.radii().iter().zip(k).map(|(r, v)| r + h * v).collect();
    family.with_radii(radii)
}

/// One classical RK4 step. Fails if any stage leaves the admissible set.
pub fn ms_step(family: &SphereFamily, lambda: f64, dt: f64) -> Result<SphereFamily> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    let k1 = rates(family, lambda)?;
    let k2 = rates(&offset(family, &k1, 0.5 * dt)?, lambda)?;
    let k3 = rates(&offset(family, &k2, 0.5 * dt)?, lambda)?;
    let k4 = rates(&offset(family, &k3, dt)?, lambda)?;
    let radii = (0..family.len())
        .map(|i| family.radii()[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    family.with_radii(radii)
}

fn geometric_stop(family: &SphereFamily, tol: f64) -> Option<StopReason> {
    let r = family.radii();
    if r.is_empty() {
        return None;
    }
    if r[0] < tol {
        Some(StopReason::Vanished)
    } else if r.windows(2).any(|w| w[1] - w[0] < tol) {
        Some(StopReason::Collision)
    } else if r[r.len() - 1] > 1.0 - tol {
        Some(StopReason::BoundaryExit)
    } else {
        None
    }
}

fn row(family: &SphereFamily, lambda: f64, t: f64) -> Result<RecordRow> {
    let e = sharp_energy(family, lambda);
    let g = gibbs_thomson_values(family, lambda);
    Ok(RecordRow {
        time: t,
        energy_total: e.total,
        energy_ac: e.ac_part,
        energy_nonlocal: e.nonlocal_part,
        mass: family.volume_plus(),
        dissipation: h_half_norm_on_spheres(family, &g)?,
        radii: Some(family.radii().to_vec()),
        extra: Vec::new(),
    })
}

pub fn run_ms(initial: &SphereFamily, opts: &MsOptions) -> Result<MsRun> {
    if !(opts.t_end >= 0.0) {
        return Err(Error::param("params.t_end", "must be nonnegative"));
    }
    let dt = opts.dt.unwrap_or_else(|| default_ms_dt(initial));
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    let mut targets: Vec<f64> = opts
        .record_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= opts.t_end)
        .collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let every_step = targets.is_empty();

    let mut record = RunRecord::new(RecordKind::Sharp);
    let mut family = initial.clone();
    let mut t = 0.0;
    record.push(row(&family, opts.lambda, t)?)?;
    let mut next = 0;
    if let Some(reason) = geometric_stop(&family, opts.tol_geom) {
        return Ok(MsRun { record, final_family: family, stop: reason, stop_time: 0.0 });
    }
    let mut stop = StopReason::Completed;
    while t < opts.t_end * (1.0 - 1e-14) {
        let horizon = if every_step { opts.t_end } else { targets[next].min(opts.t_end) };
        let h = dt.min(horizon - t);
        let stepped = match ms_step(&family, opts.lambda, h) {
            Ok(f) => f,
            Err(Error::InvalidParameter { .. }) => {
                stop = StopReason::OrderingViolated;
                break;
            }
            Err(e) => return Err(e),
        };
        family = stepped;
        t = if h == horizon - t { horizon } else { t + h };
        let hit = every_step || t >= targets[next];
        if hit {
            record.push(row(&family, opts.lambda, t)?)?;
            if !every_step {
                next += 1;
            }
        }
        if let Some(reason) = geometric_stop(&family, opts.tol_geom) {
            if !hit {
                record.push(row(&family, opts.lambda, t)?)?;
            }
            stop = reason;
            break;
        }
        if !every_step && next == targets.len() {
            break;
        }
    }
    Ok(MsRun {
        record,
        final_family: family,
        stop,
        stop_time: t,
    })
}
