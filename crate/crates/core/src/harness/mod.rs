//! ε-sweeps that pair diffuse runs with the sharp-interface flow, and the checks
//! computed from them.

mod checks;
mod deform;
mod suite;

pub use checks::*;
pub use deform::{bump, transport_field, RadialField, deformed_energy};
pub use suite::*;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_ok, OkRun, RunOptions};
use crate::error::{Error, Result};
use crate::grid::{Grid, RadialGrid};
use crate::params::SimParams;
use crate::phasefield::{layered_profile, InterfaceSpec};
use crate::sharp::{run_ms, MsOptions, MsRun, SphereFamily};

/// One ε-sweep: a diffuse run per ε, each paired with the sharp flow from the same family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPlan {
    pub experiment: String,
    /// Descending.
    pub eps_list: Vec<f64>,
    pub lambda: f64,
    pub family: SphereFamily,
    /// Diffuse initial interfaces; `None` means the family itself (well-prepared).
    pub diffuse_interfaces: Option<Vec<f64>>,
    pub t_end: f64,
    /// Grid nodes per ε (`h ≤ ε / nodes_per_eps`).
    pub nodes_per_eps: f64,
    /// Time step as a multiple of `ε³`.
    pub dt_factor: f64,
    /// Number of recorded intervals (records are equally spaced in time).
    pub intervals: usize,
}

impl SweepPlan {
    pub fn new(experiment: &str, family: SphereFamily, lambda: f64, eps_list: Vec<f64>, t_end: f64) -> Self {
        SweepPlan {
            experiment: experiment.into(),
            eps_list,
            lambda,
            family,
            diffuse_interfaces: None,
            t_end,
            nodes_per_eps: 8.0,
            dt_factor: 0.03,
            intervals: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::param("sweep.eps_list", "must not be empty"));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::param("sweep.eps_list", "entries must be positive"));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::param("sweep.eps_list", "must be strictly descending"));
        }
        if !(self.nodes_per_eps >= 8.0) {
            return Err(Error::param("sweep.nodes_per_eps", "must be at least 8 (h <= eps/8)"));
        }
        if !(self.dt_factor > 0.0) {
            return Err(Error::param("sweep.dt_factor", "must be positive"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::param("sweep.t_end", "must be positive"));
        }
        if self.intervals < 8 || self.intervals % 8 != 0 {
            return Err(Error::param("sweep.intervals", "must be a positive multiple of 8"));
        }
        if self.family.space_dim() < 2 {
            return Err(Error::param("geometry.space_dim", "sweeps are radial (N >= 2)"));
        }
        Ok(())
    }

    fn diffuse_spec(&self) -> Result<InterfaceSpec> {
        match &self.diffuse_interfaces {
            Some(p) => InterfaceSpec::new(p.clone(), self.family.innermost_phase()),
            None => Ok(self.family.to_interface_spec()),
        }
    }

    /// Parameters and grid for one ε; the step is shrunk so records fall on steps.
    pub fn setup(&self, eps: f64) -> Result<(SimParams, Arc<Grid>, usize)> {
        let grid: Arc<Grid> = Arc::new(RadialGrid::resolving(self.family.space_dim(), eps, self.nodes_per_eps)?.into());
        let target = self.dt_factor * eps.powi(3);
        let per_interval = (self.t_end / self.intervals as f64 / target).ceil().max(1.0) as usize;
        let dt = self.t_end / (self.intervals * per_interval) as f64;
        let params = SimParams::new(eps, self.lambda, self.t_end)?.with_dt(dt);
        Ok((params, grid, per_interval))
    }
}

/// A diffuse run and its sharp partner, recorded at the same times.
#[derive(Debug, Clone)]
pub struct PairedRun {
    pub eps: f64,
    pub params: SimParams,
    pub diffuse: OkRun,
    pub sharp: MsRun,
    pub wall_time_s: f64,
}

impl PairedRun {
    pub fn times(&self) -> &[f64] {
        &self.diffuse.record.times
    }

    /// `T̂_* = min(stop time of the sharp flow, t_end)`.
    pub fn t_star(&self) -> f64 {
        self.sharp.stop_time.min(self.params.t_end)
    }

    /// Sharp family at record `k` (if the sharp run got that far).
    pub fn sharp_family(&self, k: usize) -> Option<SphereFamily> {
        let radii = self.sharp.record.interface_radii.as_ref()?.get(k)?.clone();
        self.sharp.final_family.with_radii(radii).ok()
    }

    /// Index of the record closest to `t`.
    pub fn nearest_record(&self, t: f64) -> usize {
        let times = self.times();
        (0..times.len())
            .min_by(|&a, &b| (times[a] - t).abs().total_cmp(&(times[b] - t).abs()))
            .unwrap_or(0)
    }
}

pub fn run_paired(plan: &SweepPlan, eps: f64, out: Option<&Path>) -> Result<PairedRun> {
    let started = std::time::Instant::now();
    let (params, grid, per_interval) = plan.setup(eps)?;
    let u0 = layered_profile(grid, &plan.diffuse_spec()?, eps);
    let opts = RunOptions {
        record_every: per_interval,
        keep_fields: true,
        snapshot_every: None,
        output_dir: out.map(|o| o.join(&plan.experiment).join(format!("{eps}"))),
        stem: "diffuse".into(),
    };
    let diffuse = run_ok(u0, &params, &opts)?;
    let mut ms_opts = MsOptions::new(plan.lambda, plan.t_end);
    ms_opts.record_times = diffuse.record.times.clone();
    let sharp = run_ms(&plan.family, &ms_opts)?;
    if let Some(dir) = &opts.output_dir {
        let meta = crate::record::RunMetadata::new(
            crate::record::RecordKind::Sharp,
            serde_json::json!({ "lambda": plan.lambda, "t_end": plan.t_end, "family": plan.family }),
            serde_json::json!({ "kind": "sphere_family" }),
            0.0,
        );
        sharp.record.persist(dir, "sharp", &meta)?;
    }
    log::info!(
        "{} eps={eps}: {} steps in {:.1}s",
        plan.experiment,
        diffuse.final_state.steps(),
        started.elapsed().as_secs_f64()
    );
    Ok(PairedRun {
        eps,
        params,
        diffuse,
        sharp,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// All ε of a plan, concurrently. Failed ε are returned as errors in place.
pub fn run_sweep(plan: &SweepPlan, out: Option<&Path>) -> Result<Vec<Result<PairedRun>>> {
    plan.validate()?;
    Ok(plan
        .eps_list
        .par_iter()
        .map(|&eps| run_paired(plan, eps, out))
        .collect())
}

/// Per-ε measurements, a verdict, and the rule and tolerances that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub rule: String,
    pub eps: Vec<f64>,
    /// Non-finite numbers are written as `null` and read back as NaN.
    #[serde(deserialize_with = "nullable::series")]
    pub values: BTreeMap<String, Vec<f64>>,
    #[serde(deserialize_with = "nullable::scalars")]
    pub scalars: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, rule: &str) -> Self {
        CheckReport {
            name: name.into(),
            rule: rule.into(),
            eps: Vec::new(),
            values: BTreeMap::new(),
            scalars: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            passed: false,
            notes: Vec::new(),
        }
    }

    pub fn series(&mut self, key: &str, v: Vec<f64>) -> &mut Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn scalar(&mut self, key: &str, v: f64) -> &mut Self {
        self.scalars.insert(key.into(), v);
        self
    }

    pub fn tolerance(&mut self, key: &str, v: f64) -> &mut Self {
        self.tolerances.insert(key.into(), v);
        self
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    /// One-line summary of the outcome.
    pub fn summary(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut parts: Vec<String> = self.values.iter().map(|(k, v)| {
            let items: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
            format!("{k}=[{}]", items.join(", "))
        }).collect();
        parts.extend(self.scalars.iter().map(|(k, v)| format!("{k}={v:.4e}")));
        format!("[{status}] {}: {} | {}", self.name, self.rule, parts.join(" "))
    }
}

mod nullable {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer};

    pub fn series<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Vec<f64>>, D::Error> {
        let raw = BTreeMap::<String, Vec<Option<f64>>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect()))
            .collect())
    }

    pub fn scalars<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
        Ok(raw.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
    }
}

/// Strictly decreasing along the list (values ordered by descending ε).
pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
