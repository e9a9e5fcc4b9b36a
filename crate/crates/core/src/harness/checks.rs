//! Per-ε measurements from paired runs, and the verdict rules applied to them.

use serde::{Deserialize, Serialize};

use super::deform::{
    advection, bump_half_width, corrected_field, energy_slope, transport_field, RadialField,
};
use super::{log_log_slope, strictly_decreasing, CheckReport, PairedRun};
use crate::elliptic;
use crate::error::{Error, Result};
use crate::field::{field_mean, l2_norm, ScalarField};
use crate::grid::Grid;
use crate::phasefield::{chemical_potential, estimate_multiplicity, extract_interface, limit_interface, SIGMA};
use crate::sharp::{
    energy_rate, gibbs_thomson_values, h_half_norm_on_spheres, sphere_velocities,
    surface_velocity_hminus1_norm, SphereFamily,
};

/// Tolerances of every check, all overridable from the config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Smallest-ε radius error must be at most this multiple of ε.
    pub radius_error_per_eps: f64,
    /// Smallest-ε energy gap relative to `E(Γ(0))`.
    pub energy_gap_rel: f64,
    pub de_giorgi_slack: f64,
    pub gibbs_thomson_order: f64,
    pub velocity_bound_slack: f64,
    pub transport_ratio: f64,
    pub transport_h: f64,
    pub deformation_gap: f64,
    /// Largest allowed max/min of the Hölder ratio across ε.
    pub holder_spread: f64,
    pub multiplicity: f64,
    pub multiplicity_band: f64,
    pub energy_increase: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            radius_error_per_eps: 2.0,
            energy_gap_rel: 0.1,
            de_giorgi_slack: 0.1,
            gibbs_thomson_order: 0.8,
            velocity_bound_slack: 0.15,
            transport_ratio: 0.10,
            transport_h: 1e-2,
            deformation_gap: 0.10,
            holder_spread: 2.0,
            multiplicity: 3.0,
            multiplicity_band: 0.5,
            energy_increase: 1e-10,
        }
    }
}

/// Everything the checks need from one paired run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Measurements {
    pub eps: f64,
    pub lambda: f64,
    /// Set when the run failed; all other fields are then meaningless.
    pub failure: Option<String>,
    pub t_star: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub max_energy_increase: f64,
    pub radius_error: f64,
    pub energy_gap: f64,
    pub energy_gap_rel: f64,
    pub multiplicity_t0: f64,
    pub discrepancy_sup: f64,
    pub holder_max: f64,
    /// The same ratio for the sharp solution, `‖χ(s) - χ(t)‖ = 2|Ω_s Δ Ω_t|^{1/2}`.
    pub holder_sharp: f64,
    pub sample_times: Vec<f64>,
    pub de_giorgi_lhs: Vec<f64>,
    pub de_giorgi_rhs: Vec<f64>,
    /// `max |k̂_i - σκ_i|` over samples and spheres.
    pub gibbs_thomson_error: f64,
    pub gibbs_thomson_signs_ok: bool,
    pub velocity_lhs: f64,
    pub velocity_rhs: f64,
    pub transport_residual: f64,
    pub transport_norm: f64,
    /// `sup |h|` with `φ` the unit bump.
    pub transport_h_max: f64,
    /// `sup_i |ṙ_i|` of the initial sharp family: the amplitude at which `φ` is
    /// comparable to `V`, so `h / velocity_scale` is the relative size of `hφ`.
    pub velocity_scale: f64,
    pub transport_mean_max: f64,
    pub deformation_velocity_gap: f64,
    pub deformation_slope_gap: f64,
    pub flags: Vec<String>,
}

impl Measurements {
    pub fn failed(eps: f64, lambda: f64, why: String) -> Self {
        Measurements {
            eps,
            lambda,
            failure: Some(why),
            ..Default::default()
        }
    }

    pub fn transport_ratio(&self) -> f64 {
        self.transport_residual / self.transport_norm
    }

    pub fn de_giorgi_min_ratio(&self) -> f64 {
        self.de_giorgi_lhs
            .iter()
            .zip(&self.de_giorgi_rhs)
            .map(|(l, r)| if *r > 0.0 { l / r } else { f64::INFINITY })
            .fold(f64::INFINITY, f64::min)
    }
}

/// The limit interface of a diffuse state as a sphere family.
pub fn estimated_family(u: &ScalarField, eps: f64) -> Result<SphereFamily> {
    let est = extract_interface(u)?;
    let radii = limit_interface(&est, eps);
    if radii.is_empty() {
        return Err(Error::EmptyInterface);
    }
    let n = match u.grid().as_ref() {
        Grid::Radial(g) => g.space_dim(),
        Grid::Box(_) => {
            return Err(Error::UnsupportedDomain {
                op: "estimated_family",
                domain: "box",
            })
        }
    };
    let inner = if u.values()[0] >= 0.0 { 1.0 } else { -1.0 };
    if n == 1 {
        SphereFamily::slab(radii, inner)
    } else {
        SphereFamily::new(radii, inner, n)
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(1e-300)
    }
}

/// Light measurements only: radius error, energy gap, multiplicity, discrepancy.
pub fn measure_basic(run: &PairedRun) -> Result<Measurements> {
    let eps = run.eps;
    let t_star = run.t_star();
    let times = run.times();
    let dr = &run.diffuse.record;
    let sr = &run.sharp.record;
    let mut m = Measurements {
        eps,
        lambda: run.params.lambda,
        t_star,
        steps: run.diffuse.final_state.steps(),
        wall_time_s: run.wall_time_s,
        max_energy_increase: run.diffuse.monitor.max_increase,
        multiplicity_t0: estimate_multiplicity(&run.diffuse.fields[0], eps)?,
        ..Default::default()
    };
    let e0 = sr.energy_total[0];
    for k in 0..times.len() {
        if times[k] > t_star + 1e-12 || k >= sr.times.len() {
            break;
        }
        let u = &run.diffuse.fields[k];
        let gamma = limit_interface(&extract_interface(u)?, eps);
        let sharp = run.sharp_family(k).ok_or_else(|| Error::Structural("missing sharp record".into()))?;
        let err = if gamma.len() == sharp.len() {
            gamma.iter().zip(sharp.radii()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        m.radius_error = m.radius_error.max(err);
        m.energy_gap = m.energy_gap.max((dr.energy_total[k] - sr.energy_total[k]).abs());
        m.discrepancy_sup = m.discrepancy_sup.max(dr.extra_series("discrepancy").map_or(f64::NAN, |d| d[k]));
    }
    m.energy_gap_rel = m.energy_gap / e0;
    if m.radius_error.is_infinite() {
        m.flags.push("interface count differs from the sharp family at some record".into());
    }
    Ok(m)
}

/// All measurements.
pub fn measure(run: &PairedRun) -> Result<Measurements> {
    let mut m = measure_basic(run)?;
    let eps = run.eps;
    let lambda = run.params.lambda;
    let times = run.times();
    let fields = &run.diffuse.fields;
    let t_star = m.t_star;
    let last = (0..times.len()).take_while(|&k| times[k] <= t_star + 1e-12).last().unwrap_or(0);

    // Hölder ratio over all recorded pairs.
    for a in 0..=last {
        for b in a + 1..=last {
            let d = fields[b].zip_with(&fields[a], |x, y| x - y)?;
            let lag = (times[b] - times[a]).powf(0.125);
            m.holder_max = m.holder_max.max(l2_norm(&d)? / lag);
            if let (Some(fa), Some(fb)) = (run.sharp_family(a), run.sharp_family(b)) {
                m.holder_sharp = m.holder_sharp.max(2.0 * phase_difference_volume(&fa, &fb).sqrt() / lag);
            }
        }
    }

    // Sampled times on [0, T̂_*/2].
    let samples: Vec<usize> = [0.125, 0.25, 0.375, 0.5]
        .iter()
        .map(|f| run.nearest_record(f * t_star))
        .collect();
    m.gibbs_thomson_signs_ok = true;
    for &k in &samples {
        let u = &fields[k];
        let gamma = match estimated_family(u, eps) {
            Ok(g) => g,
            Err(e) => {
                m.flags.push(format!("t={}: {e}", times[k]));
                continue;
            }
        };
        m.sample_times.push(times[k]);
        m.de_giorgi_lhs.push(run.diffuse.record.dissipation[k]);
        m.de_giorgi_rhs.push(h_half_norm_on_spheres(&gamma, &gibbs_thomson_values(&gamma, lambda))?);

        let mu = chemical_potential(u, &run.params)?;
        for (i, plateau) in plateau_values(&mu.k, &gamma, eps).into_iter().enumerate() {
            let target = SIGMA * gamma.curvature(i);
            match plateau {
                Some(k_hat) => {
                    m.gibbs_thomson_error = m.gibbs_thomson_error.max((k_hat - target).abs());
                    if k_hat.signum() != target.signum() {
                        m.gibbs_thomson_signs_ok = false;
                    }
                }
                None => m.flags.push(format!("t={}: no plateau band for sphere {i}", times[k])),
            }
        }

        let (vel_gap, slope_gap) = deformation_gaps(u, &gamma, run)?;
        m.deformation_velocity_gap = m.deformation_velocity_gap.max(vel_gap);
        m.deformation_slope_gap = m.deformation_slope_gap.max(slope_gap);
    }

    // Velocity lower bound and transport residual, interval by interval.
    if let Some(f0) = run.sharp_family(0) {
        m.velocity_scale = sphere_velocities(&f0, lambda)?.radial.iter().fold(0.0, |a, v| a.max(v.abs()));
    }
    let mut surface = Vec::with_capacity(last + 1);
    for k in 0..=last {
        let fam = run.sharp_family(k).ok_or_else(|| Error::Structural("missing sharp record".into()))?;
        let vel = sphere_velocities(&fam, lambda)?;
        surface.push(surface_velocity_hminus1_norm(&fam, &vel.normal)?);
    }
    for k in 0..last {
        let dt = times[k + 1] - times[k];
        let du = fields[k + 1].zip_with(&fields[k], |a, b| (a - b) / dt)?;
        let mid = fields[k + 1].zip_with(&fields[k], |a, b| 0.5 * (a + b))?;
        let du_norm = elliptic::hminus1_norm_sq_unchecked(&du);
        m.velocity_lhs += dt * du_norm;
        m.velocity_rhs += 4.0 * dt * 0.5 * (surface[k] + surface[k + 1]);

        let gamma = estimated_family(&mid, eps)?;
        let (ve, h) = transport_velocity(&mid, &gamma, lambda)?;
        let resid = du.zip_with(&advection(&mid, &ve)?, |a, b| a + b)?;
        m.transport_mean_max = m.transport_mean_max.max(field_mean(&resid)?.abs());
        m.transport_h_max = m.transport_h_max.max(h.abs());
        m.transport_residual += dt * elliptic::hminus1_norm_sq_unchecked(&resid);
        m.transport_norm += dt * du_norm;
    }
    Ok(m)
}

/// Volume of the set where two families of the same dimension carry different phases.
pub fn phase_difference_volume(a: &SphereFamily, b: &SphereFamily) -> f64 {
    let n = a.space_dim();
    let mut cuts: Vec<f64> = a.radii().iter().chain(b.radii()).copied().collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    let phase = |f: &SphereFamily, r: f64| {
        let inside = f.radii().iter().filter(|&&s| s < r).count();
        f.region_phase(inside)
    };
    let shell = |lo: f64, hi: f64| match n {
        1 => hi - lo,
        _ => crate::grid::unit_sphere_area(n) * (hi.powi(n as i32) - lo.powi(n as i32)) / n as f64,
    };
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .filter(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            phase(a, mid) != phase(b, mid)
        })
        .map(|w| shell(w[0], w[1]))
        .sum()
}

/// `V^ε` for a diffuse state: the sharp law evaluated at its limit interface,
/// extended by bumps, corrected by `hφ` with `φ` the unit bump on the innermost sphere.
pub fn transport_velocity(u: &ScalarField, gamma: &SphereFamily, lambda: f64) -> Result<(RadialField, f64)> {
    let vel = sphere_velocities(gamma, lambda)?;
    let v = transport_field(gamma, &vel.radial);
    let phi = RadialField::zero().with_bump(gamma.radii()[0], bump_half_width(gamma), 1.0);
    corrected_field(u, &v, &phi)
}

/// Relative gaps of the velocity and slope identities for the deformation by `V^ε`.
pub fn deformation_gaps(u: &ScalarField, gamma: &SphereFamily, run: &PairedRun) -> Result<(f64, f64)> {
    let lambda = run.params.lambda;
    let (ve, _) = transport_velocity(u, gamma, lambda)?;
    let vel = sphere_velocities(gamma, lambda)?;
    let lhs_v = elliptic::hminus1_norm_sq_unchecked(&advection(u, &ve)?);
    let rhs_v = 4.0 * surface_velocity_hminus1_norm(gamma, &vel.normal)?;
    let tau0 = 0.25 * run.eps / ve.max_abs().max(1e-300);
    let (lhs_s, _) = energy_slope(u, &ve, tau0, &run.params)?;
    let rhs_s = energy_rate(gamma, lambda)?;
    Ok((rel_gap(lhs_v, rhs_v), rel_gap(lhs_s, rhs_s)))
}

/// Median of `k` on the band at distance `[3ε, 6ε]` from each sphere, restricted to
/// nodes whose nearest sphere it is. The innermost sphere is read from its inside
/// and the outermost from its outside, where the limiting `w` is constant; spheres
/// in between use both sides.
pub fn plateau_values(k: &ScalarField, gamma: &SphereFamily, eps: f64) -> Vec<Option<f64>> {
    let coords = k.grid().line_coords().unwrap_or_default();
    let radii = gamma.radii();
    let count = radii.len();
    (0..count)
        .map(|i| {
            let inside = i == 0;
            let outside = i + 1 == count;
            let mut band: Vec<f64> = coords
                .iter()
                .zip(k.values())
                .filter(|(&r, _)| {
                    let d = r - radii[i];
                    let nearest = radii
                        .iter()
                        .all(|&s| (r - s).abs() >= d.abs());
                    let side_ok = match (inside, outside) {
                        (true, true) | (false, false) => true,
                        (true, false) => d < 0.0,
                        (false, true) => d > 0.0,
                    };
                    nearest && side_ok && d.abs() >= 3.0 * eps && d.abs() <= 6.0 * eps
                })
                .map(|(_, &v)| v)
                .collect();
            if band.is_empty() {
                return None;
            }
            band.sort_by(f64::total_cmp);
            let n = band.len();
            Some(if n % 2 == 1 { band[n / 2] } else { 0.5 * (band[n / 2 - 1] + band[n / 2]) })
        })
        .collect()
}

fn usable(ms: &[Measurements], report: &mut CheckReport) -> bool {
    report.eps = ms.iter().map(|m| m.eps).collect();
    let mut ok = true;
    for m in ms {
        if let Some(f) = &m.failure {
            report.note(format!("eps={}: run failed: {f}", m.eps));
            ok = false;
        }
        for f in &m.flags {
            report.note(format!("eps={}: {f}", m.eps));
        }
    }
    ok && ms.len() >= 2
}

fn smallest(ms: &[Measurements]) -> &Measurements {
    ms.last().expect("non-empty sweep")
}

pub fn convergence_check(ms: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "convergence",
        "sup-t radius error strictly decreasing in eps; smallest-eps error <= 2 eps",
    );
    let ok = usable(ms, &mut r);
    let err: Vec<f64> = ms.iter().map(|m| m.radius_error).collect();
    let bound = tol.radius_error_per_eps * smallest(ms).eps;
    let order = log_log_slope(&r.eps, &err);
    r.series("radius_error", err.clone())
        .series("t_star", ms.iter().map(|m| m.t_star).collect())
        .series("wall_time_s", ms.iter().map(|m| m.wall_time_s).collect())
        .scalar("observed_order", order)
        .tolerance("radius_error_per_eps", tol.radius_error_per_eps);
    r.passed = ok && strictly_decreasing(&err) && smallest(ms).radius_error <= bound;
    r
}

/// `folded` is the multiplicity-3 negative control; it must fail the same rule.
pub fn well_preparedness_check(ms: &[Measurements], folded: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "well_preparedness",
        "sup-t |E_eps - E(Gamma)| decreasing in eps and <= 10% of E(Gamma(0)) at smallest eps; folded control fails and has multiplicity 3 +- 0.5",
    );
    let ok = usable(ms, &mut r);
    let rule = |ms: &[Measurements]| {
        let gap: Vec<f64> = ms.iter().map(|m| m.energy_gap).collect();
        strictly_decreasing(&gap) && smallest(ms).energy_gap_rel <= tol.energy_gap_rel
    };
    let folded_ok = !folded.is_empty() && folded.iter().all(|m| m.failure.is_none());
    let control_fails = folded_ok && !rule(folded);
    let m_hat: Vec<f64> = folded.iter().map(|m| m.multiplicity_t0).collect();
    let m_ok = folded_ok && m_hat.iter().all(|m| (m - tol.multiplicity).abs() <= tol.multiplicity_band);
    r.series("energy_gap", ms.iter().map(|m| m.energy_gap).collect())
        .series("energy_gap_rel", ms.iter().map(|m| m.energy_gap_rel).collect())
        .series("folded_energy_gap", folded.iter().map(|m| m.energy_gap).collect())
        .series("folded_energy_gap_rel", folded.iter().map(|m| m.energy_gap_rel).collect())
        .series("folded_multiplicity", m_hat)
        .scalar("control_failed", if control_fails { 1.0 } else { 0.0 })
        .tolerance("energy_gap_rel", tol.energy_gap_rel)
        .tolerance("multiplicity_band", tol.multiplicity_band);
    r.passed = ok && rule(ms) && control_fails && m_ok;
    r
}

pub fn equipartition_check(ms: &[Measurements]) -> CheckReport {
    let mut r = CheckReport::new("equipartition", "sup-t discrepancy strictly decreasing in eps");
    let ok = usable(ms, &mut r);
    let d: Vec<f64> = ms.iter().map(|m| m.discrepancy_sup).collect();
    r.series("discrepancy_sup", d.clone());
    r.passed = ok && strictly_decreasing(&d);
    r
}

pub fn holder_check(ms: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "holder",
        "max ||u(s)-u(t)|| / |t-s|^(1/8) bounded independently of eps: max/min <= 2 and every value <= 1.05 x the sharp-solution ratio",
    );
    let ok = usable(ms, &mut r);
    let h: Vec<f64> = ms.iter().map(|m| m.holder_max).collect();
    let sharp: Vec<f64> = ms.iter().map(|m| m.holder_sharp).collect();
    let hi = h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = h.iter().cloned().fold(f64::INFINITY, f64::min);
    let below = h.iter().zip(&sharp).all(|(d, s)| *d <= 1.05 * s);
    if h.windows(2).all(|w| w[1] > w[0]) {
        r.note("ratio increases as eps decreases, approaching the sharp-solution value from below");
    }
    r.series("holder_max", h)
        .series("holder_sharp", sharp)
        .scalar("spread", hi / lo)
        .tolerance("holder_spread", tol.holder_spread)
        .tolerance("sharp_factor", 1.05);
    r.passed = ok && hi / lo <= tol.holder_spread && below;
    r
}

pub fn de_giorgi_check(ms: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "de_giorgi",
        "at sampled times, int |grad w|^2 >= (1 - 0.1) ||sigma kappa - lambda v||^2_{H^1/2} at smallest eps",
    );
    let ok = usable(ms, &mut r);
    let s = smallest(ms);
    r.series("min_ratio", ms.iter().map(|m| m.de_giorgi_min_ratio()).collect())
        .series("smallest_eps_lhs", s.de_giorgi_lhs.clone())
        .series("smallest_eps_rhs", s.de_giorgi_rhs.clone())
        .series("sample_times", s.sample_times.clone())
        .tolerance("slack", tol.de_giorgi_slack);
    r.passed = ok
        && s.sample_times.len() == 4
        && s.de_giorgi_lhs.iter().zip(&s.de_giorgi_rhs).all(|(l, rr)| *l >= rr * (1.0 - tol.de_giorgi_slack));
    r
}

pub fn gibbs_thomson_check(ms: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "gibbs_thomson",
        "plateau error |k - sigma kappa_i| <= C eps with fitted order >= 0.8; signs match on every sphere",
    );
    let ok = usable(ms, &mut r);
    let err: Vec<f64> = ms.iter().map(|m| m.gibbs_thomson_error).collect();
    let order = log_log_slope(&r.eps, &err);
    let c = err.iter().zip(&r.eps).map(|(e, x)| e / x).fold(0.0, f64::max);
    let signs = ms.iter().all(|m| m.gibbs_thomson_signs_ok);
    r.series("plateau_error", err)
        .scalar("fitted_order", order)
        .scalar("C", c)
        .scalar("signs_ok", if signs { 1.0 } else { 0.0 })
        .tolerance("order", tol.gibbs_thomson_order);
    r.passed = ok && order >= tol.gibbs_thomson_order && signs;
    r
}

pub fn velocity_bound_check(ms: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "velocity_lower_bound",
        "int ||d_t u||^2_{H^-1} >= 4 int ||V delta_Gamma||^2_{H^-1} (1 - 0.15) at smallest eps",
    );
    let ok = usable(ms, &mut r);
    let s = smallest(ms);
    r.series("lhs", ms.iter().map(|m| m.velocity_lhs).collect())
        .series("rhs", ms.iter().map(|m| m.velocity_rhs).collect())
        .tolerance("slack", tol.velocity_bound_slack);
    r.passed = ok && s.velocity_lhs >= s.velocity_rhs * (1.0 - tol.velocity_bound_slack);
    r
}

pub fn transport_check(ms: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "transport",
        "residual ratio decreasing in eps and <= 0.10 at smallest eps; |h| (phi scaled to sup|dr/dt| at t=0) decreasing and <= 1e-2 at smallest eps",
    );
    let ok = usable(ms, &mut r);
    let ratio: Vec<f64> = ms.iter().map(|m| m.transport_ratio()).collect();
    let h: Vec<f64> = ms.iter().map(|m| m.transport_h_max / m.velocity_scale).collect();
    let s = smallest(ms);
    r.series("residual_ratio", ratio.clone())
        .series("h_relative", h.clone())
        .series("h_unit_bump", ms.iter().map(|m| m.transport_h_max).collect())
        .series("mean_max", ms.iter().map(|m| m.transport_mean_max).collect())
        .tolerance("ratio", tol.transport_ratio)
        .tolerance("h", tol.transport_h);
    r.passed = ok
        && strictly_decreasing(&ratio)
        && s.transport_ratio() <= tol.transport_ratio
        && strictly_decreasing(&h)
        && h[h.len() - 1] <= tol.transport_h;
    r
}

pub fn deformation_check(ms: &[Measurements], tol: &Tolerances) -> CheckReport {
    let mut r = CheckReport::new(
        "deformation",
        "velocity and slope relative gaps decreasing in eps and <= 10% at smallest eps",
    );
    let ok = usable(ms, &mut r);
    let v: Vec<f64> = ms.iter().map(|m| m.deformation_velocity_gap).collect();
    let s: Vec<f64> = ms.iter().map(|m| m.deformation_slope_gap).collect();
    let last = smallest(ms);
    r.series("velocity_gap", v.clone())
        .series("slope_gap", s.clone())
        .tolerance("gap", tol.deformation_gap);
    r.passed = ok
        && strictly_decreasing(&v)
        && strictly_decreasing(&s)
        && last.deformation_velocity_gap <= tol.deformation_gap
        && last.deformation_slope_gap <= tol.deformation_gap;
    r
}

/// Per-step energy monotonicity over every run of a sweep.
pub fn monotonicity_summary(ms: &[Measurements]) -> f64 {
    ms.iter().map(|m| m.max_energy_increase).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn swept_volume_between_families() {
        let a = SphereFamily::new(vec![0.4, 0.7], -1.0, 3).unwrap();
        let b = SphereFamily::new(vec![0.3, 0.7], -1.0, 3).unwrap();
        let exact = 4.0 * PI / 3.0 * (0.4f64.powi(3) - 0.3f64.powi(3));
        assert!((phase_difference_volume(&a, &b) - exact).abs() < 1e-14);
        assert_eq!(phase_difference_volume(&a, &a), 0.0);
        let c = SphereFamily::new(vec![0.5], 1.0, 2).unwrap();
        let d = SphereFamily::new(vec![0.5], -1.0, 2).unwrap();
        assert!((phase_difference_volume(&c, &d) - PI).abs() < 1e-14);
    }

    #[test]
    fn plateau_of_an_exact_profile() {
        use crate::grid::RadialGrid;
        use std::sync::Arc;
        let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 801).unwrap().into());
        let fam = SphereFamily::new(vec![0.4, 0.7], -1.0, 3).unwrap();
        // k equal to a different constant on each side of each sphere.
        let k = ScalarField::from_fn(g, |x| if x[0] < 0.4 { 1.0 } else if x[0] < 0.7 { 2.0 } else { 3.0 });
        let p = plateau_values(&k, &fam, 0.01);
        assert_eq!(p, vec![Some(1.0), Some(3.0)]);
        let three = SphereFamily::new(vec![0.3, 0.5, 0.7], -1.0, 3).unwrap();
        // The middle sphere reads both sides.
        let k = ScalarField::from_fn(k.grid().clone(), |x| if x[0] < 0.5 { 1.0 } else { 2.0 });
        let p = plateau_values(&k, &three, 0.01);
        assert_eq!(p[0], Some(1.0));
        assert_eq!(p[2], Some(2.0));
        let mid = p[1].unwrap();
        assert!(mid > 1.0 && mid < 2.0, "{mid}");
    }
}
