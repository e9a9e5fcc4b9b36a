//! Nonlocal Mullins–Sekerka dynamics of concentric spheres in the unit ball.
//!
//! Orientation: the normal at every sphere points from the `u = -1` side into the
//! `u = +1` side, so `ν_i = +1` when the phase just inside sphere `i` is `-1`.
//! Normal velocities are measured along that normal. `space_dim = 1` gives the flat
//! analogue on `[0, 1]` with Neumann conditions at both ends.

mod run;

pub use run::{ms_step, run_ms, default_ms_dt, MsOptions, MsRun, StopReason, TOL_GEOM};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::unit_sphere_area;
use crate::phasefield::{EnergyBreakdown, InterfaceSpec, SIGMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereFamily {
    radii: Vec<f64>,
    innermost_phase: f64,
    space_dim: usize,
}

impl SphereFamily {
    pub fn new(radii: Vec<f64>, innermost_phase: f64, space_dim: usize) -> Result<Self> {
        if space_dim < 2 {
            return Err(Error::param("geometry.space_dim", "must be at least 2"));
        }
        Self::build(radii, innermost_phase, space_dim)
    }

    /// Flat interfaces at `positions` in `[0, 1]`.
    pub fn slab(positions: Vec<f64>, first_phase: f64) -> Result<Self> {
        Self::build(positions, first_phase, 1)
    }

    fn build(radii: Vec<f64>, innermost_phase: f64, space_dim: usize) -> Result<Self> {
        if innermost_phase != 1.0 && innermost_phase != -1.0 {
            return Err(Error::param("geometry.innermost_phase", "must be +1 or -1"));
        }
        if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::param("geometry.radii", "every radius must lie in (0, 1)"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("geometry.radii", "radii must be strictly ascending"));
        }
        Ok(SphereFamily {
            radii,
            innermost_phase,
            space_dim,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn innermost_phase(&self) -> f64 {
        self.innermost_phase
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn with_radii(&self, radii: Vec<f64>) -> Result<Self> {
        Self::build(radii, self.innermost_phase, self.space_dim)
    }

    pub fn to_interface_spec(&self) -> InterfaceSpec {
        InterfaceSpec {
            positions: self.radii.clone(),
            first_phase: self.innermost_phase,
        }
    }

    fn omega(&self) -> f64 {
        unit_sphere_area(self.space_dim)
    }

    fn area_factor(&self, r: f64) -> f64 {
        r.powi(self.space_dim as i32 - 1)
    }

    /// Phase of region `i`: `0` is the inner ball, `k` the outer shell.
    pub fn region_phase(&self, i: usize) -> f64 {
        if i % 2 == 0 {
            self.innermost_phase
        } else {
            -self.innermost_phase
        }
    }

    /// Orientation `ν_i` of sphere `i`.
    pub fn normal_sign(&self, i: usize) -> f64 {
        -self.region_phase(i)
    }

    /// Region boundaries `0 = ρ_0 < r_1 < … < r_k < ρ_{k+1} = 1`.
    fn bounds(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.radii.len() + 2);
        b.push(0.0);
        b.extend_from_slice(&self.radii);
        b.push(1.0);
        b
    }

    /// Mean of the step function `u⁰`.
    pub fn mean_phase(&self) -> f64 {
        let n = self.space_dim as i32;
        self.bounds()
            .windows(2)
            .enumerate()
            .map(|(i, w)| self.region_phase(i) * (w[1].powi(n) - w[0].powi(n)))
            .sum()
    }

    /// Volume of the `+1` phase.
    pub fn volume_plus(&self) -> f64 {
        let n = self.space_dim as i32;
        let frac: f64 = self
            .bounds()
            .windows(2)
            .enumerate()
            .filter(|(i, _)| self.region_phase(*i) > 0.0)
            .map(|(_, w)| w[1].powi(n) - w[0].powi(n))
            .sum();
        frac * self.omega() / self.space_dim as f64
    }

    /// `Σ ω_N r_i^{N-1}`.
    pub fn area(&self) -> f64 {
        self.omega() * self.radii.iter().map(|&r| self.area_factor(r)).sum::<f64>()
    }

    /// Signed mean curvature `κ_i = ν_i (N-1)/r_i`.
    pub fn curvature(&self, i: usize) -> f64 {
        self.normal_sign(i) * (self.space_dim as f64 - 1.0) / self.radii[i]
    }

    /// Smallest of `r_1`, the gaps between spheres and `1 - r_k`.
    pub fn clearance(&self) -> f64 {
        self.bounds().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `ψ` with `ψ' = r^{1-N}`.
fn psi(n: usize, r: f64) -> f64 {
    match n {
        1 => r,
        2 => r.ln(),
        _ => r.powi(2 - n as i32) / (2.0 - n as f64),
    }
}

/// `∫ ψ(r) r^{N-1} dr`.
fn psi_moment(n: usize, r: f64) -> f64 {
    match n {
        1 => 0.5 * r * r,
        2 => {
            if r == 0.0 {
                0.0
            } else {
                0.5 * r * r * r.ln() - 0.25 * r * r
            }
        }
        _ => r * r / (2.0 * (2.0 - n as f64)),
    }
}

/// The background potential `v = Δ⁻¹(u⁰ - ū)` of a sphere family, in closed form.
///
/// In region `i`, `r^{N-1} v'(r) = -(α_i + β_i r^N)` and
/// `v = c_i - α_i ψ(r) - β_i r²/2`.
#[derive(Debug, Clone)]
pub struct BackgroundPotential {
    bounds: Vec<f64>,
    space_dim: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    c: Vec<f64>,
    mean_phase: f64,
    phases: Vec<f64>,
}

impl BackgroundPotential {
    fn region(&self, r: f64) -> usize {
        let k = self.bounds.len() - 2;
        (1..=k).take_while(|&i| self.bounds[i] < r).count()
    }

    pub fn value(&self, r: f64) -> f64 {
        let i = self.region(r);
        self.value_in(i, r)
    }

    fn value_in(&self, i: usize, r: f64) -> f64 {
        let a = if self.alpha[i] == 0.0 { 0.0 } else { self.alpha[i] * psi(self.space_dim, r) };
        self.c[i] - a - 0.5 * self.beta[i] * r * r
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let i = self.region(r);
        let n = self.space_dim as i32;
        let a = if self.alpha[i] == 0.0 { 0.0 } else { self.alpha[i] * r.powi(1 - n) };
        -a - self.beta[i] * r
    }

    /// `u⁰(r) - ū`.
    pub fn source(&self, r: f64) -> f64 {
        self.phases[self.region(r)] - self.mean_phase
    }

    /// `∫|∇v|²`.
    pub fn dirichlet_energy(&self) -> f64 {
        let n = self.space_dim;
        let ni = n as i32;
        let mut s = 0.0;
        for (i, w) in self.bounds.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let (al, be) = (self.alpha[i], self.beta[i]);
            if al != 0.0 {
                s += al * al * (psi(n, b) - psi(n, a)) + al * be * (b * b - a * a);
            }
            s += be * be * (b.powi(ni + 2) - a.powi(ni + 2)) / (n as f64 + 2.0);
        }
        unit_sphere_area(n) * s
    }
}

pub fn radial_background_potential(family: &SphereFamily) -> BackgroundPotential {
    let n = family.space_dim;
    let ni = n as i32;
    let bounds = family.bounds();
    let regions = bounds.len() - 1;
    let ubar = family.mean_phase();
    let phases: Vec<f64> = (0..regions).map(|i| family.region_phase(i)).collect();
    let beta: Vec<f64> = phases.iter().map(|p| (p - ubar) / n as f64).collect();
    let mut alpha = vec![0.0; regions];
    for i in 1..regions {
        let rn = bounds[i].powi(ni);
        alpha[i] = alpha[i - 1] + (beta[i - 1] - beta[i]) * rn;
    }
    // continuity of v fixes c_i up to one constant
    let mut bp = BackgroundPotential {
        bounds: bounds.clone(),
        space_dim: n,
        alpha,
        beta,
        c: vec![0.0; regions],
        mean_phase: ubar,
        phases,
    };
    for i in 1..regions {
        let r = bounds[i];
        let jump = bp.value_in(i - 1, r) - bp.value_in(i, r);
        bp.c[i] = jump;
    }
    // remove the mean: ∫ v r^{N-1} dr = 0
    let mut integral = 0.0;
    for (i, w) in bounds.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        integral += bp.c[i] * (b.powi(ni) - a.powi(ni)) / n as f64;
        if bp.alpha[i] != 0.0 {
            integral -= bp.alpha[i] * (psi_moment(n, b) - psi_moment(n, a));
        }
        integral -= 0.5 * bp.beta[i] * (b.powi(ni + 2) - a.powi(ni + 2)) / (n as f64 + 2.0);
    }
    let shift = integral * n as f64;
    bp.c.iter_mut().for_each(|c| *c -= shift);
    bp
}

/// `g_i = σκ_i - λ v(r_i)`.
pub fn gibbs_thomson_values(family: &SphereFamily, lambda: f64) -> Vec<f64> {
    let v = radial_background_potential(family);
    (0..family.len())
        .map(|i| {
            let nonlocal = if lambda != 0.0 { lambda * v.value(family.radii[i]) } else { 0.0 };
            SIGMA * family.curvature(i) - nonlocal
        })
        .collect()
}

/// Radial fundamental solution: `r` (N = 1), `ln r` (N = 2), `r^{2-N}` (N ≥ 3).
pub fn fundamental(n: usize, r: f64) -> f64 {
    match n {
        1 => r,
        2 => r.ln(),
        _ => r.powi(2 - n as i32),
    }
}

fn fundamental_prime(n: usize, r: f64) -> f64 {
    match n {
        1 => 1.0,
        2 => 1.0 / r,
        _ => (2.0 - n as f64) * r.powi(1 - n as i32),
    }
}

/// `w = a_i + b_i φ(r)` per region, constant in the inner ball and the outer shell.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseHarmonic {
    pub radii: Vec<f64>,
    pub space_dim: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PiecewiseHarmonic {
    fn region(&self, r: f64) -> usize {
        self.radii.iter().take_while(|&&x| x < r).count()
    }

    pub fn value(&self, r: f64) -> f64 {
        let i = self.region(r);
        if self.b[i] == 0.0 {
            self.a[i]
        } else {
            self.a[i] + self.b[i] * fundamental(self.space_dim, r)
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let i = self.region(r);
        self.derivative_in(i, r)
    }

    fn derivative_in(&self, i: usize, r: f64) -> f64 {
        if self.b[i] == 0.0 {
            0.0
        } else {
            self.b[i] * fundamental_prime(self.space_dim, r)
        }
    }

    /// `(∂_r w inside, ∂_r w outside)` at sphere `i`.
    pub fn one_sided_derivatives(&self, i: usize) -> (f64, f64) {
        let r = self.radii[i];
        (self.derivative_in(i, r), self.derivative_in(i + 1, r))
    }
}

pub fn harmonic_w(family: &SphereFamily, g: &[f64]) -> Result<PiecewiseHarmonic> {
    let k = family.len();
    if g.len() != k {
        return Err(Error::Structural(format!("{} boundary values for {k} spheres", g.len())));
    }
    let n = family.space_dim;
    let r = &family.radii;
    let mut a = vec![0.0; k + 1];
    let mut b = vec![0.0; k + 1];
    if k == 0 {
        return Ok(PiecewiseHarmonic { radii: vec![], space_dim: n, a, b });
    }
    a[0] = g[0];
    a[k] = g[k - 1];
    for i in 1..k {
        let (p0, p1) = (fundamental(n, r[i - 1]), fundamental(n, r[i]));
        let denom = p0 - p1;
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular(format!(
                "coincident radii {} and {}",
                r[i - 1],
                r[i]
            )));
        }
        b[i] = (g[i - 1] - g[i]) / denom;
        a[i] = g[i - 1] - b[i] * p0;
    }
    Ok(PiecewiseHarmonic {
        radii: r.clone(),
        space_dim: n,
        a,
        b,
    })
}

/// Normal velocities `V_i = ½(∂_r w|out - ∂_r w|in)` and radial rates `ṙ_i = ν_i V_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereVelocities {
    pub normal: Vec<f64>,
    pub radial: Vec<f64>,
}

pub fn sphere_velocities(family: &SphereFamily, lambda: f64) -> Result<SphereVelocities> {
    let g = gibbs_thomson_values(family, lambda);
    let w = harmonic_w(family, &g)?;
    let normal: Vec<f64> = (0..family.len())
        .map(|i| {
            let (din, dout) = w.one_sided_derivatives(i);
            0.5 * (dout - din)
        })
        .collect();
    let radial = normal
        .iter()
        .enumerate()
        .map(|(i, v)| family.normal_sign(i) * v)
        .collect();
    Ok(SphereVelocities { normal, radial })
}

/// `E(Γ) = 2σ·area + λ/2 ∫|∇v|²`.
pub fn sharp_energy(family: &SphereFamily, lambda: f64) -> EnergyBreakdown {
    let area = 2.0 * SIGMA * family.area();
    let nonlocal = if lambda > 0.0 {
        0.5 * lambda * radial_background_potential(family).dirichlet_energy()
    } else {
        0.0
    };
    EnergyBreakdown::new(area, nonlocal)
}

/// Dirichlet energy of the piecewise-harmonic extension of `g` with Neumann data on
/// the outer boundary.
pub fn h_half_norm_on_spheres(family: &SphereFamily, g: &[f64]) -> Result<f64> {
    let w = harmonic_w(family, g)?;
    let n = family.space_dim;
    let r = &family.radii;
    let mut s = 0.0;
    for i in 1..family.len() {
        let kernel = match n {
            1 => r[i] - r[i - 1],
            2 => (r[i] / r[i - 1]).ln(),
            _ => (n as f64 - 2.0) * (fundamental(n, r[i - 1]) - fundamental(n, r[i])),
        };
        s += w.b[i] * w.b[i] * kernel;
    }
    Ok(family.omega() * s)
}

/// `‖Σ V_i δ_{S_i}‖²_{H⁻¹}`: Dirichlet energy of the Neumann potential of the surface
/// source with density `V_i` on sphere `i`.
pub fn surface_velocity_hminus1_norm(family: &SphereFamily, v: &[f64]) -> Result<f64> {
    if v.len() != family.len() {
        return Err(Error::Structural(format!(
            "{} velocities for {} spheres",
            v.len(),
            family.len()
        )));
    }
    let n = family.space_dim;
    let omega = family.omega();
    let r = &family.radii;
    let fluxes: Vec<f64> = v.iter().zip(r).map(|(vi, ri)| vi * family.area_factor(*ri)).collect();
    let total: f64 = fluxes.iter().sum();
    let scale: f64 = fluxes.iter().map(|f| f.abs()).sum::<f64>().max(1.0);
    if (omega * total).abs() > 1e-8 * scale * omega.max(1.0) {
        return Err(Error::IncompatibleVelocity { flux: omega * total });
    }
    let mut cumulative = 0.0;
    let mut s = 0.0;
    for i in 0..family.len().saturating_sub(1) {
        cumulative += fluxes[i];
        s += cumulative * cumulative * (psi(n, r[i + 1]) - psi(n, r[i]));
    }
    Ok(omega * s)
}

/// `dE/dt = 2 Σ ω r_i^{N-1} g_i V_i` along the flow (equals `-∫|∇w|²`).
pub fn energy_rate(family: &SphereFamily, lambda: f64) -> Result<f64> {
    let g = gibbs_thomson_values(family, lambda);
    let vel = sphere_velocities(family, lambda)?;
    Ok(2.0
        * family.omega()
        * (0..family.len())
            .map(|i| family.area_factor(family.radii[i]) * g[i] * vel.normal[i])
            .sum::<f64>())
}
