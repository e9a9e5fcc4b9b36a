//! Double-well potential, optimal profile, diffuse energy and chemical potential.

mod init;
mod interface;
mod snapshot;

pub use init::{layered_profile, well_prepared_init, InterfaceSpec, Prepared};
pub use interface::{
    estimate_multiplicity, extract_interface, interface_measure, limit_interface,
    InterfaceEstimate, CLUSTER_WIDTH,
};
pub use snapshot::{profile_csv, read_snapshot, write_snapshot, SnapshotHeader};

use serde::{Deserialize, Serialize};

use crate::elliptic::{self, radial};
use crate::error::Result;
use crate::field::{field_mean, integrate_values, ScalarField};
use crate::grid::Grid;
use crate::params::SimParams;

/// Surface tension `∫_{-1}^{1} √(W/2) ds`.
pub const SIGMA: f64 = 2.0 / 3.0;

/// `W(u) = ½(u² - 1)²`.
pub fn double_well(u: f64) -> f64 {
    0.5 * (u * u - 1.0).powi(2)
}

/// `f(u) = W'(u) = 2u(u² - 1)`.
pub fn double_well_prime(u: f64) -> f64 {
    2.0 * u * (u * u - 1.0)
}

/// `f'(u) = 6u² - 2`.
pub fn double_well_second(u: f64) -> f64 {
    6.0 * u * u - 2.0
}

pub fn sigma_const() -> f64 {
    SIGMA
}

/// Composite Simpson approximation of `∫_{-1}^{1} √(W(s)/2) ds`.
pub fn sigma_by_quadrature(panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = 2.0 / panels as f64;
    let g = |s: f64| (double_well(s) / 2.0).sqrt();
    let inner: f64 = (1..panels)
        .map(|i| {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            w * g(-1.0 + i as f64 * h)
        })
        .sum();
    h / 3.0 * (g(-1.0) + inner + g(1.0))
}

/// `tanh(d/ε)`: the heteroclinic solution of `ε q'' = f(q)/ε`.
pub fn optimal_profile(d: f64, eps: f64) -> f64 {
    (d / eps).tanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// Short-range part `∫ ε/2|∇u|² + W(u)/ε` (or `2σ·area` for a sharp interface).
    pub ac_part: f64,
    /// Long-range part `λ/2 ‖u - ū‖²_{H⁻¹}`.
    pub nonlocal_part: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(ac_part: f64, nonlocal_part: f64) -> Self {
        EnergyBreakdown {
            ac_part,
            nonlocal_part,
            total: ac_part + nonlocal_part,
        }
    }
}

fn warn_if_underresolved(grid: &Grid, eps: f64) {
    if grid.spacing() > eps / 4.0 {
        log::warn!(
            "grid spacing {} exceeds eps/4 = {}; the interface is under-resolved",
            grid.spacing(),
            eps / 4.0
        );
    }
}

/// `∫ ε/2|∇u|² + W(u)/ε` with the solver's own gradient discretization.
pub(crate) fn ac_energy_values(grid: &Grid, u: &[f64], eps: f64) -> f64 {
    let potential: Vec<f64> = u.iter().map(|&x| double_well(x) / eps).collect();
    0.5 * eps * elliptic::dirichlet_values(grid, u) + integrate_values(grid, &potential)
}

/// Mean-removed copy of `u`.
pub(crate) fn fluctuation(u: &ScalarField) -> ScalarField {
    let mean = field_mean(u).unwrap_or(0.0);
    u.shifted(-mean)
}

pub fn diffuse_energy(u: &ScalarField, params: &SimParams) -> Result<EnergyBreakdown> {
    u.validate()?;
    warn_if_underresolved(u.grid(), params.eps);
    let ac = ac_energy_values(u.grid(), u.values(), params.eps);
    let nonlocal = if params.lambda > 0.0 {
        0.5 * params.lambda * elliptic::hminus1_norm_sq_unchecked(&fluctuation(u))
    } else {
        0.0
    };
    Ok(EnergyBreakdown::new(ac, nonlocal))
}

/// The chemical potential `w` together with its local part `k = w + λv` and the
/// background potential `v = Δ⁻¹(u - ū)`.
#[derive(Debug, Clone)]
pub struct ChemicalPotential {
    pub w: ScalarField,
    pub k: ScalarField,
    pub v: ScalarField,
}

/// `w = εΔu - f(u)/ε - λv` with `-Δv = u - ū`, `v̄ = 0`.
///
/// This is exactly minus the discrete `L²` gradient of `diffuse_energy`.
pub fn chemical_potential(u: &ScalarField, params: &SimParams) -> Result<ChemicalPotential> {
    u.validate()?;
    warn_if_underresolved(u.grid(), params.eps);
    let eps = params.eps;
    let lap = elliptic::laplacian_apply(u)?;
    let k = lap
        .zip_with(u, |l, x| eps * l - double_well_prime(x) / eps)?;
    let v = elliptic::poisson_unchecked(&fluctuation(u));
    let w = k.zip_with(&v, |ki, vi| ki - params.lambda * vi)?;
    Ok(ChemicalPotential { w, k, v })
}

/// Pointwise `|∇u|²` at the nodes.
pub fn gradient_sq(u: &ScalarField) -> Result<ScalarField> {
    let g = elliptic::gradient(u)?;
    let mut out = vec![0.0; u.len()];
    for comp in &g {
        for (o, x) in out.iter_mut().zip(comp.values()) {
            *o += x * x;
        }
    }
    Ok(ScalarField::from_raw(u.grid().clone(), out))
}

/// `∫ |ε/2|∇u|² - W(u)/ε|`.
pub fn discrepancy_l1(u: &ScalarField, eps: f64) -> Result<f64> {
    let g2 = gradient_sq(u)?;
    let xi: Vec<f64> = g2
        .values()
        .iter()
        .zip(u.values())
        .map(|(g, &x)| (0.5 * eps * g - double_well(x) / eps).abs())
        .collect();
    Ok(integrate_values(u.grid(), &xi))
}

/// `∫|∇w|²`, the instantaneous dissipation rate.
pub fn dissipation_rate(w: &ScalarField) -> Result<f64> {
    elliptic::dirichlet_energy(w)
}

/// Face-centred radial flux of `w`, `∂_r w` at `r_{j+½}`.
pub fn radial_face_gradient(w: &ScalarField) -> Option<Vec<f64>> {
    match w.grid().as_ref() {
        Grid::Radial(r) => Some(radial::face_gradient(r, w.values())),
        Grid::Box(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxGrid;
    use std::sync::Arc;

    #[test]
    fn potential_values() {
        assert_eq!(double_well(1.0), 0.0);
        assert_eq!(double_well(-1.0), 0.0);
        assert_eq!(double_well_prime(1.0), 0.0);
        assert_eq!(double_well_prime(-1.0), 0.0);
        assert_eq!(double_well(0.0), 0.5);
        assert_eq!(double_well_prime(0.0), 0.0);
        let x = 1.0 / 3f64.sqrt();
        assert!((double_well_prime(x) + 4.0 / (3.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!((double_well_prime(x) + 0.76980).abs() < 1e-5);
    }

    #[test]
    fn sigma_matches_quadrature() {
        assert!((sigma_const() - 0.6666667).abs() < 1e-7);
        assert!((sigma_by_quadrature(10_000) - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn heteroclinic_energy_is_twice_sigma() {
        // ∫ √(2W(u)) du over [-1, 1], by the midpoint rule
        let n = 100_000;
        let h = 2.0 / n as f64;
        let e: f64 = (0..n)
            .map(|i| (2.0 * double_well(-1.0 + (i as f64 + 0.5) * h)).sqrt() * h)
            .sum();
        assert!((e - 2.0 * SIGMA).abs() < 1e-8);
    }

    #[test]
    fn profile_limits() {
        assert_eq!(optimal_profile(0.0, 0.1), 0.0);
        assert!((optimal_profile(10.0, 0.1) - 1.0).abs() < 1e-15);
        assert!((optimal_profile(-10.0, 0.1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn profile_residual_is_second_order() {
        let eps = 0.1;
        let residual = |h: f64| {
            (-200..=200)
                .map(|i| {
                    let d = i as f64 * h;
                    let q = |x: f64| optimal_profile(x, eps);
                    let qpp = (q(d + h) - 2.0 * q(d) + q(d - h)) / (h * h);
                    (eps * qpp - double_well_prime(q(d)) / eps).abs()
                })
                .fold(0.0, f64::max)
        };
        let (r1, r2) = (residual(1e-3), residual(5e-4));
        assert!(r1 < 1e-3);
        assert!((r1 / r2 - 4.0).abs() < 0.1, "{r1} {r2}");
    }

    #[test]
    fn constant_field_energy_and_potential() {
        let g: Arc<Grid> = Arc::new(BoxGrid::new(vec![1.0, 2.0], vec![16, 16]).unwrap().into());
        let p = SimParams::new(0.1, 2.0, 1.0).unwrap();
        let m = 0.3;
        let u = ScalarField::constant(g, m);
        let e = diffuse_energy(&u, &p).unwrap();
        assert!((e.ac_part - double_well(m) / 0.1 * 2.0).abs() < 1e-12);
        assert_eq!(e.nonlocal_part, 0.0);
        let mu = chemical_potential(&u, &p).unwrap();
        for w in mu.w.values() {
            assert!((w + double_well_prime(m) / 0.1).abs() < 1e-12);
        }
        let d = discrepancy_l1(&u, 0.1).unwrap();
        assert!((d - 2.0 * double_well(m) / 0.1).abs() < 1e-12);
    }
}
