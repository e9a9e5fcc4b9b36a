//! Radial vector fields built from plateau bumps, the transport field `V^ε`, and
//! the pushed-forward energy `E_ε(u ∘ χ_τ⁻¹)` with `χ_τ(x) = x + τV(x)`.

use crate::elliptic;
use crate::error::{Error, Result};
use crate::field::{integrate_values, ScalarField};
use crate::grid::Grid;
use crate::params::SimParams;
use crate::phasefield::diffuse_energy;
use crate::sharp::SphereFamily;

/// `C²` plateau bump: 1 on `|r - c| ≤ a/2`, 0 beyond `a`, quintic smoothstep between.
/// Returns value and derivative.
pub fn bump(r: f64, center: f64, half_width: f64) -> (f64, f64) {
    let d = r - center;
    let a = half_width;
    if d.abs() <= 0.5 * a {
        return (1.0, 0.0);
    }
    if d.abs() >= a {
        return (0.0, 0.0);
    }
    let x = (a - d.abs()) / (0.5 * a);
    let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x);
    (s, -ds * d.signum() / (0.5 * a))
}

/// `V(r) e_r = Σ amplitude · bump(r; center, half_width) e_r`.
#[derive(Debug, Clone, Default)]
pub struct RadialField {
    pieces: Vec<(f64, f64, f64)>,
}

impl RadialField {
    pub fn zero() -> Self {
        RadialField::default()
    }

    pub fn with_bump(mut self, center: f64, half_width: f64, amplitude: f64) -> Self {
        if amplitude != 0.0 {
            self.pieces.push((center, half_width, amplitude));
        }
        self
    }

    pub fn value(&self, r: f64) -> f64 {
        self.pieces.iter().map(|&(c, a, m)| m * bump(r, c, a).0).sum()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.pieces.iter().map(|&(c, a, m)| m * bump(r, c, a).1).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// `sup |V|`, sampled finely enough to catch the plateaus.
    pub fn max_abs(&self) -> f64 {
        self.pieces
            .iter()
            .map(|&(c, ..)| self.value(c).abs())
            .fold(0.0, f64::max)
    }

    fn min_jacobian(&self, tau: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|j| 1.0 + tau * self.derivative(j as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Half-width of the bumps around a family: a quarter of its clearance.
pub fn bump_half_width(family: &SphereFamily) -> f64 {
    0.25 * family.clearance()
}

/// Radial extension of sphere rates `ṙ_i` by bumps around each sphere.
pub fn transport_field(family: &SphereFamily, radial_rates: &[f64]) -> RadialField {
    let a = bump_half_width(family);
    family
        .radii()
        .iter()
        .zip(radial_rates)
        .fold(RadialField::zero(), |f, (&r, &v)| f.with_bump(r, a, v))
}

fn radial_grid(u: &ScalarField) -> Result<&crate::grid::RadialGrid> {
    match u.grid().as_ref() {
        Grid::Radial(g) => Ok(g),
        Grid::Box(_) => Err(Error::UnsupportedDomain {
            op: "deformation",
            domain: "box",
        }),
    }
}

/// Nodal `V·∇u`.
pub fn advection(u: &ScalarField, field: &RadialField) -> Result<ScalarField> {
    let g = radial_grid(u)?;
    let du = elliptic::gradient(u)?.remove(0);
    let vals = g.coords().iter().zip(du.values()).map(|(&r, d)| field.value(r) * d).collect();
    ScalarField::new(u.grid().clone(), vals)
}

/// `V^ε = V + hφ` with `h = -∫∇u·V / ∫∇u·φ`, so that `∫ V^ε·∇u = 0`.
///
/// This is `h = -∫(u+1) div V / ∫(u+1) div φ` after integrating by parts (both
/// fields vanish near `r = 0` and `r = 1`).
pub fn corrected_field(u: &ScalarField, v: &RadialField, phi: &RadialField) -> Result<(RadialField, f64)> {
    let num = integrate_values(u.grid(), advection(u, v)?.values());
    let den = integrate_values(u.grid(), advection(u, phi)?.values());
    if den.abs() < 1e-8 {
        return Err(Error::InadmissibleBump { denominator: den });
    }
    let h = if num == 0.0 { 0.0 } else { -num / den };
    let mut out = v.clone();
    out.pieces.extend(phi.pieces.iter().map(|&(c, a, m)| (c, a, h * m)));
    Ok((out, h))
}

/// `u ∘ χ_τ⁻¹` on the nodes: Newton inversion of `s + τV(s) = r`, then cubic
/// Lagrange interpolation of `u` at `s`.
pub fn push_forward(u: &ScalarField, field: &RadialField, tau: f64) -> Result<ScalarField> {
    let g = radial_grid(u)?;
    let h = g.spacing();
    let n = g.nodes();
    let vals = u.values();
    let out: Vec<f64> = g
        .coords()
        .iter()
        .zip(vals)
        .map(|(&r, &own)| {
            if tau * field.value(r) == 0.0 && tau * field.derivative(r) == 0.0 {
                return own;
            }
            let mut s = r - tau * field.value(r);
            for _ in 0..50 {
                let res = s + tau * field.value(s) - r;
                if res.abs() < 1e-15 {
                    break;
                }
                s -= res / (1.0 + tau * field.derivative(s));
            }
            let x = (s / h).clamp(0.0, (n - 1) as f64);
            let j = (x.floor() as usize).clamp(1, n - 3);
            let t = x - j as f64;
            let w = [
                -t * (t - 1.0) * (t - 2.0) / 6.0,
                (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                -(t + 1.0) * t * (t - 2.0) / 2.0,
                (t + 1.0) * t * (t - 1.0) / 6.0,
            ];
            (0..4).map(|k| w[k] * vals[j - 1 + k]).sum()
        })
        .collect();
    ScalarField::new(u.grid().clone(), out)
}

/// `E_ε(u ∘ χ_τ⁻¹)`. Fails if `χ_τ` is not injective.
pub fn deformed_energy(u: &ScalarField, field: &RadialField, tau: f64, params: &SimParams) -> Result<f64> {
    let n = radial_grid(u)?.nodes();
    if field.min_jacobian(tau, 8 * n) <= 0.0 {
        return Err(Error::DeformationNotInjective);
    }
    Ok(diffuse_energy(&push_forward(u, field, tau)?, params)?.total)
}

/// Central difference of `τ ↦ E_ε(u ∘ χ_τ⁻¹)` at 0. The probe step starts at
/// `tau0` and is halved until `χ_{±τ}` is injective.
pub fn energy_slope(u: &ScalarField, field: &RadialField, tau0: f64, params: &SimParams) -> Result<(f64, f64)> {
    if field.is_zero() {
        return Ok((0.0, tau0));
    }
    let n = radial_grid(u)?.nodes();
    let mut tau = tau0;
    while field.min_jacobian(tau, 8 * n) <= 0.0 || field.min_jacobian(-tau, 8 * n) <= 0.0 {
        tau *= 0.5;
        if tau < 1e-8 {
            return Err(Error::DeformationNotInjective);
        }
    }
    let plus = deformed_energy(u, field, tau, params)?;
    let minus = deformed_energy(u, field, -tau, params)?;
    Ok(((plus - minus) / (2.0 * tau), tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::phasefield::layered_profile;
    use std::sync::Arc;

    #[test]
    fn bump_is_c2_and_supported() {
        let (c, a) = (0.5, 0.1);
        assert_eq!(bump(0.5 + 0.04, c, a), (1.0, 0.0));
        assert_eq!(bump(0.5 + 0.11, c, a), (0.0, 0.0));
        let hh = 1e-6;
        for &r in &[0.43, 0.47, 0.56, 0.58] {
            let fd = (bump(r + hh, c, a).0 - bump(r - hh, c, a).0) / (2.0 * hh);
            assert!((fd - bump(r, c, a).1).abs() < 1e-6);
        }
        // Second derivative vanishes at the joins.
        for &r in &[0.45, 0.6] {
            let d2 = (bump(r + hh, c, a).1 - bump(r - hh, c, a).1) / (2.0 * hh);
            assert!(d2.abs() < 1.0, "{d2}");
        }
    }

    #[test]
    fn zero_field_leaves_the_state_alone() {
        let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 201).unwrap().into());
        let fam = SphereFamily::new(vec![0.4, 0.7], -1.0, 3).unwrap();
        let u = layered_profile(g, &fam.to_interface_spec(), 0.04);
        let moved = push_forward(&u, &RadialField::zero(), 0.3).unwrap();
        assert_eq!(moved.values(), u.values());
        let p = SimParams::new(0.04, 1.0, 1.0).unwrap();
        assert_eq!(energy_slope(&u, &RadialField::zero(), 0.1, &p).unwrap().0, 0.0);
    }

    #[test]
    fn corrected_field_has_zero_flux_against_grad_u() {
        let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 401).unwrap().into());
        let fam = SphereFamily::new(vec![0.4, 0.7], -1.0, 3).unwrap();
        let u = layered_profile(g, &fam.to_interface_spec(), 0.02);
        let v = transport_field(&fam, &[1.0, 0.3]);
        let phi = RadialField::zero().with_bump(0.4, bump_half_width(&fam), 1.0);
        let (ve, h) = corrected_field(&u, &v, &phi).unwrap();
        // Fluxes 2ω(0.16·1 - 0.49·0.3) against 2ω·0.16.
        assert!((h + 0.013 / 0.16).abs() < 5e-3, "{h}");
        let flux = integrate_values(u.grid(), advection(&u, &ve).unwrap().values());
        assert!(flux.abs() < 1e-12, "{flux}");
        let flat = layered_profile(u.grid().clone(), &fam.with_radii(vec![0.3]).unwrap().to_interface_spec(), 0.02);
        assert!(matches!(
            corrected_field(&flat, &v, &RadialField::zero().with_bump(0.8, 0.05, 1.0)),
            Err(Error::InadmissibleBump { .. })
        ));
    }

    #[test]
    fn rigid_shift_moves_the_profile() {
        // On the plateau the deformation is a translation by τ.
        let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 801).unwrap().into());
        let fam = SphereFamily::new(vec![0.5], -1.0, 3).unwrap();
        let eps = 0.02;
        let u = layered_profile(g.clone(), &fam.to_interface_spec(), eps);
        let field = RadialField::zero().with_bump(0.5, 0.2, 1.0);
        let tau = 0.01;
        let moved = push_forward(&u, &field, tau).unwrap();
        let shifted = layered_profile(g, &fam.with_radii(vec![0.51]).unwrap().to_interface_spec(), eps);
        let err = moved
            .values()
            .iter()
            .zip(shifted.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }
}
