//! Zero-level-set extraction and multiplicity estimation on one-dimensional grids.

use serde::{Deserialize, Serialize};

use super::{ac_energy_values, SIGMA};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{unit_sphere_area, Grid};

/// Crossings closer than `CLUSTER_WIDTH · ε` are treated as one folded layer.
pub const CLUSTER_WIDTH: f64 = 3.0;

/// Linearly interpolated zero crossings of `u`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceEstimate {
    pub radii: Vec<f64>,
    /// Sign of `u` at the first node (`0` for an identically zero field).
    pub first_phase: f64,
}

impl InterfaceEstimate {
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }
}

pub fn extract_interface(u: &ScalarField) -> Result<InterfaceEstimate> {
    let x = u.grid().line_coords().ok_or(Error::UnsupportedDomain {
        op: "extract_interface",
        domain: "2D box",
    })?;
    let v = u.values();
    let positive = |a: f64| a > 0.0;
    let mut radii = Vec::new();
    for j in 0..v.len() - 1 {
        if positive(v[j]) != positive(v[j + 1]) {
            let t = v[j] / (v[j] - v[j + 1]);
            let r = x[j] + t * (x[j + 1] - x[j]);
            // guards against a repeated root when v[j] is exactly zero
            if radii.last().map_or(true, |&last| r > last) {
                radii.push(r);
            }
        }
    }
    let first_phase = if v[0] > 0.0 {
        1.0
    } else if v[0] < 0.0 {
        -1.0
    } else {
        0.0
    };
    Ok(InterfaceEstimate { radii, first_phase })
}

/// The sharp interface seen by the limit: crossings within `CLUSTER_WIDTH · ε` are
/// grouped; an odd group is one interface (at its median crossing), an even group
/// folds back on itself and leaves no phase boundary.
pub fn limit_interface(est: &InterfaceEstimate, eps: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    let flush = |group: &mut Vec<f64>, out: &mut Vec<f64>| {
        if group.len() % 2 == 1 {
            out.push(group[group.len() / 2]);
        }
        group.clear();
    };
    for &r in &est.radii {
        if let Some(&last) = group.last() {
            if r - last > CLUSTER_WIDTH * eps {
                flush(&mut group, &mut out);
            }
        }
        group.push(r);
    }
    flush(&mut group, &mut out);
    out
}

/// `H^{N-1}` of a family of interfaces: a point count in 1D, `Σ ω_N r^{N-1}` radially.
pub fn interface_measure(grid: &Grid, radii: &[f64]) -> Result<f64> {
    match grid {
        Grid::Box(b) if b.dim() == 1 => Ok(radii.len() as f64),
        Grid::Radial(r) => {
            let n = r.space_dim();
            Ok(radii.iter().map(|x| unit_sphere_area(n) * x.powi(n as i32 - 1)).sum())
        }
        Grid::Box(_) => Err(Error::UnsupportedDomain {
            op: "interface_measure",
            domain: "2D box",
        }),
    }
}

/// Short-range energy per unit of limit-interface area, in units of `2σ`.
pub fn estimate_multiplicity(u: &ScalarField, eps: f64) -> Result<f64> {
    let est = extract_interface(u)?;
    let gamma = limit_interface(&est, eps);
    if gamma.is_empty() {
        return Err(Error::EmptyInterface);
    }
    let area = interface_measure(u.grid(), &gamma)?;
    Ok(ac_energy_values(u.grid(), u.values(), eps) / (2.0 * SIGMA * area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxGrid, RadialGrid};
    use crate::phasefield::{layered_profile, InterfaceSpec};
    use std::sync::Arc;

    fn ball() -> Arc<Grid> {
        Arc::new(RadialGrid::new(3, 801).unwrap().into())
    }

    #[test]
    fn tanh_crossing() {
        let g = ball();
        let h = g.spacing();
        let u = ScalarField::from_fn(g, |r| ((r[0] - 0.5) / 0.02).tanh());
        let est = extract_interface(&u).unwrap();
        assert_eq!(est.radii.len(), 1);
        assert!((est.radii[0] - 0.5).abs() <= h);
        assert_eq!(est.first_phase, -1.0);
    }

    #[test]
    fn constant_has_no_interface() {
        let u = ScalarField::constant(ball(), 0.7);
        assert!(extract_interface(&u).unwrap().is_empty());
        assert!(matches!(estimate_multiplicity(&u, 0.01), Err(Error::EmptyInterface)));
    }

    #[test]
    fn two_interfaces() {
        let g = ball();
        let h = g.spacing();
        let spec = InterfaceSpec::new(vec![0.4, 0.7], -1.0).unwrap();
        let u = layered_profile(g, &spec, 0.02);
        let est = extract_interface(&u).unwrap();
        assert_eq!(est.radii.len(), 2);
        assert!((est.radii[0] - 0.4).abs() <= h && (est.radii[1] - 0.7).abs() <= h);
    }

    #[test]
    fn folded_layers_are_grouped() {
        let est = InterfaceEstimate {
            radii: vec![0.2, 0.48, 0.5, 0.52, 0.8, 0.81],
            first_phase: 1.0,
        };
        assert_eq!(limit_interface(&est, 0.01), vec![0.2, 0.5]);
    }

    #[test]
    fn single_and_triple_multiplicity() {
        let eps = 0.01;
        let g = ball();
        let one = layered_profile(g.clone(), &InterfaceSpec::new(vec![0.5], -1.0).unwrap(), eps);
        let m1 = estimate_multiplicity(&one, eps).unwrap();
        assert!((m1 - 1.0).abs() < 0.1, "{m1}");
        let fold = InterfaceSpec::new(vec![0.5 - 2.0 * eps, 0.5, 0.5 + 2.0 * eps], -1.0).unwrap();
        let m3 = estimate_multiplicity(&layered_profile(g, &fold, eps), eps).unwrap();
        assert!((m3 - 3.0).abs() < 0.5, "{m3}");
        // Layers 4ε apart are separate interfaces.
        let apart = InterfaceSpec::new(vec![0.46, 0.5, 0.54], -1.0).unwrap();
        assert_eq!(limit_interface(&extract_interface(&layered_profile(ball(), &apart, eps)).unwrap(), eps).len(), 3);
    }

    #[test]
    fn one_dimensional_measure_counts_points() {
        let g: Grid = BoxGrid::unit_interval(64).unwrap().into();
        assert_eq!(interface_measure(&g, &[0.3, 0.6]).unwrap(), 2.0);
    }
}
