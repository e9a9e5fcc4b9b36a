//! Well-prepared initial data: tanh of the signed distance to the nearest interface.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::optimal_profile;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

/// Interface positions along the single coordinate of a 1D box or radial grid,
/// and the phase (`±1`) below the first one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub positions: Vec<f64>,
    pub first_phase: f64,
}

impl InterfaceSpec {
    pub fn new(positions: Vec<f64>, first_phase: f64) -> Result<Self> {
        if first_phase != 1.0 && first_phase != -1.0 {
            return Err(Error::param("geometry.innermost_phase", "must be +1 or -1"));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("geometry.radii", "must be strictly ascending"));
        }
        Ok(InterfaceSpec {
            positions,
            first_phase,
        })
    }

    /// Phase of the region containing `x`.
    pub fn phase_at(&self, x: f64) -> f64 {
        let crossed = self.positions.iter().filter(|&&p| p < x).count();
        if crossed % 2 == 0 {
            self.first_phase
        } else {
            -self.first_phase
        }
    }

    pub fn min_separation(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// A prepared field plus any warnings about degraded well-preparedness.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub field: ScalarField,
    pub warnings: Vec<String>,
}

/// `u(x) = s(x) tanh(d(x)/ε)` with `d` the distance to the nearest interface and
/// `s` the phase of the region containing `x`. No domain checks.
pub fn layered_profile(grid: Arc<Grid>, spec: &InterfaceSpec, eps: f64) -> ScalarField {
    ScalarField::from_fn(grid, |c| {
        let x = c[0];
        let d = spec
            .positions
            .iter()
            .map(|p| (x - p).abs())
            .fold(f64::INFINITY, f64::min);
        spec.phase_at(x) * optimal_profile(d, eps)
    })
}

pub fn well_prepared_init(spec: &InterfaceSpec, eps: f64, grid: Arc<Grid>) -> Result<Prepared> {
    if !(eps > 0.0) {
        return Err(Error::param("params.eps", "must be positive"));
    }
    let upper = match grid.as_ref() {
        Grid::Box(b) if b.dim() == 1 => b.lengths()[0],
        Grid::Radial(_) => 1.0,
        Grid::Box(_) => {
            return Err(Error::UnsupportedDomain {
                op: "well_prepared_init",
                domain: "2D box",
            })
        }
    };
    if spec.positions.iter().any(|&p| !(p > 0.0 && p < upper)) {
        return Err(Error::param(
            "geometry.radii",
            format!("interfaces must lie strictly inside (0, {upper})"),
        ));
    }
    let mut warnings = Vec::new();
    // r = 0 is not a boundary of the ball
    let lower = if matches!(grid.as_ref(), Grid::Radial(_)) { f64::NEG_INFINITY } else { 0.0 };
    let first = spec.positions.first().map_or(f64::INFINITY, |p| p - lower);
    let last = spec.positions.last().map_or(f64::INFINITY, |p| upper - p);
    let min_gap = spec.min_separation().min(first).min(last);
    if min_gap < 10.0 * eps {
        let msg = format!(
            "interfaces {min_gap:.4} apart (< 10 eps = {:.4}); profiles overlap and well-preparedness is degraded",
            10.0 * eps
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(Prepared {
        field: layered_profile(grid, spec, eps),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn single_sphere_profile() {
        let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 401).unwrap().into());
        let spec = InterfaceSpec::new(vec![0.5], -1.0).unwrap();
        let p = well_prepared_init(&spec, 0.02, g).unwrap();
        assert!(p.warnings.is_empty());
        let u = p.field.values();
        assert!((u[0] + 1.0).abs() < 1e-9);
        assert!((u[u.len() - 1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn close_interfaces_warn() {
        let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 401).unwrap().into());
        let spec = InterfaceSpec::new(vec![0.47, 0.5, 0.53], -1.0).unwrap();
        let p = well_prepared_init(&spec, 0.01, g).unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn rejects_unsorted_or_outside() {
        assert!(InterfaceSpec::new(vec![0.7, 0.4], -1.0).is_err());
        let g: Arc<Grid> = Arc::new(RadialGrid::new(3, 101).unwrap().into());
        let spec = InterfaceSpec::new(vec![0.5, 1.2], -1.0).unwrap();
        assert!(well_prepared_init(&spec, 0.01, g).is_err());
    }
}
