//! Neumann elliptic solves: `Δ⁻¹`, the `H⁻¹` inner product and the Laplacian.
//!
//! Box grids use the cosine expansion, which diagonalizes `-Δ` with exact Neumann
//! conditions. Radial grids use the conservative finite-volume operators, whose
//! Poisson solve is an exact outward flux integration.

mod cosine;
pub(crate) mod radial;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{field_mean, integrate_values, ScalarField};
use crate::grid::{BoxGrid, Grid};

/// Default tolerance of the zero-mean preconditions, relative to `max(1, ‖f‖∞)`.
pub const TOL_MEAN: f64 = 1e-10;

/// Cosine amplitudes of a box field together with the `-Δ` eigenvalue of each mode.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl SpectralField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn box_grid(&self) -> &BoxGrid {
        match self.grid.as_ref() {
            Grid::Box(b) => b,
            Grid::Radial(_) => unreachable!("spectral fields only exist on boxes"),
        }
    }
}

fn require_box<'a>(op: &'static str, f: &'a ScalarField) -> Result<&'a BoxGrid> {
    match f.grid().as_ref() {
        Grid::Box(b) => Ok(b),
        Grid::Radial(_) => Err(Error::UnsupportedDomain {
            op,
            domain: "radial",
        }),
    }
}

pub fn to_spectral(f: &ScalarField) -> Result<SpectralField> {
    let b = require_box("to_spectral", f)?;
    f.validate()?;
    Ok(SpectralField {
        grid: f.grid().clone(),
        coeffs: cosine::analyze(b, f.values()),
        eigenvalues: cosine::eigenvalues(b),
    })
}

pub fn from_spectral(s: &SpectralField) -> ScalarField {
    let values = cosine::synthesize(s.box_grid(), &s.coeffs, None);
    ScalarField::from_raw(s.grid.clone(), values)
}

/// `-Δ` eigenvalues of a box in coefficient order.
pub fn box_eigenvalues(grid: &BoxGrid) -> Vec<f64> {
    cosine::eigenvalues(grid)
}

pub(crate) fn box_analyze(grid: &BoxGrid, values: &[f64]) -> Vec<f64> {
    cosine::analyze(grid, values)
}

pub(crate) fn box_synthesize(grid: &BoxGrid, coeffs: &[f64]) -> Vec<f64> {
    cosine::synthesize(grid, coeffs, None)
}

/// Fails unless `|mean(f)| ≤ TOL_MEAN · max(1, ‖f‖∞)`.
pub fn check_mean_zero(op: &'static str, f: &ScalarField) -> Result<()> {
    let mean = field_mean(f)?;
    let tol = TOL_MEAN * f.max_abs().max(1.0);
    if mean.abs() > tol {
        return Err(Error::NonzeroMean { op, mean, tol });
    }
    Ok(())
}

/// Mean-zero solution of `-Δv = f` with homogeneous Neumann data.
pub fn neumann_poisson_solve(f: &ScalarField) -> Result<ScalarField> {
    f.validate()?;
    check_mean_zero("neumann_poisson_solve", f)?;
    Ok(poisson_unchecked(f))
}

/// The solve without the mean check; the mean of `f` is projected out.
pub(crate) fn poisson_unchecked(f: &ScalarField) -> ScalarField {
    let values = match f.grid().as_ref() {
        Grid::Box(b) => {
            let mut c = cosine::analyze(b, f.values());
            let mu = cosine::eigenvalues(b);
            c[0] = 0.0;
            for (ck, m) in c.iter_mut().zip(&mu).skip(1) {
                *ck /= m;
            }
            cosine::synthesize(b, &c, None)
        }
        Grid::Radial(r) => {
            let mean = field_mean(f).unwrap_or(0.0);
            let g: Vec<f64> = f.values().iter().map(|x| x - mean).collect();
            radial::poisson(r, &g)
        }
    };
    ScalarField::from_raw(f.grid().clone(), values)
}

/// `‖f‖²_{H⁻¹} = ∫|∇Δ⁻¹f|²`.
pub fn hminus1_norm_sq(f: &ScalarField) -> Result<f64> {
    f.validate()?;
    check_mean_zero("hminus1_norm_sq", f)?;
    Ok(hminus1_norm_sq_unchecked(f))
}

pub(crate) fn hminus1_norm_sq_unchecked(f: &ScalarField) -> f64 {
    match f.grid().as_ref() {
        Grid::Box(b) => {
            let c = cosine::analyze(b, f.values());
            let mu = cosine::eigenvalues(b);
            let w = cosine::mode_weights(b);
            b.volume()
                * (1..c.len())
                    .map(|k| w[k] * c[k] * c[k] / mu[k])
                    .sum::<f64>()
        }
        Grid::Radial(r) => {
            let mean = field_mean(f).unwrap_or(0.0);
            let g: Vec<f64> = f.values().iter().map(|x| x - mean).collect();
            radial::hminus1_norm_sq(r, &g)
        }
    }
}

/// `⟨f, g⟩_{H⁻¹} = ∫ ∇Δ⁻¹f · ∇Δ⁻¹g`.
pub fn hminus1_inner(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    f.check_same_grid(g)?;
    check_mean_zero("hminus1_inner", f)?;
    check_mean_zero("hminus1_inner", g)?;
    let v = poisson_unchecked(g);
    Ok(integrate_values(
        f.grid(),
        &f.values().iter().zip(v.values()).map(|(a, b)| a * b).collect::<Vec<_>>(),
    ))
}

/// `Δf`: spectral on boxes, conservative finite volumes on radial grids.
pub fn laplacian_apply(f: &ScalarField) -> Result<ScalarField> {
    f.validate()?;
    let values = match f.grid().as_ref() {
        Grid::Box(b) => {
            let mut c = cosine::analyze(b, f.values());
            for (ck, m) in c.iter_mut().zip(cosine::eigenvalues(b)) {
                *ck *= -m;
            }
            cosine::synthesize(b, &c, None)
        }
        Grid::Radial(r) => radial::laplacian(r, f.values()),
    };
    Ok(ScalarField::from_raw(f.grid().clone(), values))
}

/// Nodal gradient, one component per axis (a single `∂_r` component on radial grids).
pub fn gradient(f: &ScalarField) -> Result<Vec<ScalarField>> {
    f.validate()?;
    Ok(match f.grid().as_ref() {
        Grid::Box(b) => {
            let c = cosine::analyze(b, f.values());
            (0..b.dim())
                .map(|axis| {
                    ScalarField::from_raw(f.grid().clone(), cosine::synthesize(b, &c, Some(axis)))
                })
                .collect()
        }
        Grid::Radial(r) => vec![ScalarField::from_raw(
            f.grid().clone(),
            radial::gradient(r, f.values()),
        )],
    })
}

/// `∫|∇f|²` in the discretization that pairs with `laplacian_apply`:
/// `∫|∇f|² = -∫ f Δf` holds to round-off.
pub fn dirichlet_energy(f: &ScalarField) -> Result<f64> {
    f.validate()?;
    Ok(dirichlet_values(f.grid(), f.values()))
}

pub(crate) fn dirichlet_values(grid: &Grid, values: &[f64]) -> f64 {
    match grid {
        Grid::Box(b) => {
            let c = cosine::analyze(b, values);
            let mu = cosine::eigenvalues(b);
            let w = cosine::mode_weights(b);
            b.volume() * (1..c.len()).map(|k| w[k] * mu[k] * c[k] * c[k]).sum::<f64>()
        }
        Grid::Radial(r) => radial::dirichlet(r, values, values),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(cells: usize) -> Arc<Grid> {
        Arc::new(BoxGrid::unit_interval(cells).unwrap().into())
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let s = to_spectral(&ScalarField::constant(line(32), 2.5)).unwrap();
        assert!((s.coeffs()[0] - 2.5).abs() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-14));
        assert_eq!(s.eigenvalues()[0], 0.0);
        assert!(s.eigenvalues()[1..].iter().all(|&m| m > 0.0));
    }

    #[test]
    fn cosine_is_a_single_mode() {
        let f = ScalarField::from_fn(line(64), |x| (PI * x[0]).cos());
        let s = to_spectral(&f).unwrap();
        for (k, c) in s.coeffs().iter().enumerate() {
            let expect = if k == 1 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-13, "mode {k}: {c}");
        }
    }

    #[test]
    fn radial_input_is_unsupported() {
        let g: Arc<Grid> = Arc::new(crate::grid::RadialGrid::new(3, 64).unwrap().into());
        let err = to_spectral(&ScalarField::constant(g, 1.0)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDomain { .. }));
    }

    #[test]
    fn poisson_of_cosine() {
        let g = line(128);
        let f = ScalarField::from_fn(g, |x| (PI * x[0]).cos());
        let v = neumann_poisson_solve(&f).unwrap();
        for (vi, fi) in v.values().iter().zip(f.values()) {
            assert!((vi - fi / (PI * PI)).abs() < 1e-14);
        }
        assert!((hminus1_norm_sq(&f).unwrap() - 1.0 / (2.0 * PI * PI)).abs() < 1e-14);
    }

    #[test]
    fn laplacian_of_cosine() {
        let f = ScalarField::from_fn(line(128), |x| (2.0 * PI * x[0]).cos());
        let l = laplacian_apply(&f).unwrap();
        for (li, fi) in l.values().iter().zip(f.values()) {
            assert!((li + 4.0 * PI * PI * fi).abs() < 1e-10);
        }
    }

    #[test]
    fn nonzero_mean_is_rejected_with_value() {
        let f = ScalarField::constant(line(16), 0.25);
        match neumann_poisson_solve(&f).unwrap_err() {
            Error::NonzeroMean { mean, .. } => assert!((mean - 0.25).abs() < 1e-15),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn derivative_of_cosine_2d() {
        let g: Arc<Grid> = Arc::new(BoxGrid::new(vec![1.0, 2.0], vec![32, 48]).unwrap().into());
        let f = ScalarField::from_fn(g, |x| (PI * x[0]).cos() * (PI * x[1]).cos());
        let d = gradient(&f).unwrap();
        let gx = ScalarField::from_fn(f.grid().clone(), |x| -PI * (PI * x[0]).sin() * (PI * x[1]).cos());
        let gy = ScalarField::from_fn(f.grid().clone(), |x| -PI * (PI * x[0]).cos() * (PI * x[1]).sin());
        for i in 0..f.len() {
            assert!((d[0].values()[i] - gx.values()[i]).abs() < 1e-12);
            assert!((d[1].values()[i] - gy.values()[i]).abs() < 1e-12);
        }
    }
}
