//! Grid-sampled scalar fields and the quadrature shared by every integral in the crate.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let field = ScalarField { grid, values };
        field.validate()?;
        Ok(field)
    }

    /// Wraps values without checking finiteness. Length is still checked.
    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        ScalarField { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.node_count();
        ScalarField::from_raw(grid, vec![c; n])
    }

    /// Samples `f` at every node; `f` receives the node coordinates (radius for radial grids).
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = match grid.as_ref() {
            Grid::Box(b) => (0..b.node_count()).map(|i| f(&b.point(i))).collect(),
            Grid::Radial(r) => r.coords().into_iter().map(|x| f(&[x])).collect(),
        };
        ScalarField::from_raw(grid, values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.node_count() {
            return Err(Error::Structural(format!(
                "{} values for a grid of {} nodes",
                self.values.len(),
                self.grid.node_count()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structural(format!("non-finite value at node {i}")));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        Ok(ScalarField::from_raw(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::Structural("fields live on different grids".into()))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn shifted(&self, c: f64) -> ScalarField {
        self.map(|v| v + c)
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        self.map(|v| v * c)
    }
}

/// Discrete `∫_Ω f dx`: midpoint rule on box cells, exact shell moments on radial grids.
pub fn quadrature_integral(f: &ScalarField) -> Result<f64> {
    if f.values.len() != f.grid.node_count() {
        return Err(Error::Structural(format!(
            "{} values for a grid of {} nodes",
            f.values.len(),
            f.grid.node_count()
        )));
    }
    Ok(integrate_values(&f.grid, &f.values))
}

pub(crate) fn integrate_values(grid: &Grid, values: &[f64]) -> f64 {
    match grid {
        Grid::Box(b) => b.cell_volume() * values.iter().sum::<f64>(),
        Grid::Radial(r) => {
            r.sphere_area()
                * r.shell_moments()
                    .iter()
                    .zip(values)
                    .map(|(m, v)| m * v)
                    .sum::<f64>()
        }
    }
}

/// Average of `f` over the domain, with `|Ω|` from the same quadrature.
pub fn field_mean(f: &ScalarField) -> Result<f64> {
    let volume = integrate_values(&f.grid, &vec![1.0; f.grid.node_count()]);
    Ok(quadrature_integral(f)? / volume)
}

/// `∫ f g dx`.
pub fn inner_product(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    f.check_same_grid(g)?;
    let prod: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect();
    Ok(integrate_values(&f.grid, &prod))
}

/// `‖f‖_{L²}`.
pub fn l2_norm(f: &ScalarField) -> Result<f64> {
    Ok(inner_product(f, f)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxGrid, RadialGrid};
    use std::f64::consts::PI;

    #[test]
    fn constant_on_unit_square_integrates_to_one() {
        let g = Arc::new(Grid::Box(BoxGrid::new(vec![1.0, 1.0], vec![64, 64]).unwrap()));
        let f = ScalarField::constant(g, 1.0);
        assert_eq!(quadrature_integral(&f).unwrap(), 1.0);
    }

    #[test]
    fn constant_on_ball_gives_ball_volume() {
        let g = Arc::new(Grid::Radial(RadialGrid::new(3, 64).unwrap()));
        let f = ScalarField::constant(g, 1.0);
        assert!((quadrature_integral(&f).unwrap() - 4.0 * PI / 3.0).abs() < 1e-6);
    }

    #[test]
    fn sine_integral_matches_antiderivative() {
        let g = Arc::new(Grid::Box(BoxGrid::unit_interval(256).unwrap()));
        let f = ScalarField::from_fn(g, |x| (PI * x[0]).sin());
        assert!((quadrature_integral(&f).unwrap() - 2.0 / PI).abs() < 1e-5);
    }

    #[test]
    fn mean_of_constant_and_odd_fields() {
        let g = Arc::new(Grid::Box(BoxGrid::unit_interval(128).unwrap()));
        assert!((field_mean(&ScalarField::constant(g.clone(), -0.3)).unwrap() + 0.3).abs() < 1e-15);
        let f = ScalarField::from_fn(g, |x| (PI * x[0]).cos());
        assert!(field_mean(&f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mismatched_sizes_are_structural_errors() {
        let g = Arc::new(Grid::Box(BoxGrid::unit_interval(16).unwrap()));
        assert!(matches!(
            ScalarField::new(g.clone(), vec![0.0; 15]),
            Err(Error::Structural(_))
        ));
        let bad = ScalarField { grid: g, values: vec![0.0; 3] };
        assert!(quadrature_integral(&bad).is_err());
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = Arc::new(Grid::Box(BoxGrid::unit_interval(16).unwrap()));
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(ScalarField::new(g, v).is_err());
    }
}
