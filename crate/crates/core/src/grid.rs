//! Uniform grids: rectangular boxes (cell-centred nodes) and the radial mesh of the unit ball.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum cells per box axis.
pub const MIN_BOX_CELLS: usize = 8;
/// Minimum nodes of a radial grid.
pub const MIN_RADIAL_NODES: usize = 64;

/// Area of the unit (N-1)-sphere. `N = 1` is the slab convention (weight 1).
pub fn unit_sphere_area(space_dim: usize) -> f64 {
    match space_dim {
        0 => panic!("space dimension must be positive"),
        1 => 1.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        n => 2.0 * PI * unit_sphere_area(n - 2) / (n - 2) as f64,
    }
}

/// Rectangular box `(0, L_0) x ... ` with cell-centred nodes `x_j = (j + 1/2) h`.
///
/// Cell-centred nodes are the natural sample points of the type-II cosine basis,
/// which carries homogeneous Neumann conditions on every face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    lengths: Vec<f64>,
    cells: Vec<usize>,
}

impl BoxGrid {
    pub fn new(lengths: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "box dimension must be 1 or 2, got {}",
                lengths.len()
            )));
        }
        if lengths.len() != cells.len() {
            return Err(Error::InvalidGrid("lengths and cells differ in length".into()));
        }
        for (axis, (&l, &n)) in lengths.iter().zip(&cells).enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidGrid(format!("axis {axis}: length {l} must be positive")));
            }
            if n < MIN_BOX_CELLS {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: {n} cells, at least {MIN_BOX_CELLS} required"
                )));
            }
        }
        Ok(BoxGrid { lengths, cells })
    }

    /// The unit interval with `cells` cells.
    pub fn unit_interval(cells: usize) -> Result<Self> {
        Self::new(vec![1.0], vec![cells])
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Coordinate of node `j` along `axis`.
    pub fn coord(&self, axis: usize, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing(axis)
    }

    /// Multi-index of a flat (row-major, axis 0 slowest) node index.
    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        match self.dim() {
            1 => vec![flat],
            _ => vec![flat / self.cells[1], flat % self.cells[1]],
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .into_iter()
            .enumerate()
            .map(|(axis, j)| self.coord(axis, j))
            .collect()
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }
}

/// Radial mesh of the unit ball `B_1` in `R^N`, nodes `r_j = j h`, `h = 1/(n-1)`.
///
/// Each node owns the control shell `[r_j - h/2, r_j + h/2] ∩ [0, 1]`; the shell
/// moments `m_j = ∫ r^{N-1} dr` are exact, so constants integrate exactly and the
/// flux-form Laplacian conserves `Σ m_j u_j` to round-off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialGrid {
    space_dim: usize,
    nodes: usize,
    #[serde(skip)]
    shell_moments: Vec<f64>,
    #[serde(skip)]
    face_areas: Vec<f64>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.space_dim == other.space_dim && self.nodes == other.nodes
    }
}

impl RadialGrid {
    pub fn new(space_dim: usize, nodes: usize) -> Result<Self> {
        if space_dim < 2 {
            return Err(Error::InvalidGrid(format!(
                "radial grids need space_dim >= 2, got {space_dim} (use RadialGrid::slab for the 1D analogue)"
            )));
        }
        Self::build(space_dim, nodes)
    }

    /// The flat analogue on `[0, 1]` (`N = 1`): uniform vertex-centred nodes with
    /// Neumann conditions at both ends.
    pub fn slab(nodes: usize) -> Result<Self> {
        Self::build(1, nodes)
    }

    /// Smallest grid with `h <= eps / per_eps`.
    pub fn resolving(space_dim: usize, eps: f64, per_eps: f64) -> Result<Self> {
        let nodes = ((per_eps / eps).ceil() as usize + 1).max(MIN_RADIAL_NODES);
        Self::new(space_dim, nodes)
    }

    fn build(space_dim: usize, nodes: usize) -> Result<Self> {
        if nodes < MIN_RADIAL_NODES {
            return Err(Error::InvalidGrid(format!(
                "{nodes} radial nodes, at least {MIN_RADIAL_NODES} required"
            )));
        }
        let h = 1.0 / (nodes - 1) as f64;
        let n = space_dim as i32;
        let moment = |a: f64, b: f64| (b.powi(n) - a.powi(n)) / space_dim as f64;
        let shell_moments = (0..nodes)
            .map(|j| {
                let r = j as f64 * h;
                let lo = (r - 0.5 * h).max(0.0);
                let hi = (r + 0.5 * h).min(1.0);
                moment(lo, hi)
            })
            .collect();
        let face_areas = (0..nodes - 1)
            .map(|j| ((j as f64 + 0.5) * h).powi(n - 1))
            .collect();
        Ok(RadialGrid {
            space_dim,
            nodes,
            shell_moments,
            face_areas,
        })
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.nodes - 1) as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.r(j)).collect()
    }

    /// `∫ r^{N-1} dr` over the control shell of node `j` (without the sphere area factor).
    pub fn shell_moments(&self) -> &[f64] {
        &self.shell_moments
    }

    /// `r_{j+1/2}^{N-1}` for the `n - 1` faces between nodes.
    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn sphere_area(&self) -> f64 {
        unit_sphere_area(self.space_dim)
    }

    /// Volume of the unit ball.
    pub fn volume(&self) -> f64 {
        self.sphere_area() / self.space_dim as f64
    }
}

/// Either grid; shared by every field defined on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    Box(BoxGrid),
    Radial(RadialGrid),
}

impl Grid {
    pub fn node_count(&self) -> usize {
        match self {
            Grid::Box(b) => b.node_count(),
            Grid::Radial(r) => r.nodes(),
        }
    }

    pub fn domain_name(&self) -> &'static str {
        match self {
            Grid::Box(_) => "box",
            Grid::Radial(_) => "radial",
        }
    }

    /// Finest node spacing.
    pub fn spacing(&self) -> f64 {
        match self {
            Grid::Box(b) => b.min_spacing(),
            Grid::Radial(r) => r.spacing(),
        }
    }

    /// Exact domain measure.
    pub fn volume(&self) -> f64 {
        match self {
            Grid::Box(b) => b.volume(),
            Grid::Radial(r) => r.volume(),
        }
    }

    /// Quadrature weight of every node.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Grid::Box(b) => vec![b.cell_volume(); b.node_count()],
            Grid::Radial(r) => {
                let w = r.sphere_area();
                r.shell_moments().iter().map(|m| w * m).collect()
            }
        }
    }

    /// True for 1D boxes and radial grids: fields are functions of one coordinate.
    pub fn is_one_dimensional(&self) -> bool {
        match self {
            Grid::Box(b) => b.dim() == 1,
            Grid::Radial(_) => true,
        }
    }

    /// Coordinates of a one-dimensional grid.
    pub fn line_coords(&self) -> Option<Vec<f64>> {
        match self {
            Grid::Box(b) if b.dim() == 1 => Some((0..b.cells()[0]).map(|j| b.coord(0, j)).collect()),
            Grid::Radial(r) => Some(r.coords()),
            _ => None,
        }
    }

    /// JSON-friendly descriptor (the derived shell data is not serialized).
    pub fn descriptor(&self) -> serde_json::Value {
        match self {
            Grid::Box(b) => serde_json::json!({
                "kind": "box", "lengths": b.lengths(), "cells": b.cells()
            }),
            Grid::Radial(r) => serde_json::json!({
                "kind": "radial", "space_dim": r.space_dim(), "nodes": r.nodes()
            }),
        }
    }

    pub fn from_descriptor(value: &serde_json::Value) -> Result<Grid> {
        let kind = value["kind"].as_str().unwrap_or_default();
        let bad = || Error::Structural(format!("malformed grid descriptor: {value}"));
        match kind {
            "box" => {
                let lengths: Vec<f64> = serde_json::from_value(value["lengths"].clone())?;
                let cells: Vec<usize> = serde_json::from_value(value["cells"].clone())?;
                Ok(Grid::Box(BoxGrid::new(lengths, cells)?))
            }
            "radial" => {
                let dim = value["space_dim"].as_u64().ok_or_else(bad)? as usize;
                let nodes = value["nodes"].as_u64().ok_or_else(bad)? as usize;
                let g = if dim == 1 {
                    RadialGrid::slab(nodes)?
                } else {
                    RadialGrid::new(dim, nodes)?
                };
                Ok(Grid::Radial(g))
            }
            _ => Err(bad()),
        }
    }
}

impl From<BoxGrid> for Grid {
    fn from(g: BoxGrid) -> Self {
        Grid::Box(g)
    }
}

impl From<RadialGrid> for Grid {
    fn from(g: RadialGrid) -> Self {
        Grid::Radial(g)
    }
}
