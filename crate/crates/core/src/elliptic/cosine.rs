//! Cosine expansions on cell-centred box grids.
//!
//! A field is stored through amplitudes `a_k` with
//! `u(x) = Σ_k a_k Π_i cos(π k_i x_i / L_i)`, sampled at `x_i = (j_i + ½) h_i`.
//! Every basis function satisfies the homogeneous Neumann condition, and the
//! midpoint rule integrates products of retained modes exactly.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustdct::{DctPlanner, TransformType2And3};

use crate::grid::BoxGrid;

fn plan(len: usize) -> Arc<dyn TransformType2And3<f64>> {
    static PLANNER: OnceLock<Mutex<DctPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(DctPlanner::new()));
    planner.lock().unwrap_or_else(|e| e.into_inner()).plan_dct2(len)
}

/// Applies `op` to every line of `data` along `axis` (row-major, axis 0 slowest).
fn along_axis(data: &mut [f64], cells: &[usize], axis: usize, mut op: impl FnMut(&mut [f64])) {
    match (cells.len(), axis) {
        (1, _) => op(data),
        (2, 1) => data.chunks_mut(cells[1]).for_each(op),
        (2, 0) => {
            let (n0, n1) = (cells[0], cells[1]);
            let mut line = vec![0.0; n0];
            for c in 0..n1 {
                for r in 0..n0 {
                    line[r] = data[r * n1 + c];
                }
                op(&mut line);
                for r in 0..n0 {
                    data[r * n1 + c] = line[r];
                }
            }
        }
        _ => unreachable!("box grids are 1D or 2D"),
    }
}

/// Nodal values to cosine amplitudes.
pub(crate) fn analyze(grid: &BoxGrid, values: &[f64]) -> Vec<f64> {
    let mut data = values.to_vec();
    for (axis, &n) in grid.cells().iter().enumerate() {
        let t = plan(n);
        let scale = 2.0 / n as f64;
        along_axis(&mut data, grid.cells(), axis, |line| {
            t.process_dct2(line);
            line[0] *= 0.5;
            line.iter_mut().for_each(|x| *x *= scale);
        });
    }
    data
}

/// Cosine amplitudes to nodal values; with `derivative = Some(axis)` returns `∂u/∂x_axis`.
pub(crate) fn synthesize(grid: &BoxGrid, coeffs: &[f64], derivative: Option<usize>) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    for (axis, &n) in grid.cells().iter().enumerate() {
        let t = plan(n);
        if derivative == Some(axis) {
            let w = PI / grid.lengths()[axis];
            along_axis(&mut data, grid.cells(), axis, |line| {
                // sine amplitudes of the derivative, shifted down by one mode
                for k in 1..n {
                    line[k - 1] = -w * k as f64 * line[k];
                }
                line[n - 1] = 0.0;
                t.process_dst3(line);
            });
        } else {
            along_axis(&mut data, grid.cells(), axis, |line| {
                line[0] *= 2.0;
                t.process_dct3(line);
            });
        }
    }
    data
}

/// Eigenvalues `μ_k = Σ_i (π k_i / L_i)²` of `-Δ`, in coefficient order.
pub(crate) fn eigenvalues(grid: &BoxGrid) -> Vec<f64> {
    let per_axis: Vec<Vec<f64>> = grid
        .cells()
        .iter()
        .zip(grid.lengths())
        .map(|(&n, &l)| (0..n).map(|k| (PI * k as f64 / l).powi(2)).collect())
        .collect();
    (0..grid.node_count())
        .map(|flat| {
            grid.unravel(flat)
                .iter()
                .enumerate()
                .map(|(axis, &k)| per_axis[axis][k])
                .sum()
        })
        .collect()
}

/// `∫ φ_k² dx / |Ω|` for each basis function.
pub(crate) fn mode_weights(grid: &BoxGrid) -> Vec<f64> {
    (0..grid.node_count())
        .map(|flat| {
            grid.unravel(flat)
                .iter()
                .map(|&k| if k == 0 { 1.0 } else { 0.5 })
                .product()
        })
        .collect()
}
