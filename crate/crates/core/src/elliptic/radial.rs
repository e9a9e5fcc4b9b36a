//! Finite-volume radial operators on vertex-centred shells.
//!
//! Fluxes live on faces `r_{j+½}` with area factor `A_{j+½} = r_{j+½}^{N-1}`; the
//! boundary fluxes at `r = 0` and `r = 1` vanish (symmetry and Neumann).

use crate::grid::RadialGrid;

/// `(Δ_r u)_j = (A_{j+½}(u_{j+1}-u_j) - A_{j-½}(u_j-u_{j-1})) / (h m_j)`.
pub(crate) fn laplacian(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let a = grid.face_areas();
    let m = grid.shell_moments();
    let n = u.len();
    let flux: Vec<f64> = (0..n - 1).map(|j| a[j] * (u[j + 1] - u[j])).collect();
    (0..n)
        .map(|j| {
            let right = if j + 1 < n { flux[j] } else { 0.0 };
            let left = if j > 0 { flux[j - 1] } else { 0.0 };
            (right - left) / (h * m[j])
        })
        .collect()
}

/// Cumulative shell sources `C_j = Σ_{i≤j} m_i f_i`: the outward flux through face `j+½`.
pub(crate) fn cumulative_flux(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let m = grid.shell_moments();
    let mut acc = 0.0;
    f.iter()
        .zip(m)
        .take(f.len() - 1)
        .map(|(fi, mi)| {
            acc += fi * mi;
            acc
        })
        .collect()
}

/// Solves `-Δ_r v = f` exactly by integrating the flux outward; `v` is returned with
/// zero discrete mean.
pub(crate) fn poisson(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let c = cumulative_flux(grid, f);
    let mut v = Vec::with_capacity(f.len());
    v.push(0.0);
    for (j, (cj, aj)) in c.iter().zip(grid.face_areas()).enumerate() {
        v.push(v[j] - h * cj / aj);
    }
    let m = grid.shell_moments();
    let mean = v.iter().zip(m).map(|(x, w)| x * w).sum::<f64>() / m.iter().sum::<f64>();
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

/// `∫|∇v|²` of the discrete solution of `-Δ_r v = f`, i.e. `ω h Σ C_j² / A_{j+½}`.
pub(crate) fn hminus1_norm_sq(grid: &RadialGrid, f: &[f64]) -> f64 {
    let h = grid.spacing();
    let c = cumulative_flux(grid, f);
    grid.sphere_area() * h * c.iter().zip(grid.face_areas()).map(|(c, a)| c * c / a).sum::<f64>()
}

/// `∫ ∇f·∇g` with staggered differences; `dirichlet(u, u)` pairs with `laplacian`.
pub(crate) fn dirichlet(grid: &RadialGrid, f: &[f64], g: &[f64]) -> f64 {
    let h = grid.spacing();
    let s: f64 = grid
        .face_areas()
        .iter()
        .enumerate()
        .map(|(j, a)| a * (f[j + 1] - f[j]) * (g[j + 1] - g[j]))
        .sum();
    grid.sphere_area() * s / h
}

/// Nodal `∂_r u`: average of the two adjacent face differences, zero at both ends.
pub(crate) fn gradient(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let n = u.len();
    (0..n)
        .map(|j| {
            if j == 0 || j == n - 1 {
                0.0
            } else {
                (u[j + 1] - u[j - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Face differences `(u_{j+1} - u_j) / h`.
pub(crate) fn face_gradient(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    u.windows(2).map(|w| (w[1] - w[0]) / h).collect()
}
