//! Stabilized IMEX steps of `∂_t u = -εΔ²u + Δf(u)/ε - λ(u - ū)`.
//!
//! The stiff linear part `εΔ² - SΔ + λ` is implicit, `Δ(f(u)/ε - Su)` explicit.

use crate::banded::{BandLu, BandMatrix};
use crate::elliptic::{box_analyze, box_eigenvalues, box_synthesize};
use crate::error::{Error, Result};
use crate::grid::{BoxGrid, RadialGrid};
use crate::params::SimParams;
use crate::phasefield::double_well_prime;

/// Cosine-spectral step with precomputed implicit symbols.
#[derive(Debug, Clone)]
pub struct BoxStepper {
    grid: BoxGrid,
    dt: f64,
    mu: Vec<f64>,
    inv_symbol: Vec<f64>,
}

impl BoxStepper {
    pub fn new(grid: &BoxGrid, params: &SimParams, dt: f64) -> Result<Self> {
        let mu = box_eigenvalues(grid);
        let (eps, s, lambda) = (params.eps, params.stabilization, params.lambda);
        let mut inv_symbol = Vec::with_capacity(mu.len());
        for &m in &mu {
            let symbol = 1.0 + dt * (eps * m * m + s * m + lambda);
            if !(symbol >= 1.0) {
                return Err(Error::Singular(format!("implicit symbol {symbol} below 1")));
            }
            inv_symbol.push(1.0 / symbol);
        }
        Ok(BoxStepper {
            grid: grid.clone(),
            dt,
            mu,
            inv_symbol,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `u` in place. The mean (mode 0) is copied, so mass is exact.
    pub fn step(&self, u: &mut [f64], params: &SimParams, step: usize) -> Result<()> {
        let (eps, s) = (params.eps, params.stabilization);
        let explicit: Vec<f64> = u.iter().map(|&x| double_well_prime(x) / eps - s * x).collect();
        if let Some(j) = explicit.iter().position(|x| !x.is_finite()) {
            return Err(Error::Divergence { step, mode: j });
        }
        let mut a = box_analyze(&self.grid, u);
        let b = box_analyze(&self.grid, &explicit);
        for k in 1..a.len() {
            a[k] = (a[k] - self.dt * self.mu[k] * b[k]) * self.inv_symbol[k];
            if !a[k].is_finite() {
                return Err(Error::Divergence {
                    step,
                    mode: k,
                });
            }
        }
        let next = box_synthesize(&self.grid, &a);
        if let Some(j) = next.iter().position(|x| !x.is_finite()) {
            return Err(Error::Divergence { step, mode: j });
        }
        u.copy_from_slice(&next);
        Ok(())
    }
}

/// Finite-volume step: the system, multiplied by the shell-moment matrix `M`, is
/// `(M + dt ε K M⁻¹ K + dt S K + dt λ M) u' = M u - dt K (f(u)/ε - S u) + dt λ ū M 1`
/// with `K` the symmetric stiffness (`Δ_r = -M⁻¹K`); it is SPD and pentadiagonal.
#[derive(Debug, Clone)]
pub struct RadialStepper {
    grid: RadialGrid,
    dt: f64,
    lambda: f64,
    eps: f64,
    stabilization: f64,
    lu: BandLu,
}

fn stiffness_apply(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let a = grid.face_areas();
    let n = u.len();
    let mut out = vec![0.0; n];
    for j in 0..n - 1 {
        let flux = a[j] * (u[j + 1] - u[j]) / h;
        out[j] -= flux;
        out[j + 1] += flux;
    }
    out
}

impl RadialStepper {
    pub fn new(grid: &RadialGrid, params: &SimParams, dt: f64) -> Result<Self> {
        let n = grid.nodes();
        let h = grid.spacing();
        let m = grid.shell_moments();
        let a = grid.face_areas();
        // tridiagonal stiffness K
        let mut k = BandMatrix::zeros(n, 1, 1);
        for j in 0..n - 1 {
            let c = a[j] / h;
            k.add(j, j, c);
            k.add(j + 1, j + 1, c);
            k.add(j, j + 1, -c);
            k.add(j + 1, j, -c);
        }
        let (eps, s, lambda) = (params.eps, params.stabilization, params.lambda);
        let mut sys = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            sys.add(i, i, m[i] * (1.0 + dt * lambda));
            for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
                sys.add(i, j, dt * s * k.get(i, j));
            }
            // (K M⁻¹ K)_{ij} = Σ_l K_il K_lj / m_l
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                let lo = i.max(j).saturating_sub(1);
                let hi = (i.min(j) + 1).min(n - 1);
                let v: f64 = (lo..=hi).map(|l| k.get(i, l) * k.get(l, j) / m[l]).sum();
                if v != 0.0 {
                    sys.add(i, j, dt * eps * v);
                }
            }
        }
        let lu = sys.factor().map_err(|e| {
            Error::Singular(format!("radial implicit operator ({e}); grid too coarse or dt pathological"))
        })?;
        Ok(RadialStepper {
            grid: grid.clone(),
            dt,
            lambda,
            eps,
            stabilization: s,
            lu,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, u: &mut [f64], params: &SimParams, step: usize) -> Result<()> {
        let (eps, s, lambda) = (params.eps, params.stabilization, params.lambda);
        let m = self.grid.shell_moments();
        let total: f64 = m.iter().sum();
        let ubar = u.iter().zip(m).map(|(x, w)| x * w).sum::<f64>() / total;
        let explicit: Vec<f64> = u.iter().map(|&x| double_well_prime(x) / eps - s * x).collect();
        let kx = stiffness_apply(&self.grid, &explicit);
        // solve for the increment, which keeps fixed points exact to round-off
        // the system matrix applied in factored form, exact on constants
        let ku = stiffness_apply(&self.grid, u);
        let scaled: Vec<f64> = ku.iter().zip(m).map(|(k, w)| k / w).collect();
        let kmk = stiffness_apply(&self.grid, &scaled);
        let au: Vec<f64> = (0..u.len())
            .map(|j| {
                m[j] * (1.0 + self.dt * self.lambda) * u[j]
                    + self.dt * self.stabilization * ku[j]
                    + self.dt * self.eps * kmk[j]
            })
            .collect();
        let mut delta: Vec<f64> = (0..u.len())
            .map(|j| m[j] * (u[j] + self.dt * lambda * ubar) - self.dt * kx[j] - au[j])
            .collect();
        self.lu.solve_in_place(&mut delta);
        let next: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + d).collect();
        if let Some(j) = next.iter().position(|x| !x.is_finite()) {
            return Err(Error::Divergence { step, mode: j });
        }
        u.copy_from_slice(&next);
        Ok(())
    }
}
