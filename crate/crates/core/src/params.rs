use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasefield::double_well_second;

/// Physical and numerical parameters of one diffuse run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Interface width.
    pub eps: f64,
    /// Strength of the long-range (nonlocal) term.
    pub lambda: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Stabilization constant `S` of the IMEX splitting.
    pub stabilization: f64,
    /// Mean of the order parameter; fixed by the initial data and conserved by the flow.
    pub target_mass: f64,
}

impl SimParams {
    /// Parameters with the default time step and stabilization for `eps`.
    pub fn new(eps: f64, lambda: f64, t_end: f64) -> Result<Self> {
        let p = SimParams {
            eps,
            lambda,
            dt: default_dt(eps),
            t_end,
            stabilization: default_stabilization(eps),
            target_mass: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_stabilization(mut self, s: f64) -> Self {
        self.stabilization = s;
        self
    }

    pub fn with_target_mass(mut self, m: f64) -> Self {
        self.target_mass = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::param("params.eps", format!("must be positive, got {}", self.eps)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param(
                "params.lambda",
                format!("must be nonnegative, got {}", self.lambda),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("params.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param(
                "params.t_end",
                format!("must be nonnegative, got {}", self.t_end),
            ));
        }
        if !(self.stabilization >= 0.0 && self.stabilization.is_finite()) {
            return Err(Error::param(
                "params.stabilization",
                format!("must be nonnegative, got {}", self.stabilization),
            ));
        }
        if !(self.target_mass.abs() < 1.0) {
            return Err(Error::param(
                "params.target_mass",
                format!("must lie in (-1, 1), got {}", self.target_mass),
            ));
        }
        Ok(())
    }
}

/// `ε³` clamped to `[1e-8, 1e-3]`.
pub fn default_dt(eps: f64) -> f64 {
    eps.powi(3).clamp(1e-8, 1e-3)
}

/// `S = 2/ε · max(1, sup |f'|)` with the supremum over `[-1.2, 1.2]`.
pub fn default_stabilization(eps: f64) -> f64 {
    let sup = double_well_second(1.2).abs().max(double_well_second(0.0).abs());
    2.0 / eps * sup.max(1.0)
}

/// Smallest stabilization for which the splitting is energy stable: half the Lipschitz
/// constant of `f/ε` on `[-1.2, 1.2]`.
pub fn min_stabilization(eps: f64) -> f64 {
    0.5 * double_well_second(1.2).abs() / eps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = SimParams::new(0.1, 0.0, 1.0).unwrap();
        assert!((p.dt - 1e-3).abs() < 1e-18);
        assert!((p.stabilization - 132.8).abs() < 1e-9);
        assert_eq!(default_dt(0.001), 1e-8);
        assert_eq!(default_dt(0.5), 1e-3);
        assert!(p.stabilization >= min_stabilization(p.eps));
    }

    #[test]
    fn validation_names_the_field() {
        let err = SimParams::new(-0.1, 0.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("params.eps"));
        let err = SimParams::new(0.1, -1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("params.lambda"));
        let p = SimParams::new(0.1, 0.0, 1.0).unwrap().with_target_mass(1.0);
        assert!(p.validate().unwrap_err().to_string().contains("target_mass"));
    }
}
