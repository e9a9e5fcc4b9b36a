//! Ohta–Kawasaki phase-field dynamics and their nonlocal Mullins–Sekerka
//! sharp-interface limit, with the diagnostics that compare the two.

pub mod banded;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod params;
pub mod phasefield;
pub mod record;
pub mod sharp;

pub use error::{Error, Result};
pub use field::{field_mean, inner_product, l2_norm, quadrature_integral, ScalarField};
pub use grid::{BoxGrid, Grid, RadialGrid};
pub use params::SimParams;
pub use phasefield::EnergyBreakdown;
pub use record::{RunMetadata, RunRecord};
pub use sharp::SphereFamily;
