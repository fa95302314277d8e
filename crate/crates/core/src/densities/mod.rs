//! Explicit admissible densities: the logarithmic density on a subannulus
//! with few wide continua, the decay function Φ, and the inflation of a
//! transboundary density to a classical one.

mod annulus;
mod inflate;

pub use annulus::{
    certificate_mass, find_wide_subannulus, reference_mass_bound, phi, AnnulusCertificate, PHI_CONSTANT,
};
pub use inflate::{
    ball_sum_l2, bojarski_ratio, inflate_density, inflation_constant, QuasiroundBall,
};

use crate::geom::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("relative distance {0} does not exceed 14^3")]
    NotApplicable(f64),
    /// Mass above the threshold of the inflation argument; the inequality
    /// then holds for trivial reasons.
    #[error("mass {mass} exceeds the inflation threshold {threshold}")]
    NotInRegime { mass: f64, threshold: f64 },
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
