//! Discrete classical and transboundary 2-modulus of connecting curve
//! families on planar domains with complementary continua.
//!
//! The crate is organised bottom-up: [`geom`] holds the planar sets and the
//! geometric functionals, [`domain`] rasterizes a domain into a quotient grid,
//! [`modsolve`] computes discrete modulus with certified bounds, [`densities`] holds
//! explicit admissible densities, and [`gallery`] generates the test domains.

pub mod geom;
pub mod domain;
pub mod modsolve;
pub mod densities;
pub mod gallery;
pub(crate) mod quad;
