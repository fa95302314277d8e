//! Front-end plumbing for the `transmod` binary: the verification campaign
//! and SVG output.

pub mod campaign;
pub mod svg;
