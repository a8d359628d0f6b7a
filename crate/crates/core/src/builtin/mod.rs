//! Ready-made models and measurements.

pub mod point_sources;
pub mod qubit;
