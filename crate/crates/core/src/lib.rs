//! Distortion risk measures.

pub mod asymptotics;
pub mod cli;
pub mod copula;
pub mod distortion;
pub mod distributions;
pub mod error;
pub mod format;
pub mod measures;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
