//! Pseudo-spectral laboratory for the two-dimensional Boussinesq system with
//! unit viscosity and zero density diffusivity on the unit torus.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod multiplier;
pub mod oracle;
pub mod solver;
pub mod spectral;
pub mod output;
pub mod plot;
pub mod verify;
pub mod cli;
