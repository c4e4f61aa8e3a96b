//! Relativistic two-body scattering workbench: center variables, the Poincaré generator
//! action on center wave functions, spectral Moeller operators and S-matrix on radial grids,
//! cross sections and wave-packet luminosity.

pub mod center;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fourvec;
pub mod jet;
pub mod observables;
pub mod poincare_rep;

pub use error::{Error, Result};
