//! Transfer kernel, cross sections, position-space packets, luminosity and w = σ·L.

pub mod factorization;
pub mod flux;
pub mod harmonics;
pub mod kernel;
pub mod luminosity;
pub mod position;
pub mod xsection;

pub use factorization::{factorization, FactorizationConfig, FactorizationResult};
pub use flux::flux_factor;
pub use kernel::{legendre, ConstantKernel, ElasticKernel, TransferKernel};
pub use luminosity::{luminosity, scattering_probability, transverse_overlap, LuminosityResult, ScatteringProbability, TimeWindow};
pub use position::{flat_top, Evolution, MomentumGaussian, PositionPacket, SamplingBox};
pub use xsection::{cross_section_band, cross_section_mc, gauss_legendre, two_body_momentum, McEstimate, Region};
