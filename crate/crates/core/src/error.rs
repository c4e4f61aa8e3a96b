use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not a four-velocity: u^2 = {norm_sq}, u^0 = {time}")]
    NotFourVelocity { norm_sq: f64, time: f64 },

    #[error("Lorentz product is not block-diagonal (off-block residual {residual:e})")]
    NotBlockDiagonal { residual: f64 },

    #[error("degenerate configuration: total momentum squared {p_sq:e} is not timelike")]
    Degenerate { p_sq: f64 },

    #[error("momentum {index} is off its mass shell by {residual:e}")]
    OffShell { index: usize, residual: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),

    #[error("algebra does not close: fit residual {residual:e}")]
    ClosureFailure { residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("packet reached the grid boundary at t = {t}: edge amplitude {amplitude:e}")]
    Reflection { t: f64, amplitude: f64 },

    #[error("phase-shift matching failed: {0}")]
    Matching(String),

    #[error("z = {z} outside the phase-shift table [{lo}, {hi}]")]
    Range { z: f64, lo: f64, hi: f64 },

    #[error("kinematic error: {0}")]
    Kinematic(String),

    #[error("sampling box too small: {0}")]
    Truncation(String),

    #[error("overlap truncated by the time window: boundary density {boundary:e}")]
    Window { boundary: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
