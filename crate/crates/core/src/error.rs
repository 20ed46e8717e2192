use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid of {n} samples is too small, at least {required} are needed")]
    GridTooSmall { n: usize, required: usize },

    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("degenerate frame: k·p = {kp:e} vanishes")]
    DegenerateFrame { kp: f64 },

    #[error("circle map is not monotone (min derivative {min_derivative:e})")]
    NonMonotone { min_derivative: f64 },

    #[error("frame vector is not lightlike (η(k,k) = {norm:e})")]
    NotLightlike { norm: f64 },

    #[error("level mismatch: left modes sum to {left}, right modes to {right}, level {level}")]
    LevelMismatch { left: i64, right: i64, level: i64 },

    #[error("spacetime index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("mode {mode} exceeds the available window {max}")]
    ModeOutOfRange { mode: i64, max: usize },

    #[error(
        "gradient mismatch at chart coordinate {coordinate}: propagated {propagated:e}, finite difference {finite_difference:e}"
    )]
    GradientMismatch {
        coordinate: usize,
        propagated: f64,
        finite_difference: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
