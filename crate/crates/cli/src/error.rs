use stringinv_core::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NonMonotone { .. } | Error::DegenerateFrame { .. }) => {
                EXIT_DEGENERATE
            }
            CliError::Core(Error::GradientMismatch { .. }) => EXIT_CHECK_FAILED,
            _ => EXIT_USAGE,
        }
    }
}
