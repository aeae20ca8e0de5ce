use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("velocity field is not divergence-free (residual {residual:.3e})")]
    NotSolenoidal { residual: f64 },

    #[error("CFL violation: dt = {dt:.6e} exceeds admissible dt = {max_dt:.6e}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("band overflow: {0}")]
    BandOverflow(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MixError {
    fn from(e: std::io::Error) -> Self {
        MixError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MixError>;
