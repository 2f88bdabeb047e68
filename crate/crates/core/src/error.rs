use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("wave functions live on different grids")]
    GridMismatch,

    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("operation undefined for a wave function with zero norm")]
    ZeroNorm,

    #[error("unsupported derivative order {0} (supported: 1, 2, 4)")]
    UnsupportedDerivativeOrder(u32),

    #[error("kicking strength must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("invalid kick model: {0}")]
    InvalidKickModel(String),

    #[error("invalid value for `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("trajectory holds no samples")]
    EmptyTrajectory,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
