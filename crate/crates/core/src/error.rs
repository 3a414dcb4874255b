use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has {len} observations, at least {min} required")]
    SeriesTooShort { len: usize, min: usize },

    #[error("series value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("lag {lag} out of range (maximum {max} for this series)")]
    LagOutOfRange { lag: usize, max: usize },

    #[error("unknown lag window `{0}` (expected bartlett, parzen or tukey-hanning)")]
    UnknownWindow(String),

    #[error("bandwidth {r_n} needs {needed} lags but the series supports at most {max}")]
    BandwidthTooLarge { r_n: f64, needed: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency grids of the combined estimates differ")]
    GridMismatch,

    #[error("{0}")]
    Mismatch(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
}
