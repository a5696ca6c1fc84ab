use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the command-line driver to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Io,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too small for stencil: need at least {min} cells per axis, got {nx}x{ny}")]
    GridTooSmall { min: usize, nx: usize, ny: usize },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite value at cell {index}")]
    NonFinite { index: usize },
    #[error("phase winding undefined: amplitude {amplitude:e} below threshold on sampled circle")]
    WindingUndefined { amplitude: f64 },
    #[error("circle of radius {radius} around ({cx}, {cy}) leaves the grid")]
    CircleOutsideGrid { cx: f64, cy: f64, radius: f64 },
    #[error("singular point: evaluation at pole z = ({re}, {im})")]
    Pole { re: f64, im: f64 },
    #[error("singular time: |cos(omega_B t)| = {cos:e} is within the focusing guard")]
    SingularTime { cos: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("window of radius {radius} around ({cx}, {cy}) leaves the grid")]
    WindowOutOfBounds { cx: f64, cy: f64, radius: f64 },
    #[error("{path}:{line}: {msg}")]
    Image { path: PathBuf, line: usize, msg: String },
    #[error("empty memory")]
    EmptyMemory,
    #[error("zero-norm pattern")]
    ZeroPattern,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed document {path}: {msg}")]
    Document { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidGrid(_)
            | Error::InvalidConfig(_)
            | Error::WindowOutOfBounds { .. }
            | Error::CircleOutsideGrid { .. }
            | Error::DuplicateLabel(_)
            | Error::EmptyMemory
            | Error::DimensionMismatch { .. }
            | Error::GridMismatch
            | Error::GridTooSmall { .. } => ErrorClass::Config,
            Error::Image { .. } | Error::Document { .. } | Error::Io { .. } => ErrorClass::Io,
            Error::NonFinite { .. }
            | Error::WindingUndefined { .. }
            | Error::Pole { .. }
            | Error::SingularTime { .. }
            | Error::ZeroPattern => ErrorClass::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
