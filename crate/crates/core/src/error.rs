use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid physical frame: {0}")]
    InvalidFrame(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The grid cannot represent the requested mode order.
    #[error("grid too coarse for mode order {order}: {rule}")]
    Resolution { order: usize, rule: String },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Chirp or output sampling rule of a kernel plan is violated.
    #[error(
        "kernel sampling rule violated ({rule}): ratio {ratio:.4} must be < 1; enlarge the grid or pad the window"
    )]
    Sampling { rule: &'static str, ratio: f64 },

    #[error("{quantity} = {value} outside operating range [{lo}, {hi}]{hint}")]
    Range {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
        hint: &'static str,
    },

    #[error("invalid optical element: {0}")]
    InvalidElement(String),

    #[error("no focal length in [{lo}, {hi}] realizes the target (best defect {best_defect:.3e})")]
    NoSolution { lo: f64, hi: f64, best_defect: f64 },

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("negative weight {value:.3e} for mode ({nx},{ny}) exceeds the clamping threshold")]
    NegativeWeight { nx: u32, ny: u32, value: f64 },

    #[error("scan mismatch: {0}")]
    ScanMismatch(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unrecognized file format for {path}: {message}")]
    UnknownFormat { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: &str, line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    /// Coarse classification used by the command-line exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::UnknownFormat { .. } | Error::Io(_) | Error::InvalidRecipe(_) => {
                ErrorKind::Input
            }
            Error::Range { .. }
            | Error::NoSolution { .. }
            | Error::InvalidElement(_)
            | Error::Resolution { .. }
            | Error::Sampling { .. } => ErrorKind::Design,
            Error::NegativeWeight { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Design,
    Numerical,
}
