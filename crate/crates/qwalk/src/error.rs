//! Error type shared across the crate.

use crate::walk::Spin;

/// Errors produced by walk construction, evolution, optimization, batch
/// experiments, tomography, and persistence.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input state violates the unit-norm contract.
    #[error("state is not normalized: {0}")]
    NotNormalized(String),

    /// A shift would move amplitude off the edge of the lattice.
    #[error("shift would move amplitude off the lattice at site {site}, spin {spin}")]
    BoundaryOverflow { site: i32, spin: Spin },

    /// The cost function returned a non-finite value during optimization.
    #[error("non-finite cost ({what}) at parameters {params:?}")]
    NonFiniteCost { what: String, params: Vec<f64> },

    /// Measurement intensities are not consistent with any quantum state.
    #[error("inconsistent measurement data: {0}")]
    InconsistentData(String),

    /// Too many runs of a batch experiment failed.
    #[error("batch failed: {0}")]
    BatchFailed(String),

    /// A persisted file does not have the expected shape.
    #[error("malformed input file: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
