//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by mesh construction, operator assembly, modal analysis,
/// port synthesis, and the beamforming simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is out of range or inconsistent.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Target edge length is too large for the requested plate.
    #[error("resolution too coarse: edge length {h} does not resolve smallest dimension {dim}")]
    ResolutionTooCoarse { h: f64, dim: f64 },

    /// Mesh violates a structural invariant (non-manifold edge, degenerate triangle, ...).
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// Symmetry analysis was requested for a shape without a built-in point group.
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    /// Mesh is not invariant under an operation claimed by its shape tag.
    #[error("asymmetric mesh: {0}")]
    AsymmetricMesh(String),

    /// Dense operator would exceed the configured size cap.
    #[error("problem too large: {n} basis functions exceeds cap {cap}")]
    ProblemTooLarge { n: usize, cap: usize },

    /// Radiation operator is numerically zero; the modal pencil is undefined.
    #[error("degenerate operator: {0}")]
    DegenerateOperator(String),

    /// An eigenvalue or linear solve failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A far-field has no radiated power; correlation is undefined.
    #[error("degenerate field: {0}")]
    DegenerateField(String),

    /// A port excites no retained mode; correlation is undefined.
    #[error("degenerate port: {0}")]
    DegeneratePort(String),

    /// Effective channel is rank-deficient; the caller must reschedule.
    #[error("precoder singular: {0}")]
    PrecoderSingular(String),

    /// A precoder scheme was requested with an incompatible RF chain count.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// A simulation config file failed validation; the string names the field path.
    #[error("config error at {path}: {message}")]
    ConfigError { path: String, message: String },

    /// File or serialization problem in one of the stage interfaces.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
