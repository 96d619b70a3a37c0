//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands live in Heisenberg groups of different dimension.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inverse Cayley transform evaluated too close to the south pole.
    #[error("south pole singularity: |1 + last coordinate| = {denominator:.3e} below 1e-12")]
    SouthPoleSingularity { denominator: f64 },

    /// A non-finite value appeared where a finite one is required.
    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    /// Requested kernel matrix exceeds the configured node cap.
    #[error("kernel matrix too large: {nodes} nodes exceeds cap {cap}")]
    TooLarge { nodes: usize, cap: usize },

    /// Input that makes the requested quantity meaningless (e.g. zero norm).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Monte Carlo error bars too wide for the requested verdict.
    #[error("insufficient samples: relative standard error {rel_se:.3e} exceeds {limit:.3e}")]
    InsufficientSamples { rel_se: f64, limit: f64 },

    /// Neither (or both) closed-form candidates matched the quadrature value.
    #[error("ambiguous verdict: {0}")]
    AmbiguousVerdict(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
