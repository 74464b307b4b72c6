//! Shared error type for the library.

use thiserror::Error;

/// Errors produced by network evaluation, training, search, repair and verification.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong length for the operation.
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A text artifact (NNet file, JSON network, property file) failed to parse.
    #[error("parse error{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    /// An input box is empty, inverted, or unbounded where finite bounds are required.
    #[error("invalid box: {0}")]
    InvalidBox(String),

    /// The loss kind does not match the dataset's target representation.
    #[error("loss kind {loss:?} cannot train on {targets} targets")]
    LossKind { loss: crate::train::LossKind, targets: &'static str },

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    /// A metric or training run was asked to operate on an empty dataset.
    #[error("dataset is empty")]
    EmptyDataset,

    /// A point lies outside the box it was required to be in.
    #[error("coordinate {dim} = {value} outside [{lo}, {hi}]")]
    OutOfBox { dim: usize, value: f64, lo: f64, hi: f64 },

    /// A property index does not exist in the referenced specification.
    #[error("unknown property index {index}")]
    UnknownProperty { index: usize },

    /// A search budget is zero or too small for the configured optimizer.
    #[error("budget error: {0}")]
    Budget(String),

    /// A configuration value violates a documented invariant.
    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
