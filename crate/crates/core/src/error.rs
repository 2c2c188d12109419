//! Error type shared by all modules.

use thiserror::Error;

/// Failures surfaced by the numeric kernels.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A constructor or routine was handed a value outside its domain.
    /// `name` identifies the offending parameter.
    #[error("parameter `{name}` out of domain: {detail}")]
    ParameterDomain { name: &'static str, detail: String },

    /// Certified truncation could not bring the tail mass below tolerance.
    #[error("truncation failed at degree {degree}: tail bound {tail} above tolerance {tol}")]
    TruncationFailure {
        degree: usize,
        tail: String,
        tol: String,
    },

    /// A deferred window carries zero total weight.
    #[error("degenerate window at n = {n}: weights sum to zero")]
    DegenerateWindow { n: u64 },

    /// A matrix row declares no support bound, so its sum cannot be certified.
    #[error("matrix row n = {n} declares no support bound")]
    UnboundedRow { n: u64 },

    /// The weight series failed its settling check; u is outside the
    /// method's working range.
    #[error("weight series fails to settle at u = {u} after {terms} terms")]
    Divergence { u: String, terms: usize },

    /// Limit extrapolation needs more samples.
    #[error("limit extrapolation needs at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
