use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("moment diverges: {0}")]
    MomentDiverges(String),

    #[error("no convergence after {evaluations} evaluations (estimate {value:e} +/- {error:e})")]
    NoConvergence {
        value: f64,
        error: f64,
        evaluations: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("tier {tier} out of range 1..={tiers}")]
    InvalidTier { tier: usize, tiers: usize },

    #[error("order {order} is not supported by {path} (allowed {allowed})")]
    UnsupportedOrder {
        order: usize,
        path: &'static str,
        allowed: &'static str,
    },

    #[error("dimension {0} is only supported for the first moment")]
    UnsupportedDimension(u32),

    #[error("{path} does not apply: {reason}")]
    NotApplicable { path: &'static str, reason: String },

    #[error("window too small: {fraction:.4} of realizations had associated points near the boundary")]
    WindowTooSmall { fraction: f64 },

    #[error("insufficient moments: truncation bound {bound:e} exceeds tolerance {tol:e}")]
    InsufficientMoments { bound: f64, tol: f64 },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
