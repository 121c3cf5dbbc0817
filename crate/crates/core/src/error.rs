use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("derivative order {requested} exceeds the function's exact order {max}")]
    DerivOrderExceeded { requested: u32, max: u32 },
    #[error("point {x} lies outside the domain ({lo}, {hi})")]
    DomainError { x: f64, lo: f64, hi: f64 },
    #[error("invalid convolution sequence: {0}")]
    InvalidSequence(String),
    #[error("cover does not contain the support near {0}")]
    CoverError(f64),
    #[error("quadrature did not converge on [{lo}, {hi}] (error estimate {estimate:e})")]
    NonConvergence { lo: f64, hi: f64, estimate: f64 },
    #[error("probe family cannot produce members of U: {0}")]
    ProbeError(String),
    #[error("scalar probe is degenerate: inf |g(u)/u| = {0:e}")]
    DegenerateG(f64),
    #[error("estimated support is not compact inside the domain")]
    SupportNotCompact,
    #[error("functional accepts compactly supported inputs only")]
    NotCompactlySupported,
    #[error("point representation mismatch {discrepancy:e} exceeds {tol:e}")]
    RepMismatch { discrepancy: f64, tol: f64 },
    #[error("counterexample search exhausted at m = {0}")]
    SearchExhausted(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
