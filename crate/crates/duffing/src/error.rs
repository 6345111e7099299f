//! Error type shared by all modules.

/// Errors produced by construction, solvers, and statistics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {0}: truncated Fock spaces need dim >= 2")]
    InvalidDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("unstable spectrum: U < 0 requires a positive stabilizing U6 term")]
    UnstableSpectrum,

    #[error(
        "truncation overflow: top retained level carries Boltzmann weight \
         {weight:.3e} (limit {limit:.1e}) at T = {temperature}; increase dim"
    )]
    TruncationOverflow {
        weight: f64,
        limit: f64,
        temperature: f64,
    },

    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("zero-frequency transition: Bose occupation needs delta > 0, got {0}")]
    ZeroFrequencyTransition(f64),

    #[error("non-unique steady state: Liouvillian null space is degenerate")]
    NonUniqueSteadyState,

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("integration failed: {0}")]
    IntegrationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
