//! Hockey-stick divergences between quantum states and channels under
//! restricted measurement classes, and privacy audits built on them.
//!
//! The hockey-stick divergence of two states is
//!
//! ```text
//! E_gamma(rho || sigma) = sup_M Tr[M (rho - gamma sigma)] - max(0, 1 - gamma)
//! ```
//!
//! where the supremum runs over measurement effects `0 <= M <= I` drawn from
//! a class of interest. This crate computes it
//!
//! * in closed form for the unrestricted class (an eigensolve),
//! * by a primal-dual semidefinite program for PPT effects (`M` and its
//!   partial transpose both between `0` and `I`),
//! * as certified lower bounds from explicit local measurement families,
//!
//! together with the channel-level analogue (supremum over reference-assisted
//! inputs), analytic fast paths for Werner, isotropic, and depolarizing
//! families, and `(epsilon, delta)` local-differential-privacy audits of
//! mechanisms over finite state or channel sets.
//!
//! Modules are layered bottom-up: [`hermlin`] (dense Hermitian linear
//! algebra), [`qobjects`] (states and channels), [`sdp`] (modeling layer and
//! interior-point solver), [`divergence`] (state divergences), [`chandiv`]
//! (channel divergences), [`privacy`] (audits), [`cli`] (command line).
//!
//! The `examples/` directory is the best entry point; each file there is a
//! small self-contained program exercising one capability.

pub mod chandiv;
pub mod cli;
pub mod divergence;
pub mod hermlin;
pub mod privacy;
pub mod qobjects;
pub mod sdp;

pub use chandiv::{ChannelPair, CovarianceDeclaration};
pub use divergence::{DivergenceQuery, DivergenceResult, MeasurementClass, Method};
pub use privacy::{AuditReport, ChannelSet, PrivacyParams, StateSet};
pub use hermlin::{BipartiteShape, ComplexMatrix, HermitianOperator, Subsystem};
pub use qobjects::{ChoiOperator, DensityMatrix, IsotropicParams, WernerParams};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}{}", context_suffix(context))]
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },
    #[error("not Hermitian: deviation {deviation:.3e} exceeds {limit:.3e}")]
    NotHermitian { deviation: f64, limit: f64 },
    #[error("shape {dim_a}x{dim_b} does not factor side length {side}")]
    ShapeMismatch {
        dim_a: usize,
        dim_b: usize,
        side: usize,
    },
    #[error("operator carries no bipartite shape ({context})")]
    MissingShape { context: &'static str },
    #[error("not a density matrix: {reason}")]
    InvalidState { reason: String },
    #[error("not a Choi operator: {reason}")]
    InvalidChoi { reason: String },
    #[error("invalid value for {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("invalid measurement operator: {reason}")]
    InvalidMeasurement { reason: String },
    #[error("malformed problem: {0}")]
    SdpBuild(String),
    #[error("solver stopped with status {status:?} after {iterations} iterations")]
    SolverFailure {
        status: sdp::SdpStatus,
        iterations: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("{0}")]
    Cli(String),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

impl Error {
    pub(crate) fn dims(left: usize, right: usize, context: &'static str) -> Self {
        Error::DimensionMismatch {
            left,
            right,
            context,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
