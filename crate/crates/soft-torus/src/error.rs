//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in the numerical kernels and the
/// higher-level invariant/solver routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("eigenvalue within {dist:.3e} of the branch cut at angle {omega:.6}")]
    SpectrumOnCut { omega: f64, dist: f64 },

    #[error("input is singular or too close to singular")]
    SingularInput,

    #[error("spectrum of e(u,v) approaches 1/2 (gap {gap:.3e} < policy {policy:.3e})")]
    GapTooSmall { gap: f64, policy: f64 },

    #[error("multiplicative commutator is not central (defect {defect:.3e} > tol {tol:.3e})")]
    NotCentral { defect: f64, tol: f64 },

    #[error("r^q differs from t by {dist:.3e}")]
    RootMismatch { dist: f64 },

    #[error("u^q is not a scalar matrix (defect {defect:.3e})")]
    NotCentralPower { defect: f64 },

    #[error("matrix-unit relations violated (residual {residual:.3e})")]
    RelationViolation { residual: f64 },

    #[error("block size {q} does not divide dimension {n}")]
    NotDivisible { q: i64, n: usize },

    #[error("decomposition residual {residual:.3e} exceeds 100x tolerance")]
    DecompositionFailed { residual: f64 },

    #[error("infeasible: obstruction winding_normalized={winding} target={target} q={q} n={n}")]
    Infeasible {
        winding: f64,
        target: f64,
        q: i64,
        n: usize,
    },

    #[error("target angle is not rational with denominator <= {max_q}: {value}")]
    IrrationalTarget { value: f64, max_q: i64 },

    #[error("eigenvalue-count and sign-function paths disagree on the bott integer ({counted} vs {traced})")]
    CrossCheckFailed { counted: i64, traced: i64 },

    #[error("eigensolver did not converge within the sweep limit")]
    NoConvergence,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
