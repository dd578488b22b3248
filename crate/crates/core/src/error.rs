use thiserror::Error;

/// Errors surfaced by basis construction, algebra ops and integrators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("quadrature underresolved: Gram deviation {observed:.3e} exceeds {tol:.3e}")]
    GramDeviation { observed: f64, tol: f64 },

    #[error("degree overflow: term of degree {degree} exceeds budget {budget}")]
    DegreeOverflow { degree: u32, budget: u32 },

    #[error("incompatible truncation policies: {0}")]
    PolicyMismatch(String),

    #[error("wick exponential tail mass bound {bound:.3e} above threshold {threshold:.3e}; raise n_max or shrink the direction")]
    TailMass { bound: f64, threshold: f64 },

    #[error("step {step} is not adapted: depends on noise at grid index {dep}")]
    NotAdapted { step: usize, dep: usize },

    #[error("kernel model: {0}")]
    KernelModel(&'static str),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
