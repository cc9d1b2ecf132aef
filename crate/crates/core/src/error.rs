use thiserror::Error;

/// Errors surfaced by the operator-algebra kernels.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("eigenvalue s_{index} = {value} is not strictly positive")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("spectrum not nondecreasing at level {index}: {previous} -> {value}")]
    NotMonotone {
        index: usize,
        previous: f64,
        value: f64,
    },

    #[error("level {level} out of range (level count {count})")]
    LevelOutOfRange { level: usize, count: usize },

    #[error("tail sum of s_l^(-2n) cannot be certified convergent: {reason}")]
    DivergentTail { reason: String },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("sequence has {got} cutoffs, need at least {need} for window {window}")]
    TooFewCutoffs {
        got: usize,
        need: usize,
        window: usize,
    },

    #[error("matrix is not Hermitian (defect {defect:.3e} > tol {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("operation requires the {expected} family kind, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("composite Simpson needs an even panel count >= 2, got {0}")]
    OddPanels(usize),

    #[error("membership ratio undefined for the zero operator")]
    ZeroOperator,

    #[error("no cutoff below the truncation reaches eps {eps:.3e}; best residual {best:.3e}")]
    NotReachable { eps: f64, best: f64 },

    #[error("commutator criterion not applicable: residual {residual:.3e} > {tol:.3e}")]
    CriterionNotApplicable { residual: f64, tol: f64 },

    #[error("site count {sites} outside supported range {min}..={max}")]
    SiteOutOfRange { sites: usize, min: usize, max: usize },

    #[error("angle rule cannot realize overlap regime {regime}: {detail}")]
    RegimeUnachievable { regime: String, detail: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
