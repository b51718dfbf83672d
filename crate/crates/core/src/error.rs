use thiserror::Error;

/// Errors raised by the numerical layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("inner function is not pure (|Theta(0)| = {norm:.6})")]
    NotPure { norm: f64 },
    #[error("inner function check failed (max |Theta*Theta - I| = {deviation:.3e})")]
    NotInner { deviation: f64 },
    #[error("invalid Potapov factor: {0}")]
    InvalidFactor(String),
    #[error("grid of size {q} is too small: {reason}")]
    GridTooSmall { q: usize, reason: String },
    #[error("band [{lo}, {hi}] does not fit a grid of size {q}")]
    BandTooWide { lo: i64, hi: i64, q: usize },
    #[error("numerical rank {rank} does not match McMillan degree {degree}")]
    RankMismatch { rank: usize, degree: usize },
    #[error("point {re}+{im}i is not inside the open unit disk")]
    PointOnBoundary { re: f64, im: f64 },
    #[error("function is not in the model space (residual {residual:.3e})")]
    NotInModelSpace { residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("defect subspace is degenerate (rank {rank} < {expected})")]
    DegenerateDefect { rank: usize, expected: usize },
    #[error("W is not a strict contraction (|W| = {norm:.6})")]
    NotContraction { norm: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositive { eigenvalue: f64 },
    #[error("operator identity check failed for {what}: residual {residual:.3e}")]
    IdentityViolated { what: String, residual: f64 },
    #[error("membership tests disagree: least-squares {lsq:.3e}, compression {compression:.3e}")]
    Inconsistent { lsq: f64, compression: f64 },
    #[error("certificate flavor mismatch: expected {expected}")]
    FlavorMismatch { expected: &'static str },
    #[error("series did not converge after {terms} terms (tail {tail:.3e})")]
    NoConvergence { terms: usize, tail: f64 },
    #[error("certificate residual too large: {residual:.3e}")]
    ResidualTooLarge { residual: f64 },
    #[error("inner function is not monomial")]
    NotMonomial,
}

pub type Result<T> = std::result::Result<T, Error>;
