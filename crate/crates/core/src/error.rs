use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e}, tolerance {tol:.3e})")]
    NonHermitian { defect: f64, tol: f64 },
    #[error("matrix is not skew-symmetric (defect {0:.3e})")]
    NonSkew(f64),
    #[error("scalar function evaluated outside its domain at eigenvalue {0}")]
    DomainError(f64),
    #[error("skew operator has a numerical kernel (smallest singular value {0:.3e})")]
    SingularD(f64),
    #[error("contraction is not strict (norm {0})")]
    NotStrict(f64),
    #[error("operator is not a contraction (norm {0})")]
    NotContraction(f64),
    #[error("subspace basis is degenerate: {0}")]
    DegenerateBasis(String),
    #[error("subspace is not standard: {0}")]
    NotStandard(String),
    #[error("form is not positive: {0}")]
    NotPositiveDefinite(String),
    #[error("point {re}+{im}i lies outside the closed strip 0 <= Im z <= {beta}")]
    OutOfStrip { re: f64, im: f64, beta: f64 },
    #[error("measure has a negative atom at lambda = {lambda} (min eigenvalue {min_eig:.3e})")]
    NegativeAtom { lambda: f64, min_eig: f64 },
    #[error("recovery is ill-posed: {0}")]
    IllPosed(String),
    #[error("space is not reflection positive (min eigenvalue {0:.3e})")]
    NotThetaPositive(f64),
    #[error("subspace is not a graph over the +1 eigenspace: {0}")]
    NotGraph(String),
    #[error("function is not tau-invariant (defect {0:.3e})")]
    NotTauInvariant(f64),
    #[error("kernels do not commute (defect {0:.3e})")]
    NonCommuting(f64),
    #[error("operator does not commute with the representation (defect {0:.3e})")]
    NotCommuting(f64),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("bad grid: {0}")]
    BadGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
