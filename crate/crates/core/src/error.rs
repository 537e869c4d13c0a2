use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (minimal eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("similarity is numerically singular (condition {condition:.3e})")]
    SingularSimilarity { condition: f64 },
    #[error("not a row contraction (row norm {row_norm:.6})")]
    NotContraction { row_norm: f64 },
    #[error("not a row partial isometry (idempotence defect {defect:.3e})")]
    NotPartialIsometry { defect: f64 },
    #[error("defect point is not a strict contraction (norm {norm:.6})")]
    NotPure { norm: f64 },
    #[error("Moebius parameter is not a strict contraction (norm {norm:.6})")]
    NotStrict { norm: f64 },
    #[error("linear pencil is singular (condition {condition:.3e})")]
    SingularPencil { condition: f64 },
    #[error("model denominator is singular (condition {condition:.3e})")]
    DenominatorSingular { condition: f64 },
    #[error("row contraction is not CNC (generated subspace has dimension {dim} of {total})")]
    NotCnc { dim: usize, total: usize },
    #[error("function is not constant on the unitary part (deviation {deviation:.3e})")]
    ConstancyViolated { deviation: f64 },
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable z{index}")]
    UnknownVariable { index: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
