use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (defect {defect:e}, allowed {allowed:e})")]
    NotHermitian { defect: f64, allowed: f64 },

    #[error("matrix is not a unit-norm PSD matrix: {0}")]
    NotPsdUnit(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("enumeration refused: C({m},{k}) = {count} words exceeds the cap of {cap}")]
    EnumerationCap {
        m: usize,
        k: usize,
        count: u128,
        cap: u128,
    },

    #[error("imaginary trace defect {defect:e} exceeds {limit:e} for coefficient k = {k}")]
    ImaginaryTrace { k: usize, defect: f64, limit: f64 },

    #[error("Hurwitz table of depth {depth} cannot supply S_({m},{k})")]
    TableTooShallow { depth: usize, m: usize, k: usize },

    #[error("invalid matrix data: field `{field}`: {reason}")]
    Schema { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl LabError {
    /// Failures that signal a numerical integrity breach rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::EigenNoConvergence { .. }
                | LabError::ImaginaryTrace { .. }
                | LabError::NonFinite { .. }
        )
    }
}
