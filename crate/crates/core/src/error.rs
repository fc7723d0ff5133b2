use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QkError {
    #[error("environment mismatch: {0}")]
    EnvMismatch(String),
    #[error("unknown environment label `{0}`")]
    UnknownLabel(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("invalid environment: {0}")]
    InvalidEnv(String),
    #[error("negative scalar {0} applied to a state of knowledge")]
    NegativeScalarOnSok(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("invalid law of nature: {0}")]
    InvalidLaw(String),
    #[error("output at step {step} is not feasible (residual {residual:e})")]
    InfeasibleOutput { step: usize, residual: f64 },
    #[error("idle condition violated: {0}")]
    IdleViolation(String),
    #[error("witness is not feasible: {0}")]
    InfeasibleWitness(String),
    #[error("law of nature is not block-diagonal in the environment")]
    BlockDiagViolation,
    #[error("normalization violated: {0}")]
    NormalizationViolation(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("truncation too small: tail bound {tail:e} exceeds tolerance {tol:e}")]
    TruncationTooSmall { tail: f64, tol: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cancelled")]
    Cancelled,
    #[error(transparent)]
    Numerics(NumericsError),
}

impl From<NumericsError> for QkError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::Cancelled => QkError::Cancelled,
            other => QkError::Numerics(other),
        }
    }
}

impl QkError {
    /// Errors caused by malformed input rather than by the mathematics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            QkError::Parse(_)
                | QkError::InvalidEnv(_)
                | QkError::InvalidState(_)
                | QkError::InvalidLaw(_)
                | QkError::DimensionMismatch(_)
                | QkError::UnknownLabel(_)
                | QkError::UnknownRegister(_)
        )
    }
}

pub type Result<T, E = QkError> = std::result::Result<T, E>;
