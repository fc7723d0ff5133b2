//! Linear-algebra and feasibility kernel: exact/float simplex, Hermitian
//! eigen routines and a small PSD-program solver.

pub mod eigen;
pub mod lp;
pub mod psd;
pub mod scalar;

pub use eigen::{CMatrix, Eigen, C64};
pub use lp::{solve_lp, LinearProgram, LpOptions, LpOutcome, Sense, VarBound};
pub use psd::{solve_psd_program, PsdBlock, PsdOptions, PsdProgram, PsdSolution};
pub use scalar::{eps, format_rational, parse_rational, set_eps, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("no convergence after {iterations} iterations (primal {primal:e}, dual {dual:e})")]
    NoConvergence {
        iterations: usize,
        primal: f64,
        dual: f64,
    },
    #[error("program too large: {0}")]
    TooLarge(String),
    #[error("singular system")]
    Singular,
    #[error("cancelled")]
    Cancelled,
}
