//! Pure-quantum states of knowledge, stored as their reduced density
//! matrix over the environment.

use nalgebra::Complex;

use crate::env::EnvSpace;
use crate::error::{QkError, Result};
use crate::numerics::eigen::{self, hermitian_deviation, scaled_tol, CMatrix, C64};
use crate::order::{self, OrderVerdict};

use super::Knowledge;

/// Nonnormalized wavevectors over the environment, one per memory state.
#[derive(Debug, Clone)]
pub struct WaveFamily {
    pub env: EnvSpace,
    pub vectors: Vec<Vec<C64>>,
}

impl WaveFamily {
    pub fn new(env: &EnvSpace, vectors: Vec<Vec<C64>>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != env.dim()) {
            return Err(QkError::DimensionMismatch(format!(
                "wavevector of length {} for environment of size {}",
                v.len(),
                env.dim()
            )));
        }
        Ok(Self {
            env: env.clone(),
            vectors,
        })
    }

    /// The `E×M` amplitude matrix.
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.env.dim(), self.vectors.len(), |e, m| self.vectors[m][e])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSok {
    env: EnvSpace,
    gram: CMatrix,
}

impl QuantumSok {
    /// Validate Hermiticity and positivity within the float tolerance.
    pub fn new(env: &EnvSpace, gram: CMatrix) -> Result<Self> {
        let d = env.dim();
        if gram.nrows() != d || gram.ncols() != d {
            return Err(QkError::DimensionMismatch(format!(
                "{}x{} gram for environment of size {d}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        let tol = scaled_tol(&gram);
        let dev = hermitian_deviation(&gram);
        if dev > tol {
            return Err(QkError::InvalidState(format!("gram is not Hermitian (deviation {dev:e})")));
        }
        let gram = eigen::hermitian_part(&gram);
        let min = eigen::min_eigenvalue(&gram)?;
        if min < -tol {
            return Err(QkError::InvalidState(format!(
                "gram is not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(Self {
            env: env.clone(),
            gram,
        })
    }

    /// Skip validation; callers guarantee a PSD Hermitian matrix.
    pub(crate) fn from_gram_unchecked(env: &EnvSpace, gram: CMatrix) -> Self {
        Self {
            env: env.clone(),
            gram,
        }
    }

    /// `Σ Ψ Ψ†` over the family.
    pub fn from_waves(w: &WaveFamily) -> Self {
        let m = w.matrix();
        Self::from_gram_unchecked(&w.env, &m * m.adjoint())
    }

    pub fn from_real(env: &EnvSpace, rows: &[Vec<f64>]) -> Result<Self> {
        let d = env.dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(QkError::DimensionMismatch("gram rows".into()));
        }
        Self::new(env, CMatrix::from_fn(d, d, |i, j| Complex::new(rows[i][j], 0.0)))
    }

    pub fn env(&self) -> &EnvSpace {
        &self.env
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// A representative `E×E` amplitude matrix, the PSD square root.
    pub fn representative(&self) -> CMatrix {
        eigen::psd_sqrt(&self.gram)
    }

    pub fn with_env(&self, env: &EnvSpace) -> Result<Self> {
        if env.dim() != self.env.dim() {
            return Err(QkError::DimensionMismatch(format!(
                "cannot move a state over {} to {}",
                self.env, env
            )));
        }
        Ok(Self::from_gram_unchecked(env, self.gram.clone()))
    }

    pub fn partial_trace(&self, name: &str) -> Result<Self> {
        let (rest, g) = partial_trace_matrix(&self.env, &self.gram, name)?;
        Ok(Self::from_gram_unchecked(&rest, g))
    }

    /// Tensor with the point `value` of a new register.
    pub fn tensor_point(&self, register: crate::env::Register, value: usize) -> Result<Self> {
        let size = register.size();
        if value >= size {
            return Err(QkError::DimensionMismatch(format!(
                "value {value} outside register `{}`",
                register.name
            )));
        }
        let env = self.env.with_register(register)?;
        let d = self.env.dim();
        let mut g = CMatrix::zeros(env.dim(), env.dim());
        for i in 0..d {
            for j in 0..d {
                g[(i * size + value, j * size + value)] = self.gram[(i, j)];
            }
        }
        Ok(Self::from_gram_unchecked(&env, g))
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        let scale = eigen::max_abs(&self.gram).max(eigen::max_abs(&other.gram));
        self.env == other.env
            && eigen::max_abs(&(&self.gram - &other.gram)) <= crate::numerics::eps() * scale.max(1.0)
    }
}

/// Partial trace of any square matrix over `env` with respect to one register.
pub fn partial_trace_matrix(env: &EnvSpace, m: &CMatrix, name: &str) -> Result<(EnvSpace, CMatrix)> {
    let (rest, map) = env.trace_out(name)?;
    let mut g = CMatrix::zeros(rest.dim(), rest.dim());
    for (a, &(ra, ca)) in map.iter().enumerate() {
        for (b, &(rb, cb)) in map.iter().enumerate() {
            if ca == cb {
                g[(ra, rb)] += m[(a, b)];
            }
        }
    }
    Ok((rest, g))
}

impl Knowledge for QuantumSok {
    type Field = f64;

    fn env(&self) -> &EnvSpace {
        &self.env
    }
    fn zero(env: &EnvSpace) -> Self {
        Self::from_gram_unchecked(env, CMatrix::zeros(env.dim(), env.dim()))
    }
    fn one(env: &EnvSpace) -> Self {
        let d = env.dim();
        Self::from_gram_unchecked(env, CMatrix::from_element(d, d, Complex::new(1.0, 0.0)))
    }
    fn point(env: &EnvSpace, label: &str) -> Result<Self> {
        let e = env.index_of(label)?;
        let mut g = CMatrix::zeros(env.dim(), env.dim());
        g[(e, e)] = Complex::new(1.0, 0.0);
        Ok(Self::from_gram_unchecked(env, g))
    }
    fn add(&self, other: &Self) -> Result<Self> {
        self.env.ensure_same(&other.env)?;
        Ok(Self::from_gram_unchecked(&self.env, &self.gram + &other.gram))
    }
    /// Hadamard product of the grams (PSD by the Schur product theorem).
    fn mul(&self, other: &Self) -> Result<Self> {
        self.env.ensure_same(&other.env)?;
        Ok(Self::from_gram_unchecked(
            &self.env,
            self.gram.component_mul(&other.gram),
        ))
    }
    fn scale(&self, lambda: &f64) -> Result<Self> {
        if *lambda < 0.0 {
            return Err(QkError::NegativeScalarOnSok(*lambda));
        }
        Ok(Self::from_gram_unchecked(
            &self.env,
            &self.gram * Complex::new(*lambda, 0.0),
        ))
    }
    fn trace(&self) -> f64 {
        eigen::trace_re(&self.gram)
    }
    fn eval(&self) -> Vec<f64> {
        (0..self.gram.nrows()).map(|i| self.gram[(i, i)].re).collect()
    }
    fn partial_trace(&self, register: &str) -> Result<Self> {
        QuantumSok::partial_trace(self, register)
    }
    fn canonical(&self) -> Self {
        self.clone()
    }
    fn same_class(&self, other: &Self) -> Result<bool> {
        self.env.ensure_same(&other.env)?;
        Ok(self.approx_eq(other))
    }
    fn leq(&self, other: &Self) -> Result<OrderVerdict<f64>> {
        order::leq_quantum(self, other)
    }
    fn tensor_point(&self, register: crate::env::Register, value: usize) -> Result<Self> {
        QuantumSok::tensor_point(self, register, value)
    }
    fn with_env(&self, env: &EnvSpace) -> Result<Self> {
        QuantumSok::with_env(self, env)
    }
    /// Split `pos - neg` into its positive and negative eigenspace parts.
    fn reduce_quasi(pos: Self, neg: Self) -> (Self, Self) {
        let (p, n) = eigen::split_pos_neg(&(&pos.gram - &neg.gram));
        (
            Self::from_gram_unchecked(&pos.env, p),
            Self::from_gram_unchecked(&pos.env, n),
        )
    }
}
