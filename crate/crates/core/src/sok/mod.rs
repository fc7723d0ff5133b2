//! States of knowledge and quasiknowledge: representatives and algebra.

pub mod classical;
pub mod decoherent;
pub mod quantum;
pub mod quasi;

pub use classical::{ClassicalSok, Column};
pub use decoherent::DecoherentRecord;
pub use quantum::{QuantumSok, WaveFamily};
pub use quasi::QuasiSok;

use crate::env::{EnvSpace, Register};
use crate::error::Result;
use crate::numerics::Scalar;
use crate::order::OrderVerdict;

/// Operations shared by classical and pure-quantum states of knowledge.
pub trait Knowledge: Clone + std::fmt::Debug + Send + Sync + Sized {
    type Field: Scalar;

    fn env(&self) -> &EnvSpace;
    fn zero(env: &EnvSpace) -> Self;
    /// Multiplicative unit, the embedding of the real number 1.
    fn one(env: &EnvSpace) -> Self;
    fn point(env: &EnvSpace, label: &str) -> Result<Self>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn scale(&self, lambda: &Self::Field) -> Result<Self>;
    fn trace(&self) -> Self::Field;
    fn eval(&self) -> Vec<Self::Field>;
    fn partial_trace(&self, register: &str) -> Result<Self>;
    fn canonical(&self) -> Self;
    /// Equality of canonical forms.
    fn same_class(&self, other: &Self) -> Result<bool>;
    fn leq(&self, other: &Self) -> Result<OrderVerdict<Self::Field>>;
    /// Tensor with the point `value` of a new register.
    fn tensor_point(&self, register: Register, value: usize) -> Result<Self>;
    /// Reinterpret over an environment of the same size.
    fn with_env(&self, env: &EnvSpace) -> Result<Self>;

    /// Shrink a formal difference to an equivalent, smaller one.
    fn reduce_quasi(pos: Self, neg: Self) -> (Self, Self) {
        (pos, neg)
    }

    /// Embedding of a nonnegative real: all-`r` classical column, `r·J` gram.
    fn embed_real(env: &EnvSpace, r: &Self::Field) -> Result<Self> {
        Self::one(env).scale(r)
    }

    fn is_zero(&self) -> bool {
        self.trace().approx_zero()
    }
}
