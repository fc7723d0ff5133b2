//! Formal differences of states of knowledge.

use crate::env::EnvSpace;
use crate::error::Result;
use crate::numerics::Scalar;
use crate::order::OrderVerdict;

use super::Knowledge;

/// The formal difference `pos - neg`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiSok<K> {
    pos: K,
    neg: K,
}

impl<K: Knowledge> QuasiSok<K> {
    pub fn new(pos: K, neg: K) -> Result<Self> {
        pos.env().ensure_same(neg.env())?;
        let (pos, neg) = K::reduce_quasi(pos, neg);
        Ok(Self { pos, neg })
    }

    /// Keep the given parts as they are, e.g. to preserve a representative split.
    pub fn from_parts_raw(pos: K, neg: K) -> Result<Self> {
        pos.env().ensure_same(neg.env())?;
        Ok(Self { pos, neg })
    }

    pub fn from_sok(s: K) -> Self {
        let neg = K::zero(s.env());
        Self { pos: s, neg }
    }

    pub fn zero(env: &EnvSpace) -> Self {
        Self::from_sok(K::zero(env))
    }

    pub fn one(env: &EnvSpace) -> Self {
        Self::from_sok(K::one(env))
    }

    /// Nonnegative `r` embeds as `r·1 - 0`, negative `r` as `0 - |r|·1`.
    pub fn embed_real(env: &EnvSpace, r: &K::Field) -> Result<Self> {
        if r.is_neg() {
            let m = K::embed_real(env, &-r.clone())?;
            Ok(Self {
                pos: K::zero(env),
                neg: m,
            })
        } else {
            Ok(Self::from_sok(K::embed_real(env, r)?))
        }
    }

    pub fn pos(&self) -> &K {
        &self.pos
    }

    pub fn neg(&self) -> &K {
        &self.neg
    }

    pub fn env(&self) -> &EnvSpace {
        self.pos.env()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(self.pos.add(&other.pos)?, self.neg.add(&other.neg)?)
    }

    pub fn negate(&self) -> Self {
        Self {
            pos: self.neg.clone(),
            neg: self.pos.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.negate())
    }

    /// `(A - B)(C - D) = (AC + BD) - (AD + BC)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let ac = self.pos.mul(&other.pos)?;
        let bd = self.neg.mul(&other.neg)?;
        let ad = self.pos.mul(&other.neg)?;
        let bc = self.neg.mul(&other.pos)?;
        Self::new(ac.add(&bd)?, ad.add(&bc)?)
    }

    /// Any real factor; negative factors swap the parts.
    pub fn scale(&self, lambda: &K::Field) -> Result<Self> {
        if lambda.is_neg() {
            let m = -lambda.clone();
            Self::new(self.neg.scale(&m)?, self.pos.scale(&m)?)
        } else {
            Self::new(self.pos.scale(lambda)?, self.neg.scale(lambda)?)
        }
    }

    pub fn trace(&self) -> K::Field {
        self.pos.trace() - self.neg.trace()
    }

    pub fn eval(&self) -> Vec<K::Field> {
        self.pos
            .eval()
            .into_iter()
            .zip(self.neg.eval())
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn partial_trace(&self, register: &str) -> Result<Self> {
        Self::new(
            self.pos.partial_trace(register)?,
            self.neg.partial_trace(register)?,
        )
    }

    /// `(A - B) ≤ (C - D)` iff `A + D ≤ C + B`.
    pub fn leq(&self, other: &Self) -> Result<OrderVerdict<K::Field>> {
        let lhs = self.pos.add(&other.neg)?;
        let rhs = other.pos.add(&self.neg)?;
        lhs.leq(&rhs)
    }

    /// Equivalence: `A + D` and `C + B` have equal canonical forms.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        let lhs = self.pos.add(&other.neg)?;
        let rhs = other.pos.add(&self.neg)?;
        lhs.same_class(&rhs)
    }
}
