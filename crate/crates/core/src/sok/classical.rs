//! Classical representatives: nonnegative `E×M` matrices stored column-wise
//! as a positive weight times a normalized column.

use std::cmp::Ordering;

use crate::env::EnvSpace;
use crate::error::{QkError, Result};
use crate::numerics::scalar::{lex_cmp, sum};
use crate::numerics::Scalar;
use crate::order::{self, OrderVerdict};

use super::Knowledge;

#[derive(Debug, Clone, PartialEq)]
pub struct Column<S> {
    pub weight: S,
    /// Normalized: entries sum to one.
    pub p: Vec<S>,
}

impl<S: Scalar> Column<S> {
    /// The unnormalized matrix column `weight · p`.
    pub fn raw(&self) -> Vec<S> {
        self.p.iter().map(|v| v.clone() * self.weight.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSok<S> {
    env: EnvSpace,
    columns: Vec<Column<S>>,
}

impl<S: Scalar> ClassicalSok<S> {
    pub fn zero(env: &EnvSpace) -> Self {
        Self {
            env: env.clone(),
            columns: Vec::new(),
        }
    }

    /// Build from raw matrix columns. Zero columns are dropped.
    pub fn from_columns(env: &EnvSpace, columns: Vec<Vec<S>>) -> Result<Self> {
        let mut out = Self::zero(env);
        for col in columns {
            out.push_raw(col)?;
        }
        Ok(out)
    }

    /// Build from a matrix given row by row (rows indexed by the environment).
    pub fn from_rows(env: &EnvSpace, rows: &[Vec<S>]) -> Result<Self> {
        if rows.len() != env.dim() {
            return Err(QkError::DimensionMismatch(format!(
                "{} rows for environment of size {}",
                rows.len(),
                env.dim()
            )));
        }
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(QkError::DimensionMismatch("ragged matrix rows".into()));
        }
        let cols = (0..m)
            .map(|j| rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        Self::from_columns(env, cols)
    }

    /// Build from `(weight, column)` pairs; columns are renormalized.
    pub fn from_weighted(env: &EnvSpace, columns: Vec<(S, Vec<S>)>) -> Result<Self> {
        let mut out = Self::zero(env);
        for (w, p) in columns {
            if w.is_neg() {
                return Err(QkError::InvalidState(format!("negative weight {w}")));
            }
            let raw = p.into_iter().map(|v| v * w.clone()).collect();
            out.push_raw(raw)?;
        }
        Ok(out)
    }

    fn push_raw(&mut self, col: Vec<S>) -> Result<()> {
        if col.len() != self.env.dim() {
            return Err(QkError::DimensionMismatch(format!(
                "column of length {} for environment of size {}",
                col.len(),
                self.env.dim()
            )));
        }
        if let Some(v) = col.iter().find(|v| v.is_neg()) {
            return Err(QkError::InvalidState(format!("negative entry {v}")));
        }
        let col: Vec<S> = col
            .into_iter()
            .map(|v| if v.is_neg() || v.is_zero() { S::zero() } else { v })
            .collect();
        let total = sum(&col);
        if !total.is_pos() {
            return Ok(());
        }
        let p = col.into_iter().map(|v| v / total.clone()).collect();
        self.columns.push(Column { weight: total, p });
        Ok(())
    }

    pub fn point_index(env: &EnvSpace, e: usize) -> Self {
        let mut p = vec![S::zero(); env.dim()];
        p[e] = S::one();
        Self {
            env: env.clone(),
            columns: vec![Column { weight: S::one(), p }],
        }
    }

    pub fn env(&self) -> &EnvSpace {
        &self.env
    }

    pub fn columns(&self) -> &[Column<S>] {
        &self.columns
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Raw matrix columns `weight · p`.
    pub fn matrix_columns(&self) -> Vec<Vec<S>> {
        self.columns.iter().map(Column::raw).collect()
    }

    /// Raw matrix as rows over the environment.
    pub fn to_rows(&self) -> Vec<Vec<S>> {
        let cols = self.matrix_columns();
        (0..self.env.dim())
            .map(|e| cols.iter().map(|c| c[e].clone()).collect())
            .collect()
    }

    /// Same columns over a relabeled environment of equal size.
    pub fn with_env(&self, env: &EnvSpace) -> Result<Self> {
        if env.dim() != self.env.dim() {
            return Err(QkError::DimensionMismatch(format!(
                "cannot move a state over {} to {}",
                self.env, env
            )));
        }
        Ok(Self {
            env: env.clone(),
            columns: self.columns.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.env.ensure_same(&other.env)?;
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        Ok(Self {
            env: self.env.clone(),
            columns,
        })
    }

    pub fn scale(&self, lambda: &S) -> Result<Self> {
        if lambda.is_neg() {
            return Err(QkError::NegativeScalarOnSok(lambda.to_f64()));
        }
        if !lambda.is_pos() {
            return Ok(Self::zero(&self.env));
        }
        Ok(Self {
            env: self.env.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    weight: c.weight.clone() * lambda.clone(),
                    p: c.p.clone(),
                })
                .collect(),
        })
    }

    /// Pairwise Hadamard products of columns, first factor's index outermost.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.env.ensure_same(&other.env)?;
        let mut out = Self::zero(&self.env);
        for a in &self.columns {
            for b in &other.columns {
                let h: Vec<S> = a
                    .p
                    .iter()
                    .zip(&b.p)
                    .map(|(x, y)| x.clone() * y.clone())
                    .collect();
                let s = sum(&h);
                if !s.is_pos() {
                    continue;
                }
                out.columns.push(Column {
                    weight: a.weight.clone() * b.weight.clone() * s.clone(),
                    p: h.into_iter().map(|v| v / s.clone()).collect(),
                });
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> S {
        self.columns
            .iter()
            .fold(S::zero(), |acc, c| acc + c.weight.clone())
    }

    /// Row sums of the representative.
    pub fn eval(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.env.dim()];
        for c in &self.columns {
            for (o, v) in out.iter_mut().zip(&c.p) {
                *o = o.clone() + v.clone() * c.weight.clone();
            }
        }
        out
    }

    /// Move register `name` into memory: each column splits into one column per value.
    pub fn partial_trace(&self, name: &str) -> Result<Self> {
        let (rest, map) = self.env.trace_out(name)?;
        let pos = self.env.register_position(name)?;
        let size = self.env.registers()[pos].size();
        let mut out = Self::zero(&rest);
        for c in &self.columns {
            let mut parts = vec![vec![S::zero(); rest.dim()]; size];
            for (flat, &(r, k)) in map.iter().enumerate() {
                parts[k][r] = c.p[flat].clone();
            }
            for part in parts {
                let raw = part.into_iter().map(|v| v * c.weight.clone()).collect();
                out.push_raw(raw)?;
            }
        }
        Ok(out)
    }

    /// Tensor with a point of a new register: column `p ↦ p ⊗ δ_value`.
    pub fn tensor_point(&self, register: crate::env::Register, value: usize) -> Result<Self> {
        let size = register.size();
        if value >= size {
            return Err(QkError::DimensionMismatch(format!(
                "value {value} outside register `{}` of size {size}",
                register.name
            )));
        }
        let env = self.env.with_register(register)?;
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut p = vec![S::zero(); env.dim()];
                for (e, v) in c.p.iter().enumerate() {
                    p[e * size + value] = v.clone();
                }
                Column {
                    weight: c.weight.clone(),
                    p,
                }
            })
            .collect();
        Ok(Self { env, columns })
    }

    /// Drop zero columns, merge equal normalized columns and sort.
    pub fn canonicalize(&self) -> Self {
        let mut cols: Vec<Column<S>> = self
            .columns
            .iter()
            .filter(|c| c.weight.is_pos())
            .cloned()
            .collect();
        cols.sort_by(|a, b| lex_cmp(&a.p, &b.p));
        let mut merged: Vec<Column<S>> = Vec::with_capacity(cols.len());
        for c in cols {
            let hit = if S::EXACT {
                merged.last_mut().filter(|m| m.p == c.p)
            } else {
                merged.iter_mut().find(|m| columns_close(&m.p, &c.p))
            };
            match hit {
                Some(m) => m.weight = m.weight.clone() + c.weight,
                None => merged.push(c),
            }
        }
        merged.sort_by(|a, b| match lex_cmp(&a.p, &b.p) {
            Ordering::Equal => a.weight.total_cmp(&b.weight),
            o => o,
        });
        Self {
            env: self.env.clone(),
            columns: merged,
        }
    }

    pub fn canonical_eq(&self, other: &Self) -> bool {
        if self.env != other.env {
            return false;
        }
        let a = self.canonicalize();
        let b = other.canonicalize();
        a.columns.len() == b.columns.len()
            && a.columns.iter().zip(&b.columns).all(|(x, y)| {
                x.weight.approx_eq(&y.weight) && columns_close(&x.p, &y.p)
            })
    }

    /// Convert the scalar type, e.g. exact to float.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ClassicalSok<T> {
        ClassicalSok {
            env: self.env.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    weight: f(&c.weight),
                    p: c.p.iter().map(&f).collect(),
                })
                .collect(),
        }
    }

    pub fn to_f64(&self) -> ClassicalSok<f64> {
        self.map_scalar(|v| v.to_f64())
    }
}

fn columns_close<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

impl<S: Scalar> Knowledge for ClassicalSok<S> {
    type Field = S;

    fn env(&self) -> &EnvSpace {
        &self.env
    }
    fn zero(env: &EnvSpace) -> Self {
        ClassicalSok::zero(env)
    }
    fn one(env: &EnvSpace) -> Self {
        ClassicalSok::from_columns(env, vec![vec![S::one(); env.dim()]])
            .expect("all-ones column is valid")
    }
    fn point(env: &EnvSpace, label: &str) -> Result<Self> {
        Ok(Self::point_index(env, env.index_of(label)?))
    }
    fn add(&self, other: &Self) -> Result<Self> {
        ClassicalSok::add(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        ClassicalSok::mul(self, other)
    }
    fn scale(&self, lambda: &S) -> Result<Self> {
        ClassicalSok::scale(self, lambda)
    }
    fn trace(&self) -> S {
        ClassicalSok::trace(self)
    }
    fn eval(&self) -> Vec<S> {
        ClassicalSok::eval(self)
    }
    fn partial_trace(&self, register: &str) -> Result<Self> {
        ClassicalSok::partial_trace(self, register)
    }
    fn canonical(&self) -> Self {
        self.canonicalize()
    }
    fn same_class(&self, other: &Self) -> Result<bool> {
        self.env.ensure_same(&other.env)?;
        Ok(self.canonical_eq(other))
    }
    fn leq(&self, other: &Self) -> Result<OrderVerdict<S>> {
        order::leq_classical(self, other)
    }

    fn tensor_point(&self, register: crate::env::Register, value: usize) -> Result<Self> {
        ClassicalSok::tensor_point(self, register, value)
    }
    fn with_env(&self, env: &EnvSpace) -> Result<Self> {
        ClassicalSok::with_env(self, env)
    }
    /// Canonicalize both parts and cancel columns they share.
    fn reduce_quasi(pos: Self, neg: Self) -> (Self, Self) {
        let mut p = pos.canonicalize();
        let mut n = neg.canonicalize();
        for pc in p.columns.iter_mut() {
            if let Some(nc) = n.columns.iter_mut().find(|nc| columns_close(&nc.p, &pc.p)) {
                let common = if pc.weight <= nc.weight {
                    pc.weight.clone()
                } else {
                    nc.weight.clone()
                };
                pc.weight = pc.weight.clone() - common.clone();
                nc.weight = nc.weight.clone() - common;
            }
        }
        p.columns.retain(|c| c.weight.is_pos());
        n.columns.retain(|c| c.weight.is_pos());
        (p, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn env2() -> EnvSpace {
        EnvSpace::new(["0", "1"]).unwrap()
    }

    #[test]
    fn direct_sum_of_mixtures() {
        let env = env2();
        let a = ClassicalSok::from_rows(&env, &[vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]).unwrap();
        let b = ClassicalSok::from_rows(&env, &[vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]]).unwrap();
        let sum = a.scale(&q(1, 2)).unwrap().add(&b.scale(&q(1, 2)).unwrap()).unwrap();
        assert_eq!(
            sum.to_rows(),
            vec![
                vec![q(1, 4), q(0, 1), q(0, 1), q(1, 4)],
                vec![q(0, 1), q(1, 4), q(1, 4), q(0, 1)]
            ]
        );
    }

    #[test]
    fn embeddings() {
        let env = env2();
        let p = ClassicalSok::<Rational>::point(&env, "0").unwrap();
        assert_eq!(p.eval(), vec![q(1, 1), q(0, 1)]);
        assert_eq!(p.trace(), q(1, 1));
        let one = ClassicalSok::<Rational>::embed_real(&env, &q(1, 1)).unwrap();
        assert_eq!(one.to_rows(), vec![vec![q(1, 1)], vec![q(1, 1)]]);
        let zero = ClassicalSok::<Rational>::embed_real(&env, &q(0, 1)).unwrap();
        assert_eq!(zero.n_columns(), 0);
        assert!(matches!(
            ClassicalSok::<Rational>::point(&env, "7"),
            Err(QkError::UnknownLabel(_))
        ));
    }

    #[test]
    fn scaling_rules() {
        let env = env2();
        let s = ClassicalSok::from_weighted(&env, vec![(q(1, 2), vec![q(1, 3), q(2, 3)])]).unwrap();
        let doubled = s.scale(&q(2, 1)).unwrap();
        assert_eq!(doubled.columns()[0].weight, q(1, 1));
        assert_eq!(doubled.columns()[0].p, s.columns()[0].p);
        assert_eq!(s.scale(&q(0, 1)).unwrap().n_columns(), 0);
        assert!(matches!(s.scale(&q(-1, 1)), Err(QkError::NegativeScalarOnSok(_))));
    }

    #[test]
    fn canonical_merges_split_memory() {
        let env = env2();
        let p = ClassicalSok::from_rows(
            &env,
            &[vec![q(1, 4), q(1, 8), q(1, 8)], vec![q(1, 4), q(1, 8), q(1, 8)]],
        )
        .unwrap();
        let c = p.canonicalize();
        assert_eq!(c.n_columns(), 1);
        assert_eq!(c.columns()[0].weight, q(1, 1));
        assert_eq!(c.columns()[0].p, vec![q(1, 2), q(1, 2)]);
        assert_eq!(c.canonicalize(), c);
    }

    #[test]
    fn float_canonical_merges_within_eps() {
        let env = env2();
        let a = ClassicalSok::from_columns(&env, vec![vec![0.3, 0.7], vec![0.3 + 1e-12, 0.7]]).unwrap();
        assert_eq!(a.canonicalize().n_columns(), 1);
    }

    #[test]
    fn partial_trace_splits_columns() {
        let env = EnvSpace::from_registers(vec![
            crate::env::Register::indexed("E", 2),
            crate::env::Register::indexed("C", 2),
        ])
        .unwrap();
        // column concentrated on (e=1, c=0)
        let s = ClassicalSok::<Rational>::point_index(&env, 2);
        let t = s.partial_trace("C").unwrap();
        assert_eq!(t.env().dim(), 2);
        assert_eq!(t.to_rows(), vec![vec![q(0, 1)], vec![q(1, 1)]]);
        let full = ClassicalSok::<Rational>::from_columns(&env, vec![vec![q(1, 1), q(2, 1), q(3, 1), q(4, 1)]]).unwrap();
        let t = full.partial_trace("C").unwrap();
        assert_eq!(t.trace(), full.trace());
        assert_eq!(t.eval(), vec![q(3, 1), q(7, 1)]);
    }

    #[test]
    fn tracing_whole_environment_gives_trace() {
        let env = env2();
        let s = ClassicalSok::from_columns(&env, vec![vec![q(1, 3), q(1, 2)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let t = s.partial_trace(crate::env::DEFAULT_REGISTER).unwrap();
        assert_eq!(t.env().dim(), 1);
        assert_eq!(t.eval(), vec![s.trace()]);
    }

    #[test]
    fn rejects_negative_and_ragged_input() {
        let env = env2();
        assert!(ClassicalSok::from_columns(&env, vec![vec![q(-1, 1), q(1, 1)]]).is_err());
        assert!(ClassicalSok::from_rows(&env, &[vec![q(1, 1)], vec![]]).is_err());
        let other = EnvSpace::new(["x", "y"]).unwrap();
        let a = ClassicalSok::<Rational>::zero(&env);
        let b = ClassicalSok::<Rational>::zero(&other);
        assert!(matches!(a.add(&b), Err(QkError::EnvMismatch(_))));
    }
}
