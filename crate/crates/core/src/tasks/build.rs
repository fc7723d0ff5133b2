//! Sparse assembly of linear programs, including order constraints whose
//! right-hand columns carry unknown nonnegative weights.

use crate::numerics::lp::{LinearProgram, Sense};
use crate::numerics::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rel {
    Eq,
    Le,
}

#[derive(Debug, Clone)]
pub(crate) struct Builder<S> {
    pub objective: Vec<S>,
    free: Vec<bool>,
    rows: Vec<(Vec<(usize, S)>, Rel, S)>,
}

/// A raw column over `E` with an optional weight variable; `None` means weight one.
#[derive(Debug, Clone)]
pub(crate) struct ScaledColumn<S> {
    pub column: Vec<S>,
    pub weight: Option<usize>,
}

impl<S: Scalar> ScaledColumn<S> {
    pub fn fixed(column: Vec<S>) -> Self {
        Self { column, weight: None }
    }

    pub fn scaled(column: Vec<S>, var: usize) -> Self {
        Self {
            column,
            weight: Some(var),
        }
    }
}

impl<S: Scalar> Builder<S> {
    pub fn new() -> Self {
        Self {
            objective: Vec::new(),
            free: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn var(&mut self, cost: S) -> usize {
        self.objective.push(cost);
        self.free.push(false);
        self.objective.len() - 1
    }

    pub fn free_var(&mut self, cost: S) -> usize {
        let v = self.var(cost);
        self.free[v] = true;
        v
    }

    pub fn vars(&mut self, n: usize, cost: S) -> Vec<usize> {
        (0..n).map(|_| self.var(cost.clone())).collect()
    }

    pub fn row(&mut self, terms: Vec<(usize, S)>, rel: Rel, rhs: S) {
        self.rows.push((terms, rel, rhs));
    }

    /// `Σ lhs ≤ Σ rhs` in the preorder, via a witness `W` from right to left
    /// columns. Where a right column has weight `x`, the witness entries are
    /// stored premultiplied, `Y = x·W`, which keeps every constraint linear.
    /// Returns the witness variables, row-major over `(lhs, nonzero rhs)`.
    pub fn order(&mut self, lhs: &[ScaledColumn<S>], rhs: &[ScaledColumn<S>]) -> Vec<Vec<usize>> {
        let dim = lhs
            .iter()
            .chain(rhs)
            .map(|c| c.column.len())
            .max()
            .unwrap_or(0);
        let rhs: Vec<&ScaledColumn<S>> = rhs
            .iter()
            .filter(|c| c.column.iter().any(|v| !v.approx_zero()))
            .collect();
        let w: Vec<Vec<usize>> = lhs
            .iter()
            .map(|_| rhs.iter().map(|_| self.var(S::zero())).collect())
            .collect();
        for (a, col) in lhs.iter().enumerate() {
            for e in 0..dim {
                let mut terms: Vec<(usize, S)> = rhs
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| !r.column[e].approx_zero())
                    .map(|(b, r)| (w[a][b], r.column[e].clone()))
                    .collect();
                let v = col.column[e].clone();
                match col.weight {
                    Some(x) => {
                        if !v.approx_zero() {
                            terms.push((x, -v));
                        }
                        self.row(terms, Rel::Eq, S::zero());
                    }
                    None => self.row(terms, Rel::Eq, v),
                }
            }
        }
        for (b, r) in rhs.iter().enumerate() {
            let mut terms: Vec<(usize, S)> = (0..lhs.len()).map(|a| (w[a][b], S::one())).collect();
            match r.weight {
                Some(x) => {
                    terms.push((x, -S::one()));
                    self.row(terms, Rel::Le, S::zero());
                }
                None => self.row(terms, Rel::Le, S::one()),
            }
        }
        w
    }

    pub fn finish(&self, sense: Sense) -> LinearProgram<S> {
        let n = self.n_vars();
        let mut lp = LinearProgram::new(sense, self.objective.clone());
        for (v, &f) in self.free.iter().enumerate() {
            if f {
                lp.set_free(v);
            }
        }
        for (terms, rel, rhs) in &self.rows {
            let mut row = vec![S::zero(); n];
            for (v, c) in terms {
                row[*v] = row[*v].clone() + c.clone();
            }
            match rel {
                Rel::Eq => lp.add_eq(row, rhs.clone()),
                Rel::Le => lp.add_le(row, rhs.clone()),
            }
        }
        lp
    }
}
