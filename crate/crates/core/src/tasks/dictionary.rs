//! Finite column dictionaries used to truncate the classical cone.

use crate::numerics::scalar::lex_cmp;
use crate::numerics::Scalar;
use crate::sok::ClassicalSok;

pub const DEFAULT_MAX_COLUMNS: usize = 48;

/// Normalized nonnegative columns over one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<S> {
    pub dim: usize,
    pub columns: Vec<Vec<S>>,
    pub closure_depth: usize,
}

fn normalize<S: Scalar>(col: &[S]) -> Option<Vec<S>> {
    let total = col.iter().fold(S::zero(), |a, b| a + b.clone());
    if !total.is_pos() {
        return None;
    }
    Some(col.iter().map(|v| v.clone() / total.clone()).collect())
}

fn same<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

impl<S: Scalar> Dictionary<S> {
    /// Indicators and the uniform column only.
    pub fn basic(dim: usize) -> Self {
        Self::build(dim, &[], 0, usize::MAX)
    }

    /// Seeds, indicators and the uniform column, then `depth` rounds of adding the
    /// renormalized sum of every pair, stopping at `max_columns`.
    pub fn build(dim: usize, seeds: &[Vec<S>], depth: usize, max_columns: usize) -> Self {
        let mut d = Self {
            dim,
            columns: Vec::new(),
            closure_depth: depth,
        };
        for s in seeds {
            d.insert(s);
        }
        for e in 0..dim {
            let mut c = vec![S::zero(); dim];
            c[e] = S::one();
            d.insert(&c);
        }
        d.insert(&vec![S::one(); dim]);
        'rounds: for _ in 0..depth {
            let current = d.columns.clone();
            for i in 0..current.len() {
                for j in i + 1..current.len() {
                    if d.columns.len() >= max_columns {
                        break 'rounds;
                    }
                    let sum: Vec<S> = current[i]
                        .iter()
                        .zip(&current[j])
                        .map(|(a, b)| a.clone() + b.clone())
                        .collect();
                    d.insert(&sum);
                }
            }
        }
        d.columns.truncate(max_columns.max(dim + 1));
        d
    }

    /// Columns of the given states plus their images under the multipliers.
    pub fn from_states(
        states: &[&ClassicalSok<S>],
        multipliers: &[&ClassicalSok<S>],
        posterior_depth: usize,
        depth: usize,
        max_columns: usize,
    ) -> crate::error::Result<Self> {
        let dim = states.first().map_or(0, |s| s.env().dim());
        let mut seeds = Vec::new();
        for s in states {
            let mut layer = vec![(*s).clone()];
            seeds.extend(s.matrix_columns());
            for _ in 0..posterior_depth {
                let mut next = Vec::new();
                for x in &layer {
                    for m in multipliers {
                        let y = m.mul(x)?.canonicalize();
                        seeds.extend(y.matrix_columns());
                        next.push(y);
                    }
                }
                layer = next;
            }
        }
        Ok(Self::build(dim, &seeds, depth, max_columns))
    }

    pub fn insert(&mut self, col: &[S]) -> bool {
        if col.len() != self.dim {
            return false;
        }
        match normalize(col) {
            Some(c) if !self.columns.iter().any(|x| same(x, &c)) => {
                self.columns.push(c);
                true
            }
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Columns in lexicographic order, for reporting.
    pub fn sorted(&self) -> Vec<Vec<S>> {
        let mut c = self.columns.clone();
        c.sort_by(|a, b| lex_cmp(a, b));
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;

    #[test]
    fn basic_has_indicators_and_uniform() {
        let d = Dictionary::<Rational>::basic(3);
        assert_eq!(d.len(), 4);
        assert!(d.columns.iter().all(|c| c.iter().cloned().fold(Rational::from_ratio(0, 1), |a, b| a + b) == Rational::from_ratio(1, 1)));
    }

    #[test]
    fn closure_adds_midpoints_without_duplicates() {
        let d = Dictionary::<Rational>::build(2, &[], 1, usize::MAX);
        // (1,0), (0,1), (½,½); pairwise midpoints add (¾,¼) and (¼,¾).
        assert_eq!(d.len(), 5);
        let capped = Dictionary::<Rational>::build(2, &[], 3, 6);
        assert_eq!(capped.len(), 6);
    }

    #[test]
    fn zero_seed_is_ignored() {
        let mut d = Dictionary::<f64>::basic(2);
        assert!(!d.insert(&[0.0, 0.0]));
        assert!(!d.insert(&[2.0, 2.0]));
        assert!(d.insert(&[1.0, 3.0]));
    }
}
