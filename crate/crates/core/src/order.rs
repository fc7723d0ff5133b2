//! Deciding the preorder with checkable witnesses, plus the expected-entropy
//! functional and the cancellation harness.

use crate::error::{QkError, Result};
use crate::numerics::eigen::{self, CMatrix};
use crate::numerics::lp::{solve_lp, LinearProgram, LpOptions, LpOutcome};
use crate::numerics::{eps, Scalar};
use crate::sok::{ClassicalSok, Knowledge, QuantumSok, QuasiSok};

/// Certificate that `a ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<S> {
    /// `P_a = P_b Tᵀ` with `T ≥ 0` and column sums at most one.
    Classical { t: Vec<Vec<S>>, norm: S },
    /// `A = B Tᵀ` for the square-root representatives, `σ_max(T) ≤ 1`.
    Quantum {
        t: CMatrix,
        norm: f64,
        min_eigenvalue: f64,
    },
}

impl<S: Scalar> Witness<S> {
    pub fn norm_f64(&self) -> f64 {
        match self {
            Witness::Classical { norm, .. } => norm.to_f64(),
            Witness::Quantum { norm, .. } => *norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderVerdict<S> {
    pub related: bool,
    pub witness: Option<Witness<S>>,
    /// Largest constraint violation found when rechecking the witness.
    pub residual: f64,
}

impl<S> OrderVerdict<S> {
    fn unrelated(residual: f64) -> Self {
        Self {
            related: false,
            witness: None,
            residual,
        }
    }
}

/// Largest column sum of a nonnegative matrix.
pub fn max_column_sum<S: Scalar>(t: &[Vec<S>]) -> S {
    let cols = t.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| t.iter().fold(S::zero(), |acc, row| acc + row[j].clone()))
        .fold(S::zero(), S::max_of)
}

/// Recheck `P_a = P_b Tᵀ`, `T ≥ 0`, column sums `≤ 1`; returns the worst violation.
pub fn verify_classical_witness<S: Scalar>(
    a: &ClassicalSok<S>,
    b: &ClassicalSok<S>,
    t: &[Vec<S>],
) -> Result<S> {
    a.env().ensure_same(b.env())?;
    let pa = a.matrix_columns();
    let pb = b.matrix_columns();
    if t.len() != pa.len() || t.iter().any(|row| row.len() != pb.len()) {
        return Err(QkError::DimensionMismatch(format!(
            "witness must be {}x{}",
            pa.len(),
            pb.len()
        )));
    }
    let mut worst = S::zero();
    for row in t {
        for v in row {
            worst = S::max_of(worst, -v.clone());
        }
    }
    worst = S::max_of(worst, max_column_sum(t) - S::one());
    for (i, col_a) in pa.iter().enumerate() {
        for (e, target) in col_a.iter().enumerate() {
            let got = pb
                .iter()
                .zip(&t[i])
                .fold(S::zero(), |acc, (col_b, w)| acc + col_b[e].clone() * w.clone());
            worst = S::max_of(worst, (got - target.clone()).abs());
        }
    }
    Ok(worst)
}

/// Decide `a ≤ b` for the given representatives by one feasibility LP.
pub fn leq_classical<S: Scalar>(a: &ClassicalSok<S>, b: &ClassicalSok<S>) -> Result<OrderVerdict<S>> {
    leq_classical_with(a, b, &LpOptions::default())
}

pub fn leq_classical_with<S: Scalar>(
    a: &ClassicalSok<S>,
    b: &ClassicalSok<S>,
    opts: &LpOptions,
) -> Result<OrderVerdict<S>> {
    a.env().ensure_same(b.env())?;
    let pa = a.matrix_columns();
    let pb = b.matrix_columns();
    let (ma, mb) = (pa.len(), pb.len());
    if ma == 0 {
        return Ok(OrderVerdict {
            related: true,
            witness: Some(Witness::Classical {
                t: Vec::new(),
                norm: S::zero(),
            }),
            residual: 0.0,
        });
    }
    if mb == 0 || a.trace() > b.trace() + S::tolerance() {
        return Ok(OrderVerdict::unrelated(0.0));
    }
    let n = ma * mb;
    let dim = a.env().dim();
    let mut lp = LinearProgram::<S>::feasibility(n);
    for i in 0..ma {
        for e in 0..dim {
            let mut row = vec![S::zero(); n];
            for j in 0..mb {
                row[i * mb + j] = pb[j][e].clone();
            }
            lp.add_eq(row, pa[i][e].clone());
        }
    }
    for j in 0..mb {
        let mut row = vec![S::zero(); n];
        for i in 0..ma {
            row[i * mb + j] = S::one();
        }
        lp.add_le(row, S::one());
    }
    match solve_lp(&lp, opts)? {
        LpOutcome::Optimal { x, .. } => {
            let t: Vec<Vec<S>> = (0..ma).map(|i| x[i * mb..(i + 1) * mb].to_vec()).collect();
            let residual = verify_classical_witness(a, b, &t)?.to_f64();
            let scale = 1.0 + b.trace().to_f64();
            if !S::EXACT && residual > eps() * 10.0 * scale {
                return Err(QkError::SolverFailure(format!(
                    "order witness fails recheck (residual {residual:e})"
                )));
            }
            let norm = max_column_sum(&t);
            Ok(OrderVerdict {
                related: true,
                witness: Some(Witness::Classical { t, norm }),
                residual,
            })
        }
        LpOutcome::Infeasible => Ok(OrderVerdict::unrelated(0.0)),
        LpOutcome::Unbounded => Err(QkError::SolverFailure("feasibility LP unbounded".into())),
    }
}

/// Decide `a ≤ b` by positivity of `gram(b) - gram(a)`.
pub fn leq_quantum(a: &QuantumSok, b: &QuantumSok) -> Result<OrderVerdict<f64>> {
    a.env().ensure_same(b.env())?;
    let diff = b.gram() - a.gram();
    let scale = eigen::max_abs(a.gram()).max(eigen::max_abs(b.gram())).max(1.0);
    let tol = eps() * scale;
    let min = eigen::min_eigenvalue(&diff)?;
    if min < -tol {
        return Ok(OrderVerdict::unrelated(-min));
    }
    let ra = a.representative();
    let rb = b.representative();
    // Tᵀ = B⁺A; Douglas' lemma bounds its norm by one.
    let tt = eigen::pinv(&rb, tol.sqrt()) * &ra;
    let t = tt.transpose();
    let residual = eigen::max_abs(&(&rb * &tt - &ra));
    let norm = eigen::sigma_max(&t);
    Ok(OrderVerdict {
        related: true,
        witness: Some(Witness::Quantum {
            t,
            norm,
            min_eigenvalue: min,
        }),
        residual,
    })
}

/// Recheck a quantum witness against square-root representatives.
pub fn verify_quantum_witness(a: &QuantumSok, b: &QuantumSok, t: &CMatrix) -> Result<f64> {
    a.env().ensure_same(b.env())?;
    let ra = a.representative();
    let rb = b.representative();
    if t.nrows() != ra.ncols() || t.ncols() != rb.ncols() {
        return Err(QkError::DimensionMismatch("witness shape".into()));
    }
    let fit = eigen::max_abs(&(&rb * t.transpose() - &ra));
    let excess = (eigen::sigma_max(t) - 1.0).max(0.0);
    Ok(fit.max(excess))
}

/// Mutual order with the canonical-form cross-check.
#[derive(Debug, Clone)]
pub struct Equivalence<S> {
    pub equivalent: bool,
    pub forward: OrderVerdict<S>,
    pub backward: OrderVerdict<S>,
    pub canonical_equal: bool,
}

impl<S> Equivalence<S> {
    /// The LP verdict and the canonical comparison disagree.
    pub fn inconsistent(&self) -> bool {
        (self.forward.related && self.backward.related) != self.canonical_equal
    }
}

pub fn equivalent<K: Knowledge>(a: &K, b: &K) -> Result<Equivalence<K::Field>> {
    let forward = a.leq(b)?;
    let backward = b.leq(a)?;
    let canonical_equal = a.same_class(b)?;
    Ok(Equivalence {
        equivalent: forward.related && backward.related,
        forward,
        backward,
        canonical_equal,
    })
}

/// Shannon entropy in nats of a normalized vector.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// `Σ weight · H(column)` over the representative.
pub fn expected_entropy<S: Scalar>(s: &ClassicalSok<S>) -> f64 {
    s.columns()
        .iter()
        .map(|c| {
            let p: Vec<f64> = c.p.iter().map(Scalar::to_f64).collect();
            c.weight.to_f64() * shannon_entropy(&p)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CancellationReport {
    /// `s1 + s3 ≤ s2 + s3`
    pub with_common: bool,
    /// `s1 ≤ s2`
    pub without: bool,
}

impl CancellationReport {
    pub fn agree(&self) -> bool {
        self.with_common == self.without
    }
}

pub fn check_cancellation<K: Knowledge>(s1: &K, s2: &K, s3: &K) -> Result<CancellationReport> {
    let with_common = s1.add(s3)?.leq(&s2.add(s3)?)?.related;
    let without = s1.leq(s2)?.related;
    Ok(CancellationReport {
        with_common,
        without,
    })
}

/// Witness reading versus cone-membership reading of `x ≤ y` for classical quasi states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadingComparison {
    pub witness: bool,
    pub cone: bool,
}

/// Whether `y - x` is equivalent to a state of knowledge: some `Z ∈ S` with
/// `Z + (A + D) ≡ C + B`. With canonical forms unique, that holds iff every
/// canonical column of `A + D` appears in `C + B` with at least its weight.
pub fn cone_reading_classical<S: Scalar>(
    x: &QuasiSok<ClassicalSok<S>>,
    y: &QuasiSok<ClassicalSok<S>>,
) -> Result<bool> {
    let lhs = x.pos().add(y.neg())?.canonicalize();
    let rhs = y.pos().add(x.neg())?.canonicalize();
    Ok(lhs.columns().iter().all(|l| {
        rhs.columns().iter().any(|r| {
            r.p.iter().zip(&l.p).all(|(a, b)| a.approx_eq(b))
                && !(l.weight.clone() - r.weight.clone()).is_pos()
        })
    }))
}

pub fn compare_order_readings<S: Scalar>(
    x: &QuasiSok<ClassicalSok<S>>,
    y: &QuasiSok<ClassicalSok<S>>,
) -> Result<ReadingComparison> {
    Ok(ReadingComparison {
        witness: x.leq(y)?.related,
        cone: cone_reading_classical(x, y)?,
    })
}

/// Compose witnesses of `a ≤ b` and `b ≤ c` into one for `a ≤ c`: `T_ac = T_ab T_bc`.
pub fn compose_classical<S: Scalar>(t_ab: &[Vec<S>], t_bc: &[Vec<S>]) -> Vec<Vec<S>> {
    let inner = t_bc.len();
    let cols = t_bc.first().map_or(0, Vec::len);
    t_ab.iter()
        .map(|row| {
            (0..cols)
                .map(|k| {
                    (0..inner).fold(S::zero(), |acc, j| {
                        acc + row[j].clone() * t_bc[j][k].clone()
                    })
                })
                .collect()
        })
        .collect()
}
