//! Expected payoff of acting on a state of knowledge.
//!
//! The agent post-processes its memory with a kernel `K[c][m]` (substochastic,
//! the deficit meaning "abstain" with payoff zero) and earns `V[e][c]`.

use nalgebra::Complex;

use crate::error::{QkError, Result};
use crate::numerics::eigen::{self, CMatrix};
use crate::numerics::lp::{solve_lp, LpOptions, LpOutcome, Sense};
use crate::numerics::psd::{hermitian_basis, hermitian_from_params, PsdBlock, PsdOptions, PsdProgram};
use crate::numerics::{solve_psd_program, Scalar};
use crate::sok::{ClassicalSok, Knowledge, QuantumSok};

use super::build::{Builder, Rel};

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffSpec<S> {
    /// `V[e][c]`.
    pub utility: Vec<Vec<S>>,
    pub outputs: Vec<String>,
}

impl<S: Scalar> PayoffSpec<S> {
    pub fn new(utility: Vec<Vec<S>>, outputs: Vec<String>) -> Result<Self> {
        if utility.iter().any(|r| r.len() != outputs.len()) {
            return Err(QkError::DimensionMismatch(format!(
                "utility rows must have one entry per output ({})",
                outputs.len()
            )));
        }
        Ok(Self { utility, outputs })
    }

    /// Payoff one for guessing the environment state, zero otherwise.
    pub fn guess(labels: &[String]) -> Self {
        let n = labels.len();
        let utility = (0..n)
            .map(|e| (0..n).map(|c| if e == c { S::one() } else { S::zero() }).collect())
            .collect();
        Self {
            utility,
            outputs: labels.iter().map(|l| format!("guess:{l}")).collect(),
        }
    }

    fn check_env(&self, dim: usize) -> Result<()> {
        if self.utility.len() != dim {
            return Err(QkError::EnvMismatch(format!(
                "utility has {} rows for an environment of size {dim}",
                self.utility.len()
            )));
        }
        Ok(())
    }
}

/// How the worst-case program weighs the payoff of each environment state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorstCase {
    /// `λ ≤ eval(S_C)·(e eᵀ V)`: the payoff in state `e` including its prior mass.
    #[default]
    Raw,
    /// Divide row `e` by `eval(S)_e`, i.e. the payoff conditional on `e`.
    /// States with zero mass are skipped.
    PerInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffResult<S> {
    pub value: S,
    /// `K[c][m]`: probability of output `c` from memory state `m`.
    pub kernel: Vec<Vec<S>>,
    /// Payoff collected in each environment state.
    pub row_payoffs: Vec<S>,
}

/// `Σ_{c,m} P[e][m] K[c][m] V[e][c]` per environment state.
pub fn row_payoffs<S: Scalar>(s: &ClassicalSok<S>, spec: &PayoffSpec<S>, kernel: &[Vec<S>]) -> Vec<S> {
    let cols = s.matrix_columns();
    (0..s.env().dim())
        .map(|e| {
            let mut acc = S::zero();
            for (c, krow) in kernel.iter().enumerate() {
                for (m, col) in cols.iter().enumerate() {
                    acc = acc + col[e].clone() * krow[m].clone() * spec.utility[e][c].clone();
                }
            }
            acc
        })
        .collect()
}

struct KernelVars {
    k: Vec<Vec<usize>>,
}

fn kernel_program<S: Scalar>(b: &mut Builder<S>, n_out: usize, n_mem: usize) -> KernelVars {
    let k: Vec<Vec<usize>> = (0..n_out).map(|_| b.vars(n_mem, S::zero())).collect();
    for m in 0..n_mem {
        b.row((0..n_out).map(|c| (k[c][m], S::one())).collect(), Rel::Le, S::one());
    }
    KernelVars { k }
}

fn row_terms<S: Scalar>(cols: &[Vec<S>], spec: &PayoffSpec<S>, kv: &KernelVars, e: usize) -> Vec<(usize, S)> {
    let mut terms = Vec::new();
    for (c, vars) in kv.k.iter().enumerate() {
        for (m, col) in cols.iter().enumerate() {
            let coef = col[e].clone() * spec.utility[e][c].clone();
            if !coef.approx_zero() {
                terms.push((vars[m], coef));
            }
        }
    }
    terms
}

fn finish<S: Scalar>(
    b: &Builder<S>,
    kv: &KernelVars,
    s: &ClassicalSok<S>,
    spec: &PayoffSpec<S>,
    opts: &LpOptions,
) -> Result<PayoffResult<S>> {
    match solve_lp(&b.finish(Sense::Maximize), opts)? {
        LpOutcome::Optimal { value, x } => {
            let kernel: Vec<Vec<S>> = kv
                .k
                .iter()
                .map(|row| row.iter().map(|&v| x[v].clone()).collect())
                .collect();
            Ok(PayoffResult {
                value,
                row_payoffs: row_payoffs(s, spec, &kernel),
                kernel,
            })
        }
        other => Err(QkError::SolverFailure(format!("payoff program: {other:?}"))),
    }
}

/// `max eval(S_C)·V` over `tr_C S_C ≤ S`.
pub fn payoff_average<S: Scalar>(s: &ClassicalSok<S>, spec: &PayoffSpec<S>, opts: &LpOptions) -> Result<PayoffResult<S>> {
    spec.check_env(s.env().dim())?;
    let cols = s.matrix_columns();
    let mut b = Builder::<S>::new();
    let kv = kernel_program(&mut b, spec.outputs.len(), cols.len());
    for e in 0..s.env().dim() {
        for (v, coef) in row_terms(&cols, spec, &kv, e) {
            b.objective[v] = b.objective[v].clone() + coef;
        }
    }
    finish(&b, &kv, s, spec, opts)
}

/// `max λ` with `λ` below the payoff in every environment state.
pub fn payoff_worstcase<S: Scalar>(
    s: &ClassicalSok<S>,
    spec: &PayoffSpec<S>,
    mode: WorstCase,
    opts: &LpOptions,
) -> Result<PayoffResult<S>> {
    spec.check_env(s.env().dim())?;
    let cols = s.matrix_columns();
    let mass = s.eval();
    let mut b = Builder::new();
    let kv = kernel_program(&mut b, spec.outputs.len(), cols.len());
    let lambda = b.free_var(S::one());
    let mut bounded = false;
    for e in 0..s.env().dim() {
        let scale = match mode {
            WorstCase::Raw => S::one(),
            WorstCase::PerInput if mass[e].is_pos() => S::one() / mass[e].clone(),
            WorstCase::PerInput => continue,
        };
        let mut terms: Vec<(usize, S)> = row_terms(&cols, spec, &kv, e)
            .into_iter()
            .map(|(v, c)| (v, -(c * scale.clone())))
            .collect();
        terms.push((lambda, S::one()));
        b.row(terms, Rel::Le, S::zero());
        bounded = true;
    }
    if !bounded {
        b.row(vec![(lambda, S::one())], Rel::Le, S::zero());
    }
    finish(&b, &kv, s, spec, opts)
}

#[derive(Debug, Clone)]
pub struct QuantumPayoff {
    pub value: f64,
    /// `G_c ⪰ 0` with `Σ_c G_c ⪯ gram(S)`.
    pub effects: Vec<CMatrix>,
    pub row_payoffs: Vec<f64>,
    pub feasibility_residual: f64,
}

/// The program lives on the support of the gram: with `gram = R R†` of rank
/// `r`, effects are `G_c = R H_c R†` with `H_c ⪰ 0` and `Σ H_c ⪯ 1_r`, which
/// has interior points even when the gram is singular.
struct QuantumProgram {
    prog: PsdProgram,
    /// Parameters per effect, `r²`.
    per: usize,
    r: usize,
    factor: CMatrix,
    /// `diag[p][e] = (R B_p R†)[e][e]`.
    diag: Vec<Vec<f64>>,
}

fn quantum_program(s: &QuantumSok, spec: &PayoffSpec<f64>, extra_vars: usize) -> Result<QuantumProgram> {
    spec.check_env(s.env().dim())?;
    let d = s.env().dim();
    let eig = eigen::eig_sym(s.gram())?;
    let tol = eigen::scaled_tol(s.gram());
    let support: Vec<usize> = (0..d).filter(|&i| eig.values[i] > tol).collect();
    let r = support.len();
    let factor = CMatrix::from_fn(d, r, |e, k| {
        let i = support[k];
        eig.vectors[(e, i)] * eig.values[i].sqrt()
    });
    let basis = hermitian_basis(r);
    let diag: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            let g = &factor * b * factor.adjoint();
            (0..d).map(|e| g[(e, e)].re).collect()
        })
        .collect();
    let n_out = spec.outputs.len();
    let per = r * r;
    let mut prog = PsdProgram::new(n_out * per + extra_vars);
    if r > 0 {
        let mut total = PsdBlock::new(CMatrix::identity(r, r));
        for c in 0..n_out {
            let mut blk = PsdBlock::new(CMatrix::zeros(r, r));
            for (p, bm) in basis.iter().enumerate() {
                blk.add_term(c * per + p, bm.clone());
                total.add_term(c * per + p, -bm.clone());
            }
            prog.add_block(blk);
        }
        prog.add_block(total);
    }
    Ok(QuantumProgram {
        prog,
        per,
        r,
        factor,
        diag,
    })
}

fn quantum_rows(spec: &PayoffSpec<f64>, effects: &[CMatrix]) -> Vec<f64> {
    (0..spec.utility.len())
        .map(|e| {
            effects
                .iter()
                .enumerate()
                .map(|(c, g)| spec.utility[e][c] * g[(e, e)].re)
                .sum()
        })
        .collect()
}

fn quantum_finish(
    q: &QuantumProgram,
    s: &QuantumSok,
    spec: &PayoffSpec<f64>,
    opts: &PsdOptions,
    value_of: impl Fn(&[f64]) -> f64,
) -> Result<QuantumPayoff> {
    let d = s.env().dim();
    let n_out = spec.outputs.len();
    if q.r == 0 {
        return Ok(QuantumPayoff {
            value: 0.0,
            effects: vec![CMatrix::zeros(d, d); n_out],
            row_payoffs: vec![0.0; d],
            feasibility_residual: 0.0,
        });
    }
    let sol = solve_psd_program(&q.prog, opts)?;
    let effects: Vec<CMatrix> = (0..n_out)
        .map(|c| {
            let h = hermitian_from_params(q.r, &sol.point[c * q.per..(c + 1) * q.per]);
            &q.factor * h * q.factor.adjoint()
        })
        .collect();
    Ok(QuantumPayoff {
        value: value_of(&sol.point),
        row_payoffs: quantum_rows(spec, &effects),
        feasibility_residual: effects_residual(s, &effects)?.max(sol.feasibility_residual),
        effects,
    })
}

/// Average-case payoff for a pure-quantum agent: `max Σ V[e][c] G_c[e][e]`.
pub fn payoff_average_quantum(s: &QuantumSok, spec: &PayoffSpec<f64>, opts: &PsdOptions) -> Result<QuantumPayoff> {
    let mut q = quantum_program(s, spec, 0)?;
    for c in 0..spec.outputs.len() {
        for (p, diag) in q.diag.iter().enumerate() {
            let gain: f64 = (0..diag.len()).map(|e| spec.utility[e][c] * diag[e]).sum();
            q.prog.objective[c * q.per + p] -= gain;
        }
    }
    let obj = q.prog.objective.clone();
    quantum_finish(&q, s, spec, opts, |x| -obj.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
}

pub fn payoff_worstcase_quantum(
    s: &QuantumSok,
    spec: &PayoffSpec<f64>,
    mode: WorstCase,
    opts: &PsdOptions,
) -> Result<QuantumPayoff> {
    let mut q = quantum_program(s, spec, 1)?;
    let d = s.env().dim();
    let lambda = q.prog.n_vars - 1;
    q.prog.objective[lambda] = -1.0;
    let mass = s.eval();
    let one = |v: f64| CMatrix::from_element(1, 1, Complex::new(v, 0.0));
    let mut bounded = false;
    for e in 0..d {
        let scale = match mode {
            WorstCase::Raw => 1.0,
            WorstCase::PerInput if mass[e] > crate::numerics::eps() => 1.0 / mass[e],
            WorstCase::PerInput => continue,
        };
        let mut blk = PsdBlock::new(one(0.0));
        for c in 0..spec.outputs.len() {
            let v = spec.utility[e][c] * scale;
            if v != 0.0 {
                for (p, diag) in q.diag.iter().enumerate() {
                    if diag[e] != 0.0 {
                        blk.add_term(c * q.per + p, one(v * diag[e]));
                    }
                }
            }
        }
        blk.add_term(lambda, one(-1.0));
        q.prog.add_block(blk);
        bounded = true;
    }
    if !bounded {
        let mut blk = PsdBlock::new(one(0.0));
        blk.add_term(lambda, one(-1.0));
        q.prog.add_block(blk);
    }
    quantum_finish(&q, s, spec, opts, move |x| x[lambda])
}

/// Largest violation of `G_c ⪰ 0` and `Σ_c G_c ⪯ gram(S)`.
pub fn effects_residual(s: &QuantumSok, effects: &[CMatrix]) -> Result<f64> {
    let d = s.env().dim();
    let mut rest = s.gram().clone();
    let mut worst: f64 = 0.0;
    for g in effects {
        worst = worst.max(-crate::numerics::eigen::min_eigenvalue(g)?);
        rest -= g;
    }
    if d > 0 {
        worst = worst.max(-crate::numerics::eigen::min_eigenvalue(&rest)?);
    }
    Ok(worst.max(0.0))
}

/// Pull a kernel on the memory of `a` back through an order witness `a ≤ b`.
pub fn compose_kernel<S: Scalar>(kernel: &[Vec<S>], t: &[Vec<S>]) -> Vec<Vec<S>> {
    // K_b[c][j] = Σ_i K_a[c][i] T[i][j]
    let mb = t.first().map_or(0, Vec::len);
    kernel
        .iter()
        .map(|row| {
            (0..mb)
                .map(|j| {
                    row.iter()
                        .zip(t)
                        .fold(S::zero(), |acc, (k, ti)| acc + k.clone() * ti[j].clone())
                })
                .collect()
        })
        .collect()
}
