//! The adversary bound: `min tr S̃` subject to `tr_I T(S̃) - tr_O S̃ ≥ S_N - S₀`.

use nalgebra::Complex;
use num_traits::One;

use crate::error::{QkError, Result};
use crate::evolution::law::{ClassicalLaw, Law, QuantumLaw, INPUT_REGISTER, OUTPUT_REGISTER};
use crate::numerics::eigen::CMatrix;
use crate::numerics::lp::{solve_lp, LpOptions, LpOutcome, Sense};
use crate::numerics::psd::{hermitian_basis, hermitian_from_params, PsdBlock, PsdOptions, PsdProgram};
use crate::numerics::{eps, solve_psd_program, Scalar};
use crate::order::OrderVerdict;
use crate::sok::quantum::partial_trace_matrix;
use crate::sok::{ClassicalSok, Knowledge, QuantumSok, QuasiSok};

use super::build::{Builder, Rel, ScaledColumn};
use super::dictionary::Dictionary;

/// Whether the value is a proven lower bound or only an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Soundness {
    /// The program ranges over the whole cone.
    Exact,
    /// `S̃` is restricted to a dictionary, which can only raise the infimum.
    Truncated,
}

#[derive(Debug, Clone)]
pub struct AdvSettings<K> {
    /// Minimize `max_e tr(e tr_O S̃)/tr(e S₀)` instead of `tr S̃`.
    pub blockdiag: bool,
    pub s0: Option<K>,
    /// Also require `S₀ ≤ tr_O S̃`.
    pub strengthen: bool,
}

impl<K> Default for AdvSettings<K> {
    fn default() -> Self {
        Self {
            blockdiag: false,
            s0: None,
            strengthen: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversaryResult<K: Knowledge> {
    pub value: K::Field,
    /// The optimizing `S̃` over `E×O`.
    pub s_tilde: K,
    pub feasibility_residual: f64,
    pub soundness: Soundness,
}

impl<K: Knowledge> AdversaryResult<K> {
    /// `⌈value / tr S₀⌉`, the number of steps any algorithm needs.
    pub fn step_bound(&self, trace_s0: f64) -> usize {
        let v = self.value.to_f64();
        if v <= eps() || trace_s0 <= 0.0 {
            return 0;
        }
        (v / trace_s0 - eps()).ceil().max(0.0) as usize
    }
}

fn check_blockdiag<K: Knowledge, L: Law<K>>(law: &L, settings: &AdvSettings<K>) -> Result<Vec<K::Field>> {
    if !law.blockdiag() {
        return Err(QkError::BlockDiagViolation);
    }
    let s0 = settings.s0.as_ref().ok_or_else(|| {
        QkError::NormalizationViolation("the block-diagonal bound needs the initial state".into())
    })?;
    let mass = s0.eval();
    if let Some((e, m)) = mass
        .iter()
        .enumerate()
        .find(|(_, m)| !(*m).approx_eq(&K::Field::one()))
    {
        return Err(QkError::NormalizationViolation(format!(
            "tr(e S₀) = {m} for e = {}, expected 1",
            law.env().label(e)
        )));
    }
    Ok(mass)
}

/// `S_N - S₀ ≤ tr_I T(S̃) - tr_O S̃`, rechecked with the order engine.
pub fn verify_adversary<K: Knowledge, L: Law<K>>(
    delta: &QuasiSok<K>,
    law: &L,
    s_tilde: &K,
) -> Result<OrderVerdict<K::Field>> {
    let gained = law.apply(s_tilde)?.partial_trace(INPUT_REGISTER)?;
    let spent = s_tilde.partial_trace(OUTPUT_REGISTER)?;
    let rhs = QuasiSok::from_parts_raw(gained.with_env(law.env())?, spent.with_env(law.env())?)?;
    let lhs = QuasiSok::from_parts_raw(delta.pos().with_env(law.env())?, delta.neg().with_env(law.env())?)?;
    lhs.leq(&rhs)
}

/// Classical bound with `S̃` a conic combination of `u ⊗ δ_o` over dictionary columns `u`.
///
/// The order constraint is encoded by one witness whose entries against
/// `α`-weighted columns are premultiplied by `α`, which is exact for the
/// dictionary-restricted problem.
pub fn adversary_classical<S: Scalar>(
    delta: &QuasiSok<ClassicalSok<S>>,
    law: &ClassicalLaw<S>,
    dict: &Dictionary<S>,
    settings: &AdvSettings<ClassicalSok<S>>,
    opts: &LpOptions,
) -> Result<AdversaryResult<ClassicalSok<S>>> {
    let env = law.env().clone();
    if delta.env().dim() != env.dim() || dict.dim != env.dim() {
        return Err(QkError::EnvMismatch(format!(
            "difference, dictionary and law must share the environment {env}"
        )));
    }
    let mass = if settings.blockdiag {
        Some(check_blockdiag(law, settings)?)
    } else {
        None
    };
    let (n_e, n_i, n_o) = (env.dim(), law.inputs().size(), law.outputs().size());
    let out_env = Law::<ClassicalSok<S>>::out_env(law);

    let mut b = Builder::new();
    let cost = if settings.blockdiag { S::zero() } else { S::one() };
    // One weight per (dictionary column, output value).
    let mut atoms: Vec<(usize, usize, usize)> = Vec::new();
    for k in 0..dict.len() {
        for o in 0..n_o {
            atoms.push((k, o, b.var(cost.clone())));
        }
    }
    let lifted = |k: usize, o: usize| -> Vec<S> {
        let mut v = vec![S::zero(); n_e * n_o];
        for e in 0..n_e {
            v[e * n_o + o] = dict.columns[k][e].clone();
        }
        v
    };

    let mut lhs: Vec<ScaledColumn<S>> = delta.pos().matrix_columns().into_iter().map(ScaledColumn::fixed).collect();
    let mut rhs: Vec<ScaledColumn<S>> = delta.neg().matrix_columns().into_iter().map(ScaledColumn::fixed).collect();
    for &(k, o, x) in &atoms {
        lhs.push(ScaledColumn::scaled(dict.columns[k].clone(), x));
        let image = law.apply_column(&lifted(k, o));
        for i in 0..n_i {
            let col: Vec<S> = (0..n_e).map(|e| image[e * n_i + i].clone()).collect();
            rhs.push(ScaledColumn::scaled(col, x));
        }
    }
    b.order(&lhs, &rhs);

    if settings.strengthen {
        let s0 = settings
            .s0
            .as_ref()
            .ok_or_else(|| QkError::NormalizationViolation("strengthening needs the initial state".into()))?;
        let fixed: Vec<ScaledColumn<S>> = s0.matrix_columns().into_iter().map(ScaledColumn::fixed).collect();
        let spent: Vec<ScaledColumn<S>> = atoms
            .iter()
            .map(|&(k, _, x)| ScaledColumn::scaled(dict.columns[k].clone(), x))
            .collect();
        b.order(&fixed, &spent);
    }

    let t = mass.as_ref().map(|mass| {
        let t = b.var(S::one());
        for (e, m) in mass.iter().enumerate() {
            let mut terms: Vec<(usize, S)> = atoms
                .iter()
                .filter(|&&(k, _, _)| !dict.columns[k][e].approx_zero())
                .map(|&(k, _, x)| (x, dict.columns[k][e].clone() / m.clone()))
                .collect();
            terms.push((t, -S::one()));
            b.row(terms, Rel::Le, S::zero());
        }
        t
    });

    let lp = b.finish(Sense::Minimize);
    match solve_lp(&lp, opts)? {
        LpOutcome::Optimal { value, x } => {
            let mut cols = Vec::new();
            for &(k, o, v) in &atoms {
                if x[v].is_pos() {
                    cols.push((x[v].clone(), lifted(k, o)));
                }
            }
            let s_tilde = ClassicalSok::from_weighted(&out_env, cols)?;
            let value = match t {
                Some(t) => x[t].clone(),
                None => value,
            };
            Ok(AdversaryResult {
                value,
                s_tilde,
                feasibility_residual: lp.max_violation(&x).to_f64(),
                soundness: Soundness::Truncated,
            })
        }
        LpOutcome::Infeasible => Err(QkError::InfeasibleWitness(
            "no S̃ within the dictionary meets the constraint".into(),
        )),
        LpOutcome::Unbounded => Err(QkError::SolverFailure("adversary program unbounded".into())),
    }
}

fn real(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, Complex::new(v, 0.0))
}

/// Pure-quantum bound: the order constraint is cone membership, so the program
/// over Hermitian `S̃` is exact.
pub fn adversary_quantum(
    delta: &QuasiSok<QuantumSok>,
    law: &QuantumLaw,
    settings: &AdvSettings<QuantumSok>,
    opts: &PsdOptions,
) -> Result<AdversaryResult<QuantumSok>> {
    let env = law.env().clone();
    if delta.env().dim() != env.dim() {
        return Err(QkError::EnvMismatch(format!("difference and law must share the environment {env}")));
    }
    let mass = if settings.blockdiag {
        Some(check_blockdiag(law, settings)?)
    } else {
        None
    };
    let out_env = Law::<QuantumSok>::out_env(law);
    let in_env = Law::<QuantumSok>::in_env(law);
    let n = out_env.dim();
    let n_o = law.outputs().size();
    let t = law.matrix();
    let basis = hermitian_basis(n);
    let n_params = n * n;
    let n_vars = n_params + usize::from(mass.is_some());
    let mut prog = PsdProgram::new(n_vars);

    let mut positive = PsdBlock::new(CMatrix::zeros(n, n));
    let target = delta.pos().gram() - delta.neg().gram();
    let mut gain = PsdBlock::new(-target);
    let mut spent_terms = Vec::with_capacity(n_params);
    for (p, bm) in basis.iter().enumerate() {
        positive.add_term(p, bm.clone());
        let (_, after) = partial_trace_matrix(&in_env, &(t * bm * t.adjoint()), INPUT_REGISTER)?;
        let (_, spent) = partial_trace_matrix(&out_env, bm, OUTPUT_REGISTER)?;
        gain.add_term(p, after - &spent);
        spent_terms.push(spent);
    }
    prog.add_block(positive);
    prog.add_block(gain);

    if settings.strengthen {
        let s0 = settings
            .s0
            .as_ref()
            .ok_or_else(|| QkError::NormalizationViolation("strengthening needs the initial state".into()))?;
        let mut blk = PsdBlock::new(-s0.gram().clone());
        for (p, spent) in spent_terms.iter().enumerate() {
            blk.add_term(p, spent.clone());
        }
        prog.add_block(blk);
    }

    match &mass {
        Some(mass) => {
            prog.objective[n_params] = 1.0;
            for (e, m) in mass.iter().enumerate() {
                let mut blk = PsdBlock::new(real(0.0));
                blk.add_term(n_params, real(1.0));
                for o in 0..n_o {
                    blk.add_term(e * n_o + o, real(-1.0 / m));
                }
                prog.add_block(blk);
            }
        }
        None => {
            for p in 0..n {
                prog.objective[p] = 1.0;
            }
        }
    }

    let sol = solve_psd_program(&prog, opts)?;
    let gram = crate::numerics::eigen::psd_project(&hermitian_from_params(n, &sol.point[..n_params]));
    Ok(AdversaryResult {
        value: sol.value,
        s_tilde: QuantumSok::new(&out_env, gram)?,
        feasibility_residual: sol.feasibility_residual,
        soundness: Soundness::Exact,
    })
}
