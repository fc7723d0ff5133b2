//! Stepping a state of knowledge through a law of nature.

use crate::error::{QkError, Result};
use crate::numerics::Scalar;
use crate::sok::Knowledge;
use crate::tasks::output::output_feasible;

use super::law::{Law, INPUT_REGISTER, OUTPUT_REGISTER};

/// The agent's choices `S_{O,k}`, one per step, starting from `initial`.
#[derive(Debug, Clone)]
pub struct AlgorithmPlan<K> {
    pub initial: K,
    pub steps: Vec<K>,
}

#[derive(Debug, Clone)]
pub struct SimulationTrace<K> {
    /// `S_0, …, S_N`.
    pub states: Vec<K>,
    /// Recheck residual of the output-feasibility witness per step.
    pub residuals: Vec<f64>,
    /// `Σ_k S_{O,k}`.
    pub s_tilde: K,
    /// `tr S̃ ≤ N·tr S₀`.
    pub accumulation_ok: bool,
    /// `eval(tr_O S̃)_e ≤ N·eval(S₀)_e` for every `e`, checked for block-diagonal laws.
    pub per_e_ok: Option<bool>,
}

impl<K: Knowledge> SimulationTrace<K> {
    pub fn final_state(&self) -> &K {
        self.states.last().expect("a trace holds at least the initial state")
    }
}

/// `tr_I T(S_O)` after checking `tr_O S_O ≤ s`. The result is canonicalized.
pub fn step<K: Knowledge, L: Law<K>>(s: &K, s_o: &K, law: &L) -> Result<K> {
    step_at(0, s, s_o, law).map(|(next, _)| next)
}

fn step_at<K: Knowledge, L: Law<K>>(k: usize, s: &K, s_o: &K, law: &L) -> Result<(K, f64)> {
    let s_o = s_o.with_env(&law.out_env())?;
    let s = s.with_env(law.env())?;
    let verdict = output_feasible(&s, &s_o, OUTPUT_REGISTER)?;
    if !verdict.related {
        return Err(QkError::InfeasibleOutput {
            step: k,
            residual: verdict.residual,
        });
    }
    let next = law.apply(&s_o)?.partial_trace(INPUT_REGISTER)?;
    Ok((next.canonical(), verdict.residual))
}

pub fn simulate<K: Knowledge, L: Law<K>>(plan: &AlgorithmPlan<K>, law: &L) -> Result<SimulationTrace<K>> {
    let s0 = plan.initial.with_env(law.env())?;
    let mut states = vec![s0.clone()];
    let mut residuals = Vec::with_capacity(plan.steps.len());
    let mut s_tilde = K::zero(&law.out_env());
    for (k, s_o) in plan.steps.iter().enumerate() {
        let (next, residual) = step_at(k, states.last().unwrap(), s_o, law)?;
        s_tilde = s_tilde.add(&s_o.with_env(&law.out_env())?)?.canonical();
        states.push(next);
        residuals.push(residual);
    }
    let n = K::Field::from_usize(plan.steps.len());
    let accumulation_ok = !(s_tilde.trace() - n.clone() * s0.trace()).is_pos();
    let per_e_ok = if law.blockdiag() {
        let marginal = s_tilde.partial_trace(OUTPUT_REGISTER)?.eval();
        Some(
            marginal
                .iter()
                .zip(s0.eval())
                .all(|(m, e)| !(m.clone() - n.clone() * e).is_pos()),
        )
    } else {
        None
    };
    Ok(SimulationTrace {
        states,
        residuals,
        s_tilde,
        accumulation_ok,
        per_e_ok,
    })
}

/// The plan that outputs `S_k ⊗ δ_o` at every step for a fixed output value `o`.
pub fn constant_plan<K: Knowledge, L: Law<K>>(law: &L, s0: &K, n: usize, output: usize) -> Result<AlgorithmPlan<K>> {
    let mut s = s0.with_env(law.env())?;
    let mut steps = Vec::with_capacity(n);
    for _ in 0..n {
        let s_o = s.tensor_point(law.outputs().clone(), output)?;
        s = step(&s, &s_o, law)?;
        steps.push(s_o);
    }
    Ok(AlgorithmPlan {
        initial: s0.clone(),
        steps,
    })
}

/// Idle condition: `tr_O S_O = S` and `tr_I T(S_O) = S` for `S_O = S ⊗ δ_idle`.
pub fn check_idle<K: Knowledge, L: Law<K>>(law: &L, s: &K, idle: usize) -> Result<K> {
    let s = s.with_env(law.env())?;
    let s_o = s.tensor_point(law.outputs().clone(), idle)?;
    let after = law.apply(&s_o)?.partial_trace(INPUT_REGISTER)?;
    if !after.same_class(&s)? {
        return Err(QkError::IdleViolation(format!(
            "output `{}` changes the state",
            law.outputs().labels[idle]
        )));
    }
    Ok(s_o)
}
