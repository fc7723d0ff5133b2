//! Turning a feasible `S̃` into an `N'`-step algorithm from `S_S` to `S_R`.
//!
//! Step `k` outputs `((N'-k)/N') S_{O,S} + (k/N') S_{O,R} + S̃/N'` where the
//! idle outputs leave their state unchanged. Started from `S_S + tr_O S̃/N'`
//! this reaches `S_R + tr_O S̃/N'`.

use num_traits::One;

use crate::error::{QkError, Result};
use crate::evolution::law::{ClassicalLaw, Law, INPUT_REGISTER, OUTPUT_REGISTER};
use crate::evolution::simulate::AlgorithmPlan;
use crate::numerics::lp::{solve_lp, LpOptions, LpOutcome, Sense};
use crate::numerics::Scalar;
use crate::order::{leq_classical_with, Witness};
use crate::sok::{ClassicalSok, Knowledge, QuasiSok};

use super::adversary::verify_adversary;
use super::build::{Builder, ScaledColumn};

#[derive(Debug, Clone)]
pub struct UniversalPlan<K: Knowledge> {
    pub plan: AlgorithmPlan<K>,
    pub n_prime: usize,
    /// `S_k` for `k = 0..=N'`; `S_{k+1} ≤ tr_I T(S_{O,k})` holds for each step.
    pub schedule: Vec<K>,
    pub step_residuals: Vec<f64>,
    /// `tr S̃ / N'`.
    pub error_bound: K::Field,
}

fn check_idle<K: Knowledge, L: Law<K>>(law: &L, idle: &K, state: &K, name: &str) -> Result<()> {
    let env = law.env();
    let kept = idle.partial_trace(OUTPUT_REGISTER)?.with_env(env)?;
    let after = law.apply(idle)?.partial_trace(INPUT_REGISTER)?.with_env(env)?;
    let state = state.with_env(env)?;
    if !kept.same_class(&state)? {
        return Err(QkError::IdleViolation(format!("tr_O of the idle output differs from {name}")));
    }
    if !after.same_class(&state)? {
        return Err(QkError::IdleViolation(format!("the idle output for {name} changes the state")));
    }
    Ok(())
}

fn mix<K: Knowledge>(parts: &[(&K, K::Field)]) -> Result<K> {
    let mut acc = K::zero(parts[0].0.env());
    for (s, w) in parts {
        if w.is_pos() {
            acc = acc.add(&s.scale(w)?)?;
        }
    }
    Ok(acc.canonical())
}

#[allow(clippy::too_many_arguments)]
pub fn build_universal_algorithm<K: Knowledge, L: Law<K>>(
    law: &L,
    s_tilde: &K,
    s_s: &K,
    s_r: &K,
    idle_s: &K,
    idle_r: &K,
    n_prime: usize,
) -> Result<UniversalPlan<K>> {
    if n_prime == 0 {
        return Err(QkError::InvalidState("the algorithm needs at least one step".into()));
    }
    let env = law.env().clone();
    let out_env = law.out_env();
    let (s_s, s_r) = (s_s.with_env(&env)?, s_r.with_env(&env)?);
    let (idle_s, idle_r, s_tilde) = (
        idle_s.with_env(&out_env)?,
        idle_r.with_env(&out_env)?,
        s_tilde.with_env(&out_env)?,
    );
    check_idle(law, &idle_s, &s_s, "S_S")?;
    check_idle(law, &idle_r, &s_r, "S_R")?;
    let delta = QuasiSok::from_parts_raw(s_r.clone(), s_s.clone())?;
    let verdict = verify_adversary(&delta, law, &s_tilde)?;
    if !verdict.related {
        return Err(QkError::InfeasibleWitness(
            "S̃ does not satisfy tr_I T(S̃) - tr_O S̃ ≥ S_R - S_S".into(),
        ));
    }

    let np = K::Field::from_usize(n_prime);
    let share = K::Field::one() / np.clone();
    let spent = s_tilde.partial_trace(OUTPUT_REGISTER)?.with_env(&env)?;
    let weights = |k: usize| {
        let a = K::Field::from_usize(n_prime - k) / np.clone();
        let b = K::Field::from_usize(k) / np.clone();
        (a, b)
    };
    let mut schedule = Vec::with_capacity(n_prime + 1);
    for k in 0..=n_prime {
        let (a, b) = weights(k);
        schedule.push(mix(&[(&s_s, a), (&s_r, b), (&spent, share.clone())])?);
    }
    let mut steps = Vec::with_capacity(n_prime);
    let mut step_residuals = Vec::with_capacity(n_prime);
    for k in 0..n_prime {
        let (a, b) = weights(k);
        let s_o = mix(&[(&idle_s, a), (&idle_r, b), (&s_tilde, share.clone())])?;
        let after = law.apply(&s_o)?.partial_trace(INPUT_REGISTER)?.with_env(&env)?;
        let v = schedule[k + 1].leq(&after)?;
        if !v.related {
            return Err(QkError::InfeasibleWitness(format!("step {k} does not reach the schedule")));
        }
        step_residuals.push(v.residual);
        steps.push(s_o);
    }
    Ok(UniversalPlan {
        plan: AlgorithmPlan {
            initial: schedule[0].clone(),
            steps,
        },
        n_prime,
        error_bound: s_tilde.trace() / np,
        schedule,
        step_residuals,
    })
}

/// Outcome of running the algorithm on representatives, starting from `S_S`
/// alone rather than `S_S + tr_O S̃/N'`.
#[derive(Debug, Clone)]
pub struct RepresentativeRun<S> {
    pub n_prime: usize,
    /// Memory block that ends up holding `S_R` when started with the extra `tr_O S̃/N'`.
    pub ideal: ClassicalSok<S>,
    /// The same block when started from `S_S` alone.
    pub actual: ClassicalSok<S>,
    /// Entrywise `ideal - actual` summed; an upper bound on the trace distance.
    pub error: S,
    /// `tr S̃ / N'`.
    pub bound: S,
}

/// Columns over `E` of `X` split by the value of `register`, with their
/// (column, value) labels; zero columns are dropped.
fn split<S: Scalar>(cols: &[Vec<S>], n_e: usize, size: usize) -> Vec<((usize, usize), Vec<S>)> {
    let mut out = Vec::new();
    for (k, c) in cols.iter().enumerate() {
        for v in 0..size {
            let col: Vec<S> = (0..n_e).map(|e| c[e * size + v].clone()).collect();
            if col.iter().any(|x| x.is_pos()) {
                out.push(((k, v), col));
            }
        }
    }
    out
}

/// One memory block: the state representative (`X` split by `O`) and the
/// post-law representative (`T X` split by `I`).
struct Block<S> {
    sigma: Vec<((usize, usize), Vec<S>)>,
    rho: Vec<((usize, usize), Vec<S>)>,
}

impl<S: Scalar> Block<S> {
    fn new(x: &ClassicalSok<S>, law: &ClassicalLaw<S>) -> Self {
        let n_e = law.env().dim();
        let cols = x.matrix_columns();
        let images: Vec<Vec<S>> = cols.iter().map(|c| law.apply_column(c)).collect();
        Self {
            sigma: split(&cols, n_e, law.outputs().size()),
            rho: split(&images, n_e, law.inputs().size()),
        }
    }

    fn sigma_cols(&self) -> Vec<Vec<S>> {
        self.sigma.iter().map(|(_, c)| c.clone()).collect()
    }

    fn rho_cols(&self) -> Vec<Vec<S>> {
        self.rho.iter().map(|(_, c)| c.clone()).collect()
    }

    /// Output `o` from memory `(k, o)`, apply the law, then forget `o`.
    fn evolve(&self, actual: &[Vec<S>], law: &ClassicalLaw<S>) -> Vec<Vec<S>> {
        let (n_e, n_i, n_o) = (law.env().dim(), law.inputs().size(), law.outputs().size());
        let mut out = vec![vec![S::zero(); n_e]; self.rho.len()];
        for (((k, o), _), col) in self.sigma.iter().zip(actual) {
            let mut lifted = vec![S::zero(); n_e * n_o];
            for e in 0..n_e {
                lifted[e * n_o + o] = col[e].clone();
            }
            let image = law.apply_column(&lifted);
            for (r, ((kr, i), _)) in self.rho.iter().enumerate() {
                if kr == k {
                    for e in 0..n_e {
                        out[r][e] = out[r][e].clone() + image[e * n_i + i].clone();
                    }
                }
            }
        }
        out
    }
}

/// `out[l] = Σ_j w[l][j] · input[j]`.
fn apply_kernel<S: Scalar>(w: &[Vec<S>], input: &[Vec<S>], n_e: usize) -> Vec<Vec<S>> {
    w.iter()
        .map(|row| {
            let mut acc = vec![S::zero(); n_e];
            for (wj, col) in row.iter().zip(input) {
                if !wj.approx_zero() {
                    for e in 0..n_e {
                        acc[e] = acc[e].clone() + wj.clone() * col[e].clone();
                    }
                }
            }
            acc
        })
        .collect()
}

fn witness<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>], env: &crate::env::EnvSpace, opts: &LpOptions) -> Result<Vec<Vec<S>>> {
    let sa = ClassicalSok::from_columns(env, a.to_vec())?;
    let sb = ClassicalSok::from_columns(env, b.to_vec())?;
    let v = leq_classical_with(&sa, &sb, opts)?;
    match v.witness {
        Some(Witness::Classical { t, .. }) if v.related => {
            if t.is_empty() {
                Ok(vec![Vec::new(); a.len()])
            } else {
                Ok(t)
            }
        }
        _ => Err(QkError::IdleViolation("idle block cannot be restored".into())),
    }
}

fn mass<S: Scalar>(c: &[S]) -> S {
    c.iter().fold(S::zero(), |a, b| a + b.clone())
}

/// Run the algorithm on explicit representatives.
///
/// The memory holds three blocks: `S` (weight `(N'-k)/N'`), `R` (weight
/// `k/N'`) and `A` (weight `1/N'`). After each law step the idle blocks are
/// mapped back by order witnesses, a `1/(N'-k)` share of `S` joins the `A`
/// block, and one witness `Ω` for `S_R + tr_O S̃ ≤ tr_I T S̃ + S_S` turns
/// that input into the next `R` increment and `A` block. `Ω` routes as much
/// post-law `A` mass as possible into `R` and as little as possible back
/// into `A`, so missing `A` mass drains out after a bounded number of steps.
#[allow(clippy::too_many_arguments)]
pub fn run_universal_classical<S: Scalar>(
    law: &ClassicalLaw<S>,
    s_tilde: &ClassicalSok<S>,
    idle_s: &ClassicalSok<S>,
    idle_r: &ClassicalSok<S>,
    n_prime: usize,
    opts: &LpOptions,
) -> Result<RepresentativeRun<S>> {
    if n_prime == 0 {
        return Err(QkError::InvalidState("the algorithm needs at least one step".into()));
    }
    let env = law.env().clone();
    let n_e = env.dim();
    let bs = Block::new(idle_s, law);
    let br = Block::new(idle_r, law);
    let ba = Block::new(s_tilde, law);
    let w_s = witness(&bs.sigma_cols(), &bs.rho_cols(), &env, opts)?;
    let w_r = witness(&br.sigma_cols(), &br.rho_cols(), &env, opts)?;

    // Ω: [ρ_A | σ_S] → [σ_R | σ_A].
    let (n_ra, n_ss, n_sr) = (ba.rho.len(), bs.sigma.len(), br.sigma.len());
    let mut b = Builder::<S>::new();
    let lhs: Vec<ScaledColumn<S>> = br.sigma_cols().into_iter().chain(ba.sigma_cols()).map(ScaledColumn::fixed).collect();
    let rhs_cols: Vec<Vec<S>> = ba.rho_cols().into_iter().chain(bs.sigma_cols()).collect();
    let rhs: Vec<ScaledColumn<S>> = rhs_cols.iter().cloned().map(ScaledColumn::fixed).collect();
    let w = b.order(&lhs, &rhs);
    for (l, row) in w.iter().enumerate() {
        for (j, &v) in row.iter().enumerate().take(n_ra) {
            let m = mass(&rhs_cols[j]);
            b.objective[v] = if l < n_sr { m } else { -m };
        }
    }
    let omega: Vec<Vec<S>> = match solve_lp(&b.finish(Sense::Maximize), opts)? {
        LpOutcome::Optimal { x, .. } => w.iter().map(|row| row.iter().map(|&v| x[v].clone()).collect()).collect(),
        _ => {
            return Err(QkError::InfeasibleWitness(
                "S̃ does not satisfy tr_I T(S̃) - tr_O S̃ ≥ S_R - S_S on these representatives".into(),
            ))
        }
    };
    debug_assert_eq!(omega.first().map_or(n_ra + n_ss, Vec::len), n_ra + n_ss);

    let np = S::from_usize(n_prime);
    let scaled = |cols: Vec<Vec<S>>, f: S| -> Vec<Vec<S>> {
        cols.into_iter().map(|c| c.into_iter().map(|v| v * f.clone()).collect()).collect()
    };
    let run = |with_a: bool| -> (Vec<Vec<S>>, Vec<Vec<S>>) {
        let mut xs = bs.sigma_cols();
        let mut xr = vec![vec![S::zero(); n_e]; n_sr];
        let mut xa = if with_a {
            scaled(ba.sigma_cols(), S::one() / np.clone())
        } else {
            vec![vec![S::zero(); n_e]; ba.sigma.len()]
        };
        for k in 0..n_prime {
            let ys = apply_kernel(&w_s, &bs.evolve(&xs, law), n_e);
            let yr = apply_kernel(&w_r, &br.evolve(&xr, law), n_e);
            let ya = ba.evolve(&xa, law);
            let left = S::from_usize(n_prime - k);
            let keep = scaled(ys.clone(), (left.clone() - S::one()) / left.clone());
            let feed = scaled(ys, S::one() / left);
            let input: Vec<Vec<S>> = ya.into_iter().chain(feed).collect();
            let out = apply_kernel(&omega, &input, n_e);
            xs = keep;
            xr = yr
                .into_iter()
                .zip(&out[..n_sr])
                .map(|(a, b)| a.into_iter().zip(b).map(|(x, y)| x + y.clone()).collect())
                .collect();
            xa = out[n_sr..].to_vec();
        }
        (xr, xa)
    };
    let (ideal_r, _) = run(true);
    let (actual_r, _) = run(false);
    let error = ideal_r
        .iter()
        .zip(&actual_r)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()))
        .fold(S::zero(), |acc, d| acc + d);
    Ok(RepresentativeRun {
        n_prime,
        ideal: ClassicalSok::from_columns(&env, ideal_r)?,
        actual: ClassicalSok::from_columns(&env, actual_r)?,
        error,
        bound: s_tilde.trace() / np,
    })
}
