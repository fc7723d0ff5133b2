//! Trace distance: `min tr Δ` subject to `-Δ ≤ S - T ≤ Δ`.

use crate::error::{QkError, Result};
use crate::numerics::eigen::{self, CMatrix};
use crate::numerics::lp::{solve_lp, LpOptions, LpOutcome, Sense};
use crate::numerics::psd::{hermitian_basis, hermitian_from_params, PsdBlock, PsdOptions, PsdProgram};
use crate::numerics::{solve_psd_program, Scalar};
use crate::sok::{ClassicalSok, QuantumSok};

use super::build::{Builder, ScaledColumn};
use super::dictionary::Dictionary;

#[derive(Debug, Clone)]
pub struct QuantumDistance {
    pub value: f64,
    /// `|gram(S) - gram(T)|`.
    pub delta: CMatrix,
}

/// Closed form: the nuclear norm of the gram difference.
pub fn trace_distance_quantum(s: &QuantumSok, t: &QuantumSok) -> Result<QuantumDistance> {
    s.env().ensure_same(t.env())?;
    let diff = s.gram() - t.gram();
    Ok(QuantumDistance {
        value: eigen::nuclear_norm_hermitian(&diff)?,
        delta: eigen::abs_part(&diff),
    })
}

/// The same program solved numerically, as an independent check of the closed form.
pub fn trace_distance_quantum_psd(s: &QuantumSok, t: &QuantumSok, opts: &PsdOptions) -> Result<QuantumDistance> {
    s.env().ensure_same(t.env())?;
    let x = s.gram() - t.gram();
    let d = x.nrows();
    let basis = hermitian_basis(d);
    let mut prog = PsdProgram::new(d * d);
    for e in 0..d {
        prog.objective[e] = 1.0;
    }
    let mut upper = PsdBlock::new(-x.clone());
    let mut lower = PsdBlock::new(x.clone());
    for (p, b) in basis.iter().enumerate() {
        upper.add_term(p, b.clone());
        lower.add_term(p, b.clone());
    }
    prog.add_block(upper);
    prog.add_block(lower);
    let sol = solve_psd_program(&prog, opts)?;
    Ok(QuantumDistance {
        value: sol.value,
        delta: hermitian_from_params(d, &sol.point),
    })
}

#[derive(Debug, Clone)]
pub struct ClassicalDistance<S> {
    /// Upper bound on the distance: `Δ` is restricted to the dictionary cone.
    pub value: S,
    /// `Δ = Σ_k alpha[k]·dictionary[k]`.
    pub alpha: Vec<S>,
    pub delta: ClassicalSok<S>,
}

/// `S ≤ T + Δ` and `T ≤ S + Δ` with `Δ` a conic combination of dictionary columns.
pub fn trace_distance_classical<S: Scalar>(
    s: &ClassicalSok<S>,
    t: &ClassicalSok<S>,
    dict: &Dictionary<S>,
    opts: &LpOptions,
) -> Result<ClassicalDistance<S>> {
    s.env().ensure_same(t.env())?;
    if dict.dim != s.env().dim() {
        return Err(QkError::DimensionMismatch("dictionary over a different environment".into()));
    }
    let ps = s.matrix_columns();
    let pt = t.matrix_columns();
    let mut b = Builder::new();
    let alpha = b.vars(dict.len(), S::one());
    let scaled: Vec<ScaledColumn<S>> = dict
        .columns
        .iter()
        .zip(&alpha)
        .map(|(c, &a)| ScaledColumn::scaled(c.clone(), a))
        .collect();
    let fixed = |cols: &[Vec<S>]| cols.iter().cloned().map(ScaledColumn::fixed).collect::<Vec<_>>();
    let mut rhs = fixed(&pt);
    rhs.extend(scaled.iter().cloned());
    b.order(&fixed(&ps), &rhs);
    let mut rhs = fixed(&ps);
    rhs.extend(scaled);
    b.order(&fixed(&pt), &rhs);
    match solve_lp(&b.finish(Sense::Minimize), opts)? {
        LpOutcome::Optimal { value, x } => {
            let alpha: Vec<S> = alpha.iter().map(|&v| x[v].clone()).collect();
            let delta = ClassicalSok::from_weighted(
                s.env(),
                dict.columns
                    .iter()
                    .zip(&alpha)
                    .filter(|(_, a)| a.is_pos())
                    .map(|(c, a)| (a.clone(), c.clone()))
                    .collect(),
            )?;
            Ok(ClassicalDistance { value, alpha, delta })
        }
        LpOutcome::Infeasible => Err(QkError::SolverFailure(
            "dictionary cannot dominate the difference".into(),
        )),
        LpOutcome::Unbounded => Err(QkError::SolverFailure("distance program unbounded".into())),
    }
}
