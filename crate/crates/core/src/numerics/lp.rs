//! Dense two-phase simplex over any [`Scalar`].
//!
//! Exact scalars pivot with Bland's rule, which cannot cycle. Floats use
//! steepest-edge pricing and fall back to Bland after a run of degenerate
//! pivots; an iteration cap bounds the worst case.

use log::trace;

use super::scalar::Scalar;
use super::NumericsError;
use crate::cancel::CancelToken;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

/// `optimize objective·x` subject to `a_eq x = b_eq`, `a_ub x <= b_ub` and per-variable bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub sense: Sense,
    pub objective: Vec<S>,
    pub a_eq: Vec<Vec<S>>,
    pub b_eq: Vec<S>,
    pub a_ub: Vec<Vec<S>>,
    pub b_ub: Vec<S>,
    pub bounds: Vec<VarBound>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(sense: Sense, objective: Vec<S>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            bounds: vec![VarBound::NonNegative; n],
        }
    }

    /// Pure feasibility problem over `n` nonnegative variables.
    pub fn feasibility(n: usize) -> Self {
        Self::new(Sense::Maximize, vec![S::zero(); n])
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<S>, rhs: S) {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<S>, rhs: S) {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<S>, rhs: S) {
        self.a_ub.push(row.into_iter().map(|v| -v).collect());
        self.b_ub.push(-rhs);
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = VarBound::Free;
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let n = self.n_vars();
        if self.bounds.len() != n {
            return Err(NumericsError::DimensionMismatch(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if self.a_eq.len() != self.b_eq.len() || self.a_ub.len() != self.b_ub.len() {
            return Err(NumericsError::DimensionMismatch(
                "constraint rows and right-hand sides differ in count".into(),
            ));
        }
        for row in self.a_eq.iter().chain(&self.a_ub) {
            if row.len() != n {
                return Err(NumericsError::DimensionMismatch(format!(
                    "constraint row of length {} for {n} variables",
                    row.len()
                )));
            }
        }
        if self
            .b_eq
            .iter()
            .chain(&self.b_ub)
            .any(|b| !b.to_f64().is_finite())
        {
            return Err(NumericsError::DimensionMismatch("non-finite right-hand side".into()));
        }
        Ok(())
    }

    /// Largest violation of the constraints and bounds at `x`.
    pub fn max_violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for (row, b) in self.a_eq.iter().zip(&self.b_eq) {
            let lhs = super::scalar::dot(row, x);
            worst = S::max_of(worst, (lhs - b.clone()).abs());
        }
        for (row, b) in self.a_ub.iter().zip(&self.b_ub) {
            let lhs = super::scalar::dot(row, x);
            worst = S::max_of(worst, lhs - b.clone());
        }
        for (v, bound) in x.iter().zip(&self.bounds) {
            if *bound == VarBound::NonNegative {
                worst = S::max_of(worst, -v.clone());
            }
        }
        worst
    }

    pub fn objective_at(&self, x: &[S]) -> S {
        super::scalar::dot(&self.objective, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { value: S, x: Vec<S> },
    Infeasible,
    Unbounded,
}

impl<S> LpOutcome<S> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

#[derive(Debug, Clone)]
pub struct LpOptions {
    pub max_iter: usize,
    pub cancel: CancelToken,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            max_iter: 1_000_000,
            cancel: CancelToken::global(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pricing {
    Bland,
    SteepestEdge,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    /// Column that held the unit vector of each original row; together they read off `B⁻¹`.
    identity: Vec<usize>,
    n_cols: usize,
    iterations: usize,
}

enum PhaseResult {
    Optimal,
    Unbounded,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, p: usize, q: usize, reduced: &mut [S], value: &mut S) {
        let piv = self.rows[p][q].clone();
        for v in self.rows[p].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / piv.clone();
            }
        }
        self.rhs[p] = self.rhs[p].clone() / piv;
        let pivot_row = self.rows[p].clone();
        let pivot_rhs = self.rhs[p].clone();
        for i in 0..self.rows.len() {
            if i == p {
                continue;
            }
            let factor = self.rows[i][q].clone();
            if factor.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - factor.clone() * pv.clone();
                }
            }
            row[q] = S::zero();
            self.rhs[i] = self.rhs[i].clone() - factor * pivot_rhs.clone();
            if !S::EXACT && self.rhs[i].approx_zero() {
                self.rhs[i] = S::zero();
            }
        }
        let rq = reduced[q].clone();
        if !rq.is_zero() {
            for (r, pv) in reduced.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *r = r.clone() - rq.clone() * pv.clone();
                }
            }
            reduced[q] = S::zero();
            *value = value.clone() + rq * pivot_rhs;
        }
        self.basis[p] = q;
    }

    fn reduced_costs(&self, cost: &[S]) -> (Vec<S>, S) {
        let mut reduced = cost.to_vec();
        let mut value = S::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (r, a) in reduced.iter_mut().zip(&self.rows[i]) {
                if !a.is_zero() {
                    *r = r.clone() - cb.clone() * a.clone();
                }
            }
            value = value + cb * self.rhs[i].clone();
        }
        (reduced, value)
    }

    /// Maximize `cost·x` from the current basis over columns with `allowed[j]`.
    fn optimize(
        &mut self,
        cost: &[S],
        allowed: &[bool],
        opts: &LpOptions,
    ) -> Result<PhaseResult, NumericsError> {
        let (mut reduced, mut value) = self.reduced_costs(cost);
        let pricing = if S::EXACT {
            Pricing::Bland
        } else {
            Pricing::SteepestEdge
        };
        loop {
            if opts.cancel.is_cancelled() {
                return Err(NumericsError::Cancelled);
            }
            if self.iterations >= opts.max_iter {
                return Err(NumericsError::IterationLimit(self.iterations));
            }
            let Some(q) = self.choose_entering(&reduced, allowed, pricing) else {
                return Ok(PhaseResult::Optimal);
            };
            let Some(p) = self.choose_leaving(q, pricing) else {
                return Ok(PhaseResult::Unbounded);
            };
            self.pivot(p, q, &mut reduced, &mut value);
            self.iterations += 1;
            if !S::EXACT && self.iterations % 64 == 0 {
                // Limit drift in the incrementally updated reduced costs.
                let fresh = self.reduced_costs(cost);
                reduced = fresh.0;
                value = fresh.1;
            }
        }
    }

    fn choose_entering(&self, reduced: &[S], allowed: &[bool], pricing: Pricing) -> Option<usize> {
        match pricing {
            Pricing::Bland => (0..self.n_cols).find(|&j| allowed[j] && reduced[j].is_pos()),
            Pricing::SteepestEdge => {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.n_cols {
                    if !allowed[j] || !reduced[j].is_pos() {
                        continue;
                    }
                    let norm2: f64 = 1.0
                        + self
                            .rows
                            .iter()
                            .map(|r| {
                                let v = r[j].to_f64();
                                v * v
                            })
                            .sum::<f64>();
                    let score = reduced[j].to_f64() / norm2.sqrt();
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((j, score));
                    }
                }
                best.map(|(j, _)| j)
            }
        }
    }

    fn choose_leaving(&self, q: usize, pricing: Pricing) -> Option<usize> {
        if !S::EXACT {
            return self.choose_leaving_float(q, pricing);
        }
        let mut best: Option<(usize, S)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = &row[q];
            if !a.is_pos() {
                continue;
            }
            let ratio = self.rhs[i].clone() / a.clone();
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Lexicographic ratio rule over `B⁻¹` rows scaled by the pivot column,
    /// which cannot cycle whatever the entering rule.
    fn lexicographic_min(&self, candidates: &[usize], col: &[f64]) -> Option<usize> {
        let tol = S::tolerance().to_f64();
        let key = |i: usize, k: usize| Scalar::to_f64(&self.rows[i][k]) / col[i];
        candidates.iter().copied().reduce(|best, i| {
            for &k in &self.identity {
                let (a, b) = (key(i, k), key(best, k));
                if (a - b).abs() > tol {
                    return if a < b { i } else { best };
                }
            }
            if self.basis[i] < self.basis[best] {
                i
            } else {
                best
            }
        })
    }

    /// Harris ratio test: relax every bound by the feasibility tolerance, then
    /// pick the largest pivot (or, under Bland, the lowest basis index) among
    /// the rows that block within the relaxed step.
    fn choose_leaving_float(&self, q: usize, pricing: Pricing) -> Option<usize> {
        let tol = S::tolerance().to_f64();
        let col: Vec<f64> = self.rows.iter().map(|r| Scalar::to_f64(&r[q])).collect();
        let scale = col.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let piv_tol = tol * scale;
        let rhs = |i: usize| Scalar::to_f64(&self.rhs[i]).max(0.0);
        let step = (0..col.len())
            .filter(|&i| col[i] > piv_tol)
            .map(|i| (rhs(i) + tol) / col[i])
            .fold(f64::INFINITY, f64::min);
        if step.is_infinite() {
            return None;
        }
        let blocking: Vec<usize> = (0..col.len())
            .filter(|&i| col[i] > piv_tol && rhs(i) / col[i] <= step)
            .collect();
        let degenerate = blocking.iter().any(|&i| rhs(i) <= tol);
        if degenerate && blocking.len() > 1 {
            return self.lexicographic_min(&blocking, &col);
        }
        let blocking = blocking.into_iter();
        match pricing {
            Pricing::Bland => blocking.min_by_key(|&i| self.basis[i]),
            Pricing::SteepestEdge => blocking.max_by(|&i, &j| col[i].total_cmp(&col[j])),
        }
    }
}

/// Solve a linear program. The scalar type selects exact or floating arithmetic.
pub fn solve_lp<S: Scalar>(
    prog: &LinearProgram<S>,
    opts: &LpOptions,
) -> Result<LpOutcome<S>, NumericsError> {
    prog.validate()?;
    let n = prog.n_vars();

    // Column layout: one column per nonnegative variable, two per free variable.
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut n_struct = 0;
    for b in &prog.bounds {
        match b {
            VarBound::NonNegative => {
                col_of.push((n_struct, None));
                n_struct += 1;
            }
            VarBound::Free => {
                col_of.push((n_struct, Some(n_struct + 1)));
                n_struct += 2;
            }
        }
    }

    let expand = |row: &[S]| -> Vec<S> {
        let mut out = vec![S::zero(); n_struct];
        for (v, &(pos, neg)) in row.iter().zip(&col_of) {
            out[pos] = v.clone();
            if let Some(neg) = neg {
                out[neg] = -v.clone();
            }
        }
        out
    };

    struct RowSpec<S> {
        coeffs: Vec<S>,
        rhs: S,
        slack: Option<S>,
        needs_artificial: bool,
    }
    let mut specs = Vec::new();
    for (row, b) in prog.a_ub.iter().zip(&prog.b_ub) {
        let coeffs = expand(row);
        if b.is_neg() {
            specs.push(RowSpec {
                coeffs: coeffs.into_iter().map(|v| -v).collect(),
                rhs: -b.clone(),
                slack: Some(-S::one()),
                needs_artificial: true,
            });
        } else {
            specs.push(RowSpec {
                coeffs,
                rhs: if b.is_neg() { S::zero() } else { b.clone() },
                slack: Some(S::one()),
                needs_artificial: false,
            });
        }
    }
    for (row, b) in prog.a_eq.iter().zip(&prog.b_eq) {
        let coeffs = expand(row);
        let (coeffs, rhs) = if b.is_neg() {
            (coeffs.into_iter().map(|v| -v).collect(), -b.clone())
        } else {
            (coeffs, b.clone())
        };
        specs.push(RowSpec {
            coeffs,
            rhs,
            slack: None,
            needs_artificial: true,
        });
    }

    let m = specs.len();
    let n_slack = specs.iter().filter(|s| s.slack.is_some()).count();
    let n_art = specs.iter().filter(|s| s.needs_artificial).count();
    let n_cols = n_struct + n_slack + n_art;
    let art_start = n_struct + n_slack;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut identity = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n_struct, art_start);
    for spec in specs {
        let mut row = spec.coeffs;
        row.resize(n_cols, S::zero());
        let mut basic = None;
        if let Some(s) = spec.slack {
            let positive = s.is_pos();
            row[next_slack] = s;
            if positive {
                basic = Some(next_slack);
            }
            next_slack += 1;
        }
        if spec.needs_artificial {
            row[next_art] = S::one();
            basic = Some(next_art);
            next_art += 1;
        }
        let basic = basic.expect("every row has a basic column");
        rows.push(row);
        rhs.push(spec.rhs);
        basis.push(basic);
        identity.push(basic);
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        identity,
        n_cols,
        iterations: 0,
    };

    // Phase 1: drive the artificial variables to zero.
    if n_art > 0 {
        let mut cost = vec![S::zero(); n_cols];
        for c in cost.iter_mut().skip(art_start) {
            *c = -S::one();
        }
        let allowed = vec![true; n_cols];
        tab.optimize(&cost, &allowed, opts)?;
        let (_, value) = tab.reduced_costs(&cost);
        let scale = S::one()
            + tab
                .rhs
                .iter()
                .map(|v| v.abs())
                .fold(S::zero(), S::max_of);
        let infeasibility = -value;
        let infeasible = if S::EXACT {
            infeasibility.is_pos()
        } else {
            infeasibility.to_f64() > S::tolerance().to_f64() * scale.to_f64()
        };
        if infeasible {
            trace!("phase 1 ended with infeasibility {}", infeasibility.to_f64());
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot remaining zero-level artificials out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                let candidate = (0..art_start)
                    .filter(|&j| !tab.rows[i][j].approx_zero())
                    .max_by(|&a, &b| {
                        tab.rows[i][a]
                            .abs()
                            .partial_cmp(&tab.rows[i][b].abs())
                            .unwrap_or(std::cmp::Ordering::Equal)
                    });
                match candidate {
                    Some(q) => {
                        let mut dummy_r = vec![S::zero(); n_cols];
                        let mut dummy_v = S::zero();
                        tab.rhs[i] = S::zero();
                        tab.pivot(i, q, &mut dummy_r, &mut dummy_v);
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase 2 on the real objective, artificial columns frozen at zero.
    let mut cost = vec![S::zero(); n_cols];
    let flip = prog.sense == Sense::Minimize;
    for (v, &(pos, neg)) in prog.objective.iter().zip(&col_of) {
        let c = if flip { -v.clone() } else { v.clone() };
        if let Some(neg) = neg {
            cost[neg] = -c.clone();
        }
        cost[pos] = c;
    }
    let mut allowed = vec![true; n_cols];
    for a in allowed.iter_mut().skip(art_start) {
        *a = false;
    }
    if let PhaseResult::Unbounded = tab.optimize(&cost, &allowed, opts)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut cols = vec![S::zero(); n_cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        let v = tab.rhs[i].clone();
        cols[b] = if !S::EXACT && v.approx_zero() {
            S::zero()
        } else {
            v
        };
    }
    let x: Vec<S> = col_of
        .iter()
        .map(|&(pos, neg)| match neg {
            Some(neg) => cols[pos].clone() - cols[neg].clone(),
            None => cols[pos].clone(),
        })
        .collect();
    let value = prog.objective_at(&x);
    trace!("simplex finished after {} pivots", tab.iterations);
    Ok(LpOutcome::Optimal { value, x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn maximize_bounded_variable() {
        let mut lp = LinearProgram::<Rational>::new(Sense::Maximize, vec![q(1, 1)]);
        lp.add_le(vec![q(1, 1)], q(1, 1));
        match solve_lp(&lp, &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(1, 1));
                assert_eq!(x, vec![q(1, 1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        let mut lp = LinearProgram::<Rational>::feasibility(1);
        lp.add_le(vec![q(1, 1)], q(-1, 1));
        assert_eq!(solve_lp(&lp, &LpOptions::default()).unwrap(), LpOutcome::Infeasible);
        let mut lpf = LinearProgram::<f64>::feasibility(1);
        lpf.add_le(vec![1.0], -1.0);
        assert_eq!(solve_lp(&lpf, &LpOptions::default()).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.add_le(vec![-1.0, 1.0], 1.0);
        assert_eq!(solve_lp(&lp, &LpOptions::default()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables_and_minimization() {
        // minimize y s.t. y >= x - 1, y >= -x + 1, x free, y free -> 0 at x = 1
        let mut lp = LinearProgram::<Rational>::new(Sense::Minimize, vec![q(0, 1), q(1, 1)]);
        lp.set_free(0);
        lp.set_free(1);
        lp.add_ge(vec![q(-1, 1), q(1, 1)], q(-1, 1));
        lp.add_ge(vec![q(1, 1), q(1, 1)], q(1, 1));
        match solve_lp(&lp, &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(0, 1));
                assert_eq!(x[0], q(1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::<Rational>::new(Sense::Maximize, vec![q(1, 1), q(2, 1)]);
        lp.add_eq(vec![q(1, 1), q(1, 1)], q(1, 1));
        lp.add_eq(vec![q(2, 1), q(2, 1)], q(2, 1));
        match solve_lp(&lp, &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iteration_cap_reports_error() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_le(vec![1.0, 0.0], 1.0);
        lp.add_le(vec![0.0, 1.0], 1.0);
        let opts = LpOptions {
            max_iter: 1,
            ..LpOptions::default()
        };
        assert!(matches!(
            solve_lp(&lp, &opts),
            Err(NumericsError::IterationLimit(_))
        ));
    }

    #[test]
    fn cancellation_is_observed() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0]);
        lp.add_le(vec![1.0], 1.0);
        let opts = LpOptions {
            cancel: CancelToken::new(),
            ..LpOptions::default()
        };
        opts.cancel.cancel();
        assert!(matches!(solve_lp(&lp, &opts), Err(NumericsError::Cancelled)));
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_le(vec![1.0], 1.0);
        assert!(matches!(
            solve_lp(&lp, &LpOptions::default()),
            Err(NumericsError::DimensionMismatch(_))
        ));
    }

    fn beale<S: Scalar>() -> LinearProgram<S> {
        let f = |n, d| S::from_ratio(n, d);
        let mut lp = LinearProgram::new(Sense::Maximize, vec![f(3, 4), f(-20, 1), f(1, 2), f(-6, 1)]);
        lp.add_le(vec![f(1, 4), f(-8, 1), f(-1, 1), f(9, 1)], f(0, 1));
        lp.add_le(vec![f(1, 2), f(-12, 1), f(-1, 2), f(3, 1)], f(0, 1));
        lp.add_le(vec![f(0, 1), f(0, 1), f(1, 1), f(0, 1)], f(1, 1));
        lp
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        match solve_lp(&beale::<Rational>(), &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(5, 4)),
            other => panic!("unexpected {other:?}"),
        }
        match solve_lp(&beale::<f64>(), &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.25).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }
}
