//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::time::Instant;

use common::{classical, complex, garble, grid, grid_columns, observation_law, q, quantum, quantum_from, rng, substochastic, wave, waves};
use num_traits::{One, Zero};
use quasiknow::env::EnvSpace;
use quasiknow::error::Result;
use quasiknow::evolution::coin::{coin_outputs, IDLE, OBSERVE};
use quasiknow::evolution::{
    coin_golden, coin_scenario, constant_plan, lazy_observation, observation_multiplier, poisson_series, simulate,
    ClassicalLaw, SeriesTruncation,
};
use quasiknow::numerics::eigen::max_abs;
use quasiknow::numerics::{LpOptions, PsdOptions, Rational, Scalar};
use quasiknow::order::{check_cancellation, expected_entropy, leq_classical, verify_classical_witness};
use quasiknow::sok::{ClassicalSok, Knowledge, QuantumSok, QuasiSok};
use quasiknow::tasks::dictionary::DEFAULT_MAX_COLUMNS;
use quasiknow::tasks::{
    adversary_classical, build_universal_algorithm, payoff_average, payoff_worstcase, run_universal_classical,
    trace_distance_classical, trace_distance_quantum, trace_distance_quantum_psd, AdvSettings, Dictionary, PayoffSpec,
    WorstCase,
};
use rand::Rng;

const GOLDEN_SECONDS: f64 = 1.0;
const RING_CLASSICAL: usize = 1000;
const RING_QUANTUM: usize = 200;
const CANCELLATION_TRIPLES: usize = 500;
const ENTROPY_EXACT_PAIRS: usize = 500;
const ENTROPY_FLOAT_PAIRS: usize = 200;
const ENTROPY_TOL_EXACT: f64 = 1e-12;
const ENTROPY_TOL_FLOAT: f64 = 1e-9;
const POLARIZATION_PAIRS: usize = 200;
const POLARIZATION_TOL: f64 = 1e-12;
const POISSON_SECONDS: f64 = 1.0;
const POISSON_K: usize = 20;
/// The tail bound is tight for a stochastic multiplier, so only its own f64 rounding is allowed.
const POISSON_TAIL_REL_TOL: f64 = 1e-12;
const PAYOFF_INSTANCES: usize = 400;
const DISTANCE_INSTANCES: usize = 100;
const DISTANCE_TOL: f64 = 1e-6;
const METRIC_TRIPLES: usize = 200;
const METRIC_TOL: f64 = 1e-9;
const ROUND_TRIP_STEPS: [usize; 3] = [1, 10, 100];
const ROUND_TRIP_EPS: f64 = 1e-12;
const ADV_INSTANCES: usize = 50;
const ADV_TOL: f64 = 1e-6;

type Check = Result<(bool, String)>;

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("coin golden suite", golden),
        ("algebra axioms", ring_axioms),
        ("cancellation", cancellation),
        ("entropy monotonicity", entropy),
        ("polarization identity", polarization),
        ("poisson series", poisson),
        ("payoff oracle", payoff),
        ("quantum trace distance", distance),
        ("adversary and universal round trip", round_trip),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn failures_detail(failures: &[String], ok: String) -> (bool, String) {
    if failures.is_empty() {
        (true, ok)
    } else {
        (false, failures.join("; "))
    }
}

fn golden() -> Check {
    let start = Instant::now();
    let g = coin_golden();
    let c = coin_scenario(q(3, 5), &[q(1, 2), q(1, 2)])?;
    let rows = |r: &Vec<Vec<Rational>>| ClassicalSok::from_rows(&c.env, r);
    let (p2_seq, p2_count) = (rows(&g.p2)?, rows(&g.p2_prime)?);
    let mut failures = Vec::new();
    if !c.q.mul(&c.q.mul(&c.s0)?)?.canonical_eq(&p2_count) {
        failures.push("Q²·½𝟙 differs from the head-count matrix".to_string());
    }
    if !leq_classical(&p2_count, &p2_seq)?.related || !leq_classical(&p2_seq, &p2_count)?.related {
        failures.push("the two-flip matrices are not equivalent".into());
    }
    let r = verify_classical_witness(&p2_count, &p2_seq, &g.t2)?;
    if !r.is_zero() {
        failures.push(format!("T₂ residual {r}"));
    }
    let r = verify_classical_witness(&p2_seq, &p2_count, &g.t2_prime)?;
    if !r.is_zero() {
        failures.push(format!("T₂′ residual {r}"));
    }
    if !c.after_flips(1)?.canonical_eq(&rows(&g.p1)?) {
        failures.push("one-flip state".into());
    }
    if !lazy_observation(&c.q, &q(1, 4))?.canonical_eq(&rows(&g.lazy)?) {
        failures.push("lazy observation".into());
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= GOLDEN_SECONDS {
        failures.push(format!("took {secs:.3}s"));
    }
    Ok(failures_detail(
        &failures,
        "Q²·½𝟙, both orders, T₂ and T₂′, one flip and lazy observation match exactly".into(),
    ))
}

/// Counts failures per law over instances of one kind.
fn algebra_laws<K: Knowledge>(a: &K, b: &K, c: &K, fails: &mut [(&'static str, usize)]) -> Result<()> {
    let env = a.env().clone();
    let qa = QuasiSok::from_sok(a.clone());
    let qb = QuasiSok::from_sok(b.clone());
    let checks = [
        a.add(b)?.same_class(&b.add(a)?)?,
        a.mul(b)?.same_class(&b.mul(a)?)?,
        a.add(b)?.add(c)?.same_class(&a.add(&b.add(c)?)?)?,
        a.mul(b)?.mul(c)?.same_class(&a.mul(&b.mul(c)?)?)?,
        a.mul(&b.add(c)?)?.same_class(&a.mul(b)?.add(&a.mul(c)?)?)?,
        a.add(&K::zero(&env))?.same_class(a)? && a.mul(&K::one(&env))?.same_class(a)?,
        qa.add(&qa.negate())?.equivalent(&QuasiSok::zero(&env))? && qa.sub(&qb)?.add(&qb)?.equivalent(&qa)?,
    ];
    for (slot, ok) in fails.iter_mut().zip(checks) {
        if !ok {
            slot.1 += 1;
        }
    }
    Ok(())
}

fn ring_axioms() -> Check {
    let names = ["commutative +", "commutative ·", "associative +", "associative ·", "distributive", "units", "quasi inverses"];
    let mut fails: Vec<(&str, usize)> = names.iter().map(|n| (*n, 0)).collect();
    let mut r = rng(1);
    for i in 0..RING_CLASSICAL {
        let dim = 1 + i % 3;
        let (a, b, c) = (classical(&mut r, dim, 3), classical(&mut r, dim, 3), classical(&mut r, dim, 3));
        algebra_laws(&a, &b, &c, &mut fails)?;
    }
    let classical_fails: usize = fails.iter().map(|f| f.1).sum();
    for i in 0..RING_QUANTUM {
        let dim = 1 + i % 4;
        let (a, b, c) = (quantum(&mut r, dim, 3), quantum(&mut r, dim, 3), quantum(&mut r, dim, 3));
        algebra_laws(&a, &b, &c, &mut fails)?;
    }
    let failures: Vec<String> = fails
        .iter()
        .filter(|f| f.1 > 0)
        .map(|(n, k)| format!("{n}: {k} failures"))
        .collect();
    let total: usize = fails.iter().map(|f| f.1).sum();
    Ok(failures_detail(
        &failures,
        format!(
            "{RING_CLASSICAL} rational classical and {RING_QUANTUM} quantum instances, {} laws, {} classical and {} quantum failures",
            names.len(),
            classical_fails,
            total - classical_fails
        ),
    ))
}

fn cancellation() -> Check {
    let mut r = rng(2);
    let (mut disagree, mut related) = (0, 0);
    for i in 0..CANCELLATION_TRIPLES {
        let dim = 1 + i % 3;
        let s2 = classical(&mut r, dim, 3);
        let s1 = if r.random_bool(0.5) {
            let rows = r.random_range(1..=3);
            garble(&s2, &substochastic(&mut r, rows, s2.n_columns(), false))
        } else {
            classical(&mut r, dim, 3)
        };
        let s3 = classical(&mut r, dim, 3);
        let rep = check_cancellation(&s1, &s2, &s3)?;
        disagree += usize::from(!rep.agree());
        related += usize::from(rep.without);
    }
    let (mut q_disagree, mut q_related) = (0, 0);
    for i in 0..CANCELLATION_TRIPLES {
        let dim = 1 + i % 4;
        let v2 = waves(&mut r, dim, 3);
        let s1 = if r.random_bool(0.5) {
            let keep = r.random_range(1..=v2.len());
            quantum_from(dim, v2[..keep].to_vec())
        } else {
            quantum(&mut r, dim, 3)
        };
        let s2 = quantum_from(dim, v2);
        let s3 = quantum(&mut r, dim, 3);
        let rep = check_cancellation(&s1, &s2, &s3)?;
        q_disagree += usize::from(!rep.agree());
        q_related += usize::from(rep.without);
    }
    let detail = format!(
        "{CANCELLATION_TRIPLES} classical triples ({related} ordered, {disagree} disagreements), \
         {CANCELLATION_TRIPLES} quantum triples ({q_related} ordered, {q_disagree} disagreements)"
    );
    Ok((disagree == 0 && q_disagree == 0, detail))
}

fn entropy() -> Check {
    let mut r = rng(3);
    let opts = LpOptions::default();
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..ENTROPY_EXACT_PAIRS {
        let dim = 1 + i % 3;
        let hi = classical(&mut r, dim, 4);
        let rows = r.random_range(1..=4);
        let lo = garble(&hi, &substochastic(&mut r, rows, hi.n_columns(), true));
        if lo.trace() != hi.trace() || !leq_classical(&lo, &hi)?.related {
            failures.push(format!("exact pair {i} is not a trace-equal ordered pair"));
            continue;
        }
        let gap = expected_entropy(&hi) - expected_entropy(&lo);
        worst = worst.max(gap);
        if gap > ENTROPY_TOL_EXACT {
            failures.push(format!("exact pair {i}: entropy rises by {gap:e}"));
        }
    }
    for i in 0..ENTROPY_FLOAT_PAIRS {
        let dim = 1 + i % 3;
        let hi = classical(&mut r, dim, 4).to_f64();
        let rows = r.random_range(1..=4);
        let t: Vec<Vec<f64>> = {
            let raw: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..hi.n_columns()).map(|_| r.random_range(0.0..1.0)).collect())
                .collect();
            let sums: Vec<f64> = (0..hi.n_columns()).map(|j| raw.iter().map(|row| row[j]).sum()).collect();
            raw.iter().map(|row| row.iter().zip(&sums).map(|(x, s)| x / s).collect()).collect()
        };
        let lo = garble(&hi, &t);
        if (lo.trace() - hi.trace()).abs() > ENTROPY_TOL_FLOAT
            || !quasiknow::order::leq_classical_with(&lo, &hi, &opts)?.related
        {
            failures.push(format!("float pair {i} is not a trace-equal ordered pair"));
            continue;
        }
        let gap = expected_entropy(&hi) - expected_entropy(&lo);
        worst = worst.max(gap);
        if gap > ENTROPY_TOL_FLOAT {
            failures.push(format!("float pair {i}: entropy rises by {gap:e}"));
        }
    }
    Ok(failures_detail(
        &failures,
        format!(
            "{ENTROPY_EXACT_PAIRS} rational and {ENTROPY_FLOAT_PAIRS} float ordered pairs, largest rise {worst:.2e}"
        ),
    ))
}

fn polarization() -> Check {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for i in 0..POLARIZATION_PAIRS {
        let dim = 1 + i % 6;
        let (p1, p2) = (wave(&mut r, dim), wave(&mut r, dim));
        let sum: Vec<_> = p1.iter().zip(&p2).map(|(a, b)| a + b).collect();
        let diff: Vec<_> = p1.iter().zip(&p2).map(|(a, b)| a - b).collect();
        let lhs = quantum_from(dim, vec![p1.clone()]).add(&quantum_from(dim, vec![p2]))?;
        let rhs = quantum_from(dim, vec![sum]).scale(&0.5)?.add(&quantum_from(dim, vec![diff]).scale(&0.5)?)?;
        worst = worst.max(max_abs(&(lhs.gram() - rhs.gram())));
        let alpha = complex(&mut r);
        let scaled = quantum_from(dim, vec![p1.iter().map(|x| alpha * x).collect()]);
        let rescaled = quantum_from(dim, vec![p1]).scale(&alpha.norm_sqr())?;
        worst = worst.max(max_abs(&(scaled.gram() - rescaled.gram())));
    }
    Ok((
        worst <= POLARIZATION_TOL,
        format!("{POLARIZATION_PAIRS} complex wave pairs up to dimension 6, largest gram residual {worst:.2e}"),
    ))
}

/// `Σ_{k≤n} (-1)^k/k!`, above `e^{-1}` for even `n` and below for odd `n`.
fn inverse_e_partial(n: usize) -> Rational {
    let mut term = Rational::one();
    let mut acc = Rational::one();
    for k in 1..=n {
        term = -term / Rational::from_usize(k);
        acc += term.clone();
    }
    acc
}

fn poisson() -> Check {
    let start = Instant::now();
    let c = coin_scenario(q(3, 5), &[q(1, 2), q(1, 2)])?;
    let a: ClassicalSok<Rational> = observation_multiplier(&c.law, OBSERVE)?;
    let series = poisson_series(
        &a,
        &c.s0,
        SeriesTruncation {
            k: POISSON_K,
            rt: Rational::one(),
        },
        None,
    )?;
    let mut failures = Vec::new();
    let mut factorial = Rational::one();
    for (k, coeff) in series.coefficients.iter().enumerate() {
        if k > 0 {
            factorial *= Rational::from_usize(k);
        }
        if *coeff != factorial.recip() {
            failures.push(format!("coefficient {k} is {coeff}"));
        }
    }
    if series.prefactor() != (-1f64).exp() {
        failures.push("prefactor is not e^-1".into());
    }
    // e^-1 is bracketed exactly, so the missing trace is known to within 1/32!.
    let p = series.partial_sum.trace();
    let tr0 = c.s0.trace();
    let missing_lo = tr0.clone() - inverse_e_partial(30) * p.clone();
    let missing_hi = tr0 - inverse_e_partial(31) * p;
    let bound = Rational::from_float(series.tail_bound * (1.0 + POISSON_TAIL_REL_TOL)).expect("finite bound");
    if missing_lo.is_neg() || missing_hi > bound {
        failures.push(format!(
            "missing trace in [{:e}, {:e}] against tail bound {:e}",
            missing_lo.to_f64(),
            missing_hi.to_f64(),
            series.tail_bound
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= POISSON_SECONDS {
        failures.push(format!("took {secs:.3}s"));
    }
    Ok(failures_detail(
        &failures,
        format!(
            "coefficients e^-1·1/k! for k ≤ {POISSON_K}, missing trace {:.3e} within tail bound {:.3e}",
            missing_hi.to_f64(),
            series.tail_bound
        ),
    ))
}

/// `a[e][m][o]`: payoff in state `e` when memory `m` emits option `o`; the last option emits nothing.
fn payoff_table(p: &[Vec<Rational>], v: &[Vec<Rational>], scale: &[Rational]) -> Vec<Vec<Vec<Rational>>> {
    let n_m = p.len();
    (0..v.len())
        .map(|e| {
            (0..n_m)
                .map(|m| {
                    let mut row: Vec<Rational> = v[e].iter().map(|u| p[m][e].clone() * u * &scale[e]).collect();
                    row.push(Rational::zero());
                    row
                })
                .collect()
        })
        .collect()
}

/// Best total over every deterministic assignment of an option to each memory state.
fn enumerate_average(a: &[Vec<Vec<Rational>>]) -> Rational {
    let (n_m, n_o) = (a[0].len(), a[0][0].len());
    let mut best: Option<Rational> = None;
    for code in 0..n_o.pow(n_m as u32) {
        let mut choice = code;
        let mut total = Rational::zero();
        for m in 0..n_m {
            let o = choice % n_o;
            choice /= n_o;
            for row in a {
                total += &row[m][o];
            }
        }
        if best.as_ref().is_none_or(|b| total > *b) {
            best = Some(total);
        }
    }
    best.unwrap_or_else(Rational::zero)
}

fn solve_square(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone() / m[col][col].clone();
                for k in col..n {
                    let d = f.clone() * m[col][k].clone();
                    m[r][k] -= d;
                }
                let d = f * rhs[col].clone();
                rhs[r] -= d;
            }
        }
    }
    Some((0..n).map(|i| rhs[i].clone() / m[i][i].clone()).collect())
}

/// `max_K min_e payoff_e(K) = min_y Σ_m max_o Σ_e y_e a[e][m][o]` over the simplex, evaluated
/// at every vertex of the arrangement where two options tie or a coordinate vanishes.
fn minimax_worst(a: &[Vec<Vec<Rational>>]) -> Rational {
    let n_e = a.len();
    if n_e == 0 {
        return Rational::zero();
    }
    let (n_m, n_o) = (a[0].len(), a[0][0].len());
    let mut planes: Vec<Vec<Rational>> = Vec::new();
    for e in 0..n_e {
        planes.push((0..n_e).map(|k| if k == e { Rational::one() } else { Rational::zero() }).collect());
    }
    for m in 0..n_m {
        for o1 in 0..n_o {
            for o2 in o1 + 1..n_o {
                let h: Vec<Rational> = (0..n_e).map(|e| a[e][m][o1].clone() - a[e][m][o2].clone()).collect();
                if h.iter().any(|x| !x.is_zero()) && !planes.contains(&h) {
                    planes.push(h);
                }
            }
        }
    }
    let value = |y: &[Rational]| -> Rational {
        (0..n_m)
            .map(|m| {
                (0..n_o)
                    .map(|o| (0..n_e).fold(Rational::zero(), |acc, e| acc + y[e].clone() * a[e][m][o].clone()))
                    .max()
                    .expect("at least one option")
            })
            .sum()
    };
    let mut best: Option<Rational> = None;
    let mut consider = |y: Vec<Rational>| {
        if y.iter().all(|x| !x.is_neg()) {
            let v = value(&y);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    };
    let ones = vec![Rational::one(); n_e];
    let mut rhs = vec![Rational::zero(); n_e - 1];
    rhs.push(Rational::one());
    match n_e {
        1 => consider(vec![Rational::one()]),
        2 => {
            for h in &planes {
                if let Some(y) = solve_square(vec![h.clone(), ones.clone()], rhs.clone()) {
                    consider(y);
                }
            }
        }
        _ => {
            for i in 0..planes.len() {
                for j in i + 1..planes.len() {
                    if let Some(y) = solve_square(vec![planes[i].clone(), planes[j].clone(), ones.clone()], rhs.clone()) {
                        consider(y);
                    }
                }
            }
        }
    }
    best.expect("the simplex vertices are candidates")
}

fn payoff() -> Check {
    let mut r = rng(5);
    let opts = LpOptions::default();
    let mut failures = Vec::new();
    for i in 0..PAYOFF_INSTANCES {
        let (n_e, n_m, n_c) = (r.random_range(1..=3), r.random_range(1..=4), r.random_range(1..=3));
        let p = grid_columns(&mut r, n_e, n_m, 4);
        let v: Vec<Vec<Rational>> = (0..n_e).map(|_| (0..n_c).map(|_| grid(&mut r, 2)).collect()).collect();
        let s = ClassicalSok::from_columns(&EnvSpace::indexed(n_e), p.clone())?;
        let spec = PayoffSpec::new(v.clone(), (0..n_c).map(|c| format!("c{c}")).collect())?;
        let ones = vec![Rational::one(); n_e];
        let raw = payoff_table(&p, &v, &ones);

        let got = payoff_average(&s, &spec, &opts)?.value;
        let want = enumerate_average(&raw);
        if got != want {
            failures.push(format!("instance {i} average: LP {got}, enumeration {want}"));
        }
        let got = payoff_worstcase(&s, &spec, WorstCase::Raw, &opts)?.value;
        let want = minimax_worst(&raw);
        if got != want {
            failures.push(format!("instance {i} worst case: LP {got}, minimax {want}"));
        }
        let mass: Vec<Rational> = (0..n_e).map(|e| p.iter().map(|col| col[e].clone()).sum()).collect();
        let kept: Vec<usize> = (0..n_e).filter(|&e| mass[e].is_pos()).collect();
        let inv: Vec<Rational> = mass.iter().map(|m| if m.is_zero() { Rational::zero() } else { m.recip() }).collect();
        let per: Vec<_> = payoff_table(&p, &v, &inv).into_iter().enumerate().filter(|(e, _)| kept.contains(e)).map(|x| x.1).collect();
        let got = payoff_worstcase(&s, &spec, WorstCase::PerInput, &opts)?.value;
        let want = minimax_worst(&per);
        if got != want {
            failures.push(format!("instance {i} per-input worst case: LP {got}, minimax {want}"));
        }
    }
    let c = coin_scenario(q(3, 5), &[q(1, 2), q(1, 2)])?;
    let guess = PayoffSpec::guess(&c.env.labels());
    for (n, want) in [(1, q(3, 5)), (3, q(81, 125))] {
        let got = payoff_average(&c.after_flips(n)?, &guess, &opts)?.value;
        if got != want {
            failures.push(format!("coin after {n} flips: {got}, expected {want}"));
        }
    }
    Ok(failures_detail(
        &failures,
        format!(
            "{PAYOFF_INSTANCES} grid instances (|E| ≤ 3, |M| ≤ 4, |C| ≤ 3) match enumeration and minimax exactly in 3 modes; coin 0.6 and 0.648"
        ),
    ))
}

fn distance() -> Check {
    let mut r = rng(6);
    let opts = PsdOptions::default();
    let mut worst: f64 = 0.0;
    for i in 0..DISTANCE_INSTANCES {
        let dim = 1 + i % 6;
        let (s, t) = (quantum(&mut r, dim, 3), quantum(&mut r, dim, 3));
        let closed = trace_distance_quantum(&s, &t)?.value;
        let psd = trace_distance_quantum_psd(&s, &t, &opts)?.value;
        worst = worst.max((closed - psd).abs());
    }
    let mut metric_failures = 0;
    for i in 0..METRIC_TRIPLES {
        let dim = 1 + i % 6;
        let (a, b, c) = (quantum(&mut r, dim, 3), quantum(&mut r, dim, 3), quantum(&mut r, dim, 3));
        let d = |x: &QuantumSok, y: &QuantumSok| trace_distance_quantum(x, y).map(|v| v.value);
        let (ab, ba, bc, ac, aa) = (d(&a, &b)?, d(&b, &a)?, d(&b, &c)?, d(&a, &c)?, d(&a, &a)?);
        let ok = ab >= 0.0 && aa.abs() <= METRIC_TOL && (ab - ba).abs() <= METRIC_TOL && ac <= ab + bc + METRIC_TOL;
        metric_failures += usize::from(!ok);
    }
    Ok((
        worst <= DISTANCE_TOL && metric_failures == 0,
        format!(
            "{DISTANCE_INSTANCES} instances up to 6×6, largest closed-form vs program gap {worst:.2e}; \
             {METRIC_TRIPLES} triples, {metric_failures} metric violations"
        ),
    ))
}

fn round_trip() -> Check {
    let opts = LpOptions::default();
    let mut failures = Vec::new();
    let c = coin_scenario(q(3, 5), &[q(1, 2), q(1, 2)])?;
    let target = ClassicalSok::from_rows(&c.env, &coin_golden().p2_prime)?;
    let delta = QuasiSok::from_parts_raw(target.clone(), c.s0.clone())?;
    let obs: ClassicalSok<Rational> = observation_multiplier(&c.law, OBSERVE)?;
    let dict = Dictionary::from_states(&[&c.s0, &target], &[&obs], 2, 0, DEFAULT_MAX_COLUMNS)?;
    let adv = adversary_classical(&delta, &c.law, &dict, &AdvSettings::default(), &opts)?;
    let idle_s = c.s0.tensor_point(coin_outputs(), IDLE)?;
    let idle_r = target.tensor_point(coin_outputs(), IDLE)?;
    let mut errors = Vec::new();
    let mut distances = Vec::new();
    for n in ROUND_TRIP_STEPS {
        let u = build_universal_algorithm(&c.law, &adv.s_tilde, &c.s0, &target, &idle_s, &idle_r, n)?;
        let trace = simulate(&u.plan, &c.law)?;
        if !trace.accumulation_ok {
            failures.push(format!("N' = {n}: accumulation inequality fails"));
        }
        let fin = trace.final_state();
        // The exact program slows down sharply with the denominators of large N'.
        let (target_f, fin_f) = (target.to_f64(), fin.to_f64());
        let near = Dictionary::from_states(&[&target_f, &fin_f], &[], 0, 1, DEFAULT_MAX_COLUMNS)?;
        let dist = trace_distance_classical(&target_f, &fin_f, &near, &opts)?.value;
        if dist > u.error_bound.to_f64() + ROUND_TRIP_EPS {
            failures.push(format!("N' = {n}: plan distance {dist} above {}", u.error_bound));
        }
        let run = run_universal_classical(&c.law, &adv.s_tilde, &idle_s, &idle_r, n, &opts)?;
        if run.error > run.bound {
            failures.push(format!("N' = {n}: representative error {} above {}", run.error, run.bound));
        }
        if !run.ideal.canonical_eq(&target) {
            failures.push(format!("N' = {n}: the ideal run misses the target"));
        }
        errors.push(run.error.to_f64());
        distances.push(dist);
    }
    if errors[2] > errors[1] / 10.0 + ROUND_TRIP_EPS {
        failures.push(format!("error at N' = 100 is {:e}, at N' = 10 is {:e}", errors[2], errors[1]));
    }

    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    for i in 0..ADV_INSTANCES {
        // Larger laws give dense tableaus beyond what a debug build solves quickly.
        let n_e = 2 + i % 2;
        let n_in = if n_e == 2 { r.random_range(2..=3) } else { 2 };
        let law: ClassicalLaw<f64> = observation_law(&mut r, n_e, n_in);
        let prior: Vec<f64> = (0..n_e).map(|_| r.random_range(1..=4) as f64 / 4.0).collect();
        let s0 = ClassicalSok::from_columns(&EnvSpace::indexed(n_e), vec![prior])?;
        let flips = if n_e == 2 { r.random_range(1..=2) } else { 1 };
        let reached = simulate(&constant_plan(&law, &s0, flips, OBSERVE)?, &law)?.final_state().clone();
        let obs: ClassicalSok<f64> = observation_multiplier(&law, OBSERVE)?;
        // The posteriors of S₀ hold the columns of the observing run, so δ is feasible.
        let dict = Dictionary::from_states(&[&s0], &[&obs], flips, 0, DEFAULT_MAX_COLUMNS)?;
        let d1 = QuasiSok::from_parts_raw(reached, s0)?;
        let v1 = adversary_classical(&d1, &law, &dict, &AdvSettings::default(), &opts)?.value;
        let v2 = adversary_classical(&d1.scale(&2.0)?, &law, &dict, &AdvSettings::default(), &opts)?.value;
        worst = worst.max((v2 - 2.0 * v1).abs());
    }
    if worst > ADV_TOL {
        failures.push(format!("Adv(2δ) - 2·Adv(δ) reaches {worst:e}"));
    }
    Ok(failures_detail(
        &failures,
        format!(
            "Adv = {}, N' = 1/10/100: representative error {:.3e}/{:.3e}/{:.3e}, plan distance {:.3e}/{:.3e}/{:.3e}, \
             accumulation holds; scale invariance on {ADV_INSTANCES} laws within {worst:.1e}",
            adv.value, errors[0], errors[1], errors[2], distances[0], distances[1], distances[2]
        ),
    ))
}
