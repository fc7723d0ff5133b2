//! Truncated Poisson series `Σ_k e^{-rt} (rt)^k/k! · A^k S(0)`.

use num_traits::One;

use crate::error::{QkError, Result};
use crate::numerics::Scalar;
use crate::sok::Knowledge;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTruncation<F> {
    /// Highest retained power.
    pub k: usize,
    /// Rate times time.
    pub rt: F,
}

/// The truncated series with the factor `e^{-rt}` kept apart.
///
/// `coefficients[k] = (rt)^k/k!` and `partial_sum = Σ_k coefficients[k]·A^k S(0)`
/// are exact in rational mode; the value of the series is `e^{-rt}·partial_sum`.
#[derive(Debug, Clone)]
pub struct PoissonSeries<K: Knowledge> {
    pub truncation: SeriesTruncation<K::Field>,
    pub coefficients: Vec<K::Field>,
    /// `tr(A^k S(0))`.
    pub power_traces: Vec<K::Field>,
    pub partial_sum: K,
    /// Upper bound on the trace of the dropped terms.
    pub tail_bound: f64,
}

impl<K: Knowledge> PoissonSeries<K> {
    pub fn prefactor(&self) -> f64 {
        (-self.truncation.rt.to_f64()).exp()
    }

    /// The truncated series itself; the prefactor is rounded to `f64` here.
    pub fn value(&self) -> Result<K> {
        self.partial_sum.scale(&K::Field::from_f64(self.prefactor()))
    }

    pub fn total_trace(&self) -> f64 {
        self.prefactor() * self.partial_sum.trace().to_f64()
    }
}

/// `tr S₀ · e^{-rt} Σ_{k>K} (g·rt)^k/k!` with `g = max_e eval(A)_e`, which bounds
/// `tr(A^k S₀)` by `g^k tr S₀`.
pub fn poisson_tail(trace_s0: f64, g: f64, rt: f64, k_max: usize) -> f64 {
    let x = g * rt;
    if trace_s0 == 0.0 || x == 0.0 {
        return 0.0;
    }
    let ln_x = x.ln();
    let mut log_term = -rt;
    for k in 1..=k_max {
        log_term += ln_x - (k as f64).ln();
    }
    let mut tail = 0.0;
    let mut k = k_max;
    loop {
        k += 1;
        log_term += ln_x - (k as f64).ln();
        let term = log_term.exp();
        tail += term;
        if k as f64 > x && term <= tail * 1e-17 {
            break;
        }
        if k > k_max + 100_000 {
            break;
        }
    }
    trace_s0 * tail
}

pub fn poisson_series<K: Knowledge>(
    a: &K,
    s0: &K,
    truncation: SeriesTruncation<K::Field>,
    tol: Option<f64>,
) -> Result<PoissonSeries<K>> {
    a.env().ensure_same(s0.env())?;
    if truncation.rt.is_neg() {
        return Err(QkError::InvalidState(format!(
            "rate times time must be nonnegative, got {}",
            truncation.rt
        )));
    }
    let rt = truncation.rt.clone();
    let mut coefficients = Vec::with_capacity(truncation.k + 1);
    let mut power_traces = Vec::with_capacity(truncation.k + 1);
    let mut coeff = K::Field::one();
    let mut power = s0.canonical();
    let mut partial_sum = K::zero(s0.env());
    for k in 0..=truncation.k {
        if k > 0 {
            coeff = coeff * rt.clone() / K::Field::from_usize(k);
            power = a.mul(&power)?.canonical();
        }
        power_traces.push(power.trace());
        partial_sum = partial_sum.add(&power.scale(&coeff)?)?.canonical();
        coefficients.push(coeff.clone());
    }
    let g = a
        .eval()
        .iter()
        .map(Scalar::to_f64)
        .fold(0.0, f64::max);
    let tail_bound = poisson_tail(s0.trace().to_f64(), g, rt.to_f64(), truncation.k);
    if let Some(tol) = tol {
        if tail_bound > tol {
            return Err(QkError::TruncationTooSmall {
                tail: tail_bound,
                tol,
            });
        }
    }
    Ok(PoissonSeries {
        truncation,
        coefficients,
        power_traces,
        partial_sum,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvSpace;
    use crate::numerics::Rational;
    use crate::sok::ClassicalSok;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn coin() -> (ClassicalSok<Rational>, ClassicalSok<Rational>) {
        let env = EnvSpace::indexed(2);
        let a = ClassicalSok::from_columns(&env, vec![vec![q(3, 5), q(2, 5)], vec![q(2, 5), q(3, 5)]]).unwrap();
        let s0 = ClassicalSok::from_columns(&env, vec![vec![q(1, 2), q(1, 2)]]).unwrap();
        (a, s0)
    }

    #[test]
    fn second_coefficient_at_unit_rate() {
        let (a, s0) = coin();
        let s = poisson_series(&a, &s0, SeriesTruncation { k: 4, rt: q(1, 1) }, None).unwrap();
        assert_eq!(s.coefficients[2], q(1, 2));
        assert!((s.prefactor() * 0.5 - (-1.0f64).exp() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_time_is_initial_state() {
        let (a, s0) = coin();
        for k in [0, 3, 7] {
            let s = poisson_series(&a, &s0, SeriesTruncation { k, rt: q(0, 1) }, None).unwrap();
            assert!(s.partial_sum.canonical_eq(&s0));
            assert_eq!(s.prefactor(), 1.0);
            assert_eq!(s.tail_bound, 0.0);
        }
    }

    #[test]
    fn unit_multiplier_resums() {
        let (_, s0) = coin();
        let one = ClassicalSok::one(s0.env());
        let s = poisson_series(&one, &s0, SeriesTruncation { k: 12, rt: q(3, 2) }, None).unwrap();
        let err = (s.total_trace() - 1.0).abs();
        assert!(err <= s.tail_bound + 1e-15, "{err} vs {}", s.tail_bound);
        assert!(s.partial_sum.canonical_eq(&s0.scale(&s.coefficients.iter().cloned().fold(q(0, 1), |a, b| a + b)).unwrap()));
    }

    #[test]
    fn short_truncation_is_rejected() {
        let (a, s0) = coin();
        let r = poisson_series(&a, &s0, SeriesTruncation { k: 1, rt: q(5, 1) }, Some(1e-6));
        assert!(matches!(r, Err(QkError::TruncationTooSmall { .. })));
    }
}
