//! Learning the bias of a coin by watching flips.

use num_traits::One;

use crate::env::{EnvSpace, Register};
use crate::error::{QkError, Result};
use crate::numerics::{parse_rational, Rational, Scalar};
use crate::sok::{ClassicalSok, Knowledge};

use super::law::{ClassicalLaw, INPUT_REGISTER, OUTPUT_REGISTER};

pub const HEADS_BIASED: &str = "HeadsBiased";
pub const TAILS_BIASED: &str = "TailsBiased";
pub const OBSERVE: usize = 0;
pub const IDLE: usize = 1;

pub fn coin_env() -> EnvSpace {
    EnvSpace::new([HEADS_BIASED, TAILS_BIASED]).expect("distinct labels")
}

pub fn coin_outputs() -> Register {
    Register::new(OUTPUT_REGISTER, vec!["observe".into(), "idle".into()])
}

pub fn coin_inputs() -> Register {
    Register::new(INPUT_REGISTER, vec!["h".into(), "t".into(), "none".into()])
}

#[derive(Debug, Clone)]
pub struct CoinScenario<S> {
    pub env: EnvSpace,
    /// The one-flip multiplier: column `h` is `(b, 1-b)`, column `t` is `(1-b, b)`.
    pub q: ClassicalSok<S>,
    pub s0: ClassicalSok<S>,
    /// Output `observe` reveals a flip in `I ∈ {h, t}`; `idle` yields `none`.
    pub law: ClassicalLaw<S>,
}

pub fn coin_scenario<S: Scalar>(bias: S, prior: &[S]) -> Result<CoinScenario<S>> {
    if bias.is_neg() || (bias.clone() - S::one()).is_pos() {
        return Err(QkError::InvalidState(format!("bias {bias} outside [0, 1]")));
    }
    let env = coin_env();
    if prior.len() != 2 {
        return Err(QkError::DimensionMismatch("the prior has one entry per bias".into()));
    }
    let other = S::one() - bias.clone();
    let rows = [[bias.clone(), other.clone()], [other, bias]];
    let q = ClassicalSok::from_columns(
        &env,
        vec![
            vec![rows[0][0].clone(), rows[1][0].clone()],
            vec![rows[0][1].clone(), rows[1][1].clone()],
        ],
    )?;
    let s0 = ClassicalSok::from_columns(&env, vec![prior.to_vec()])?;
    let (ni, no) = (3, 2);
    let mut t = vec![vec![S::zero(); 2 * no]; 2 * ni];
    for e in 0..2 {
        for i in 0..2 {
            t[e * ni + i][e * no + OBSERVE] = rows[e][i].clone();
        }
        t[e * ni + 2][e * no + IDLE] = S::one();
    }
    let law = ClassicalLaw::new(&env, coin_inputs(), coin_outputs(), t)?;
    Ok(CoinScenario { env, q, s0, law })
}

impl<S: Scalar> CoinScenario<S> {
    /// `Q^n S₀`, canonicalized after each flip.
    pub fn after_flips(&self, n: usize) -> Result<ClassicalSok<S>> {
        let mut s = self.s0.clone();
        for _ in 0..n {
            s = self.q.mul(&s)?.canonicalize();
        }
        Ok(s)
    }
}

/// `p·Q + (1-p)·1`: a flip is seen only with probability `p`.
pub fn lazy_observation<K: Knowledge>(q: &K, p_obs: &K::Field) -> Result<K> {
    if p_obs.is_neg() || (p_obs.clone() - K::Field::one()).is_pos() {
        return Err(QkError::InvalidState(format!("probability {p_obs} outside [0, 1]")));
    }
    q.scale(p_obs)?
        .add(&K::one(q.env()).scale(&(K::Field::one() - p_obs.clone()))?)
}

/// Reference matrices for bias 0.6 and a uniform prior, as rows over `E`.
#[derive(Debug, Clone)]
pub struct CoinGolden {
    pub q: Vec<Vec<Rational>>,
    /// After one flip.
    pub p1: Vec<Vec<Rational>>,
    /// After two flips, one column per outcome sequence.
    pub p2: Vec<Vec<Rational>>,
    /// After two flips, one column per head count.
    pub p2_prime: Vec<Vec<Rational>>,
    /// Witness `P₂' = P₂ T₂ᵀ`: count the heads.
    pub t2: Vec<Vec<Rational>>,
    /// Witness `P₂ = P₂' T₂'ᵀ`: draw an order of flips.
    pub t2_prime: Vec<Vec<Rational>>,
    /// `¼Q + ¾·1`.
    pub lazy: Vec<Vec<Rational>>,
}

fn rows(data: &[&[&str]]) -> Vec<Vec<Rational>> {
    data.iter()
        .map(|r| r.iter().map(|v| parse_rational(v).expect("golden literal")).collect())
        .collect()
}

pub fn coin_golden() -> CoinGolden {
    CoinGolden {
        q: rows(&[&[".6", ".4"], &[".4", ".6"]]),
        p1: rows(&[&[".3", ".2"], &[".2", ".3"]]),
        p2: rows(&[&[".18", ".12", ".12", ".08"], &[".08", ".12", ".12", ".18"]]),
        p2_prime: rows(&[&[".18", ".24", ".08"], &[".08", ".24", ".18"]]),
        t2: rows(&[&["1", "0", "0", "0"], &["0", "1", "1", "0"], &["0", "0", "0", "1"]]),
        t2_prime: rows(&[&["1", "0", "0"], &["0", ".5", "0"], &["0", ".5", "0"], &["0", "0", "1"]]),
        lazy: rows(&[&[".15", ".10", ".75"], &[".10", ".15", ".75"]]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::law::Law;
    use crate::evolution::simulate::{check_idle, constant_plan, simulate};

    fn default_coin() -> CoinScenario<Rational> {
        let half = Rational::from_ratio(1, 2);
        coin_scenario(Rational::from_ratio(3, 5), &[half.clone(), half]).unwrap()
    }

    #[test]
    fn multiplier_matches_golden() {
        let c = default_coin();
        assert_eq!(c.q.to_rows(), coin_golden().q);
    }

    #[test]
    fn law_on_uniform_prior_gives_one_flip_state() {
        let c = default_coin();
        let s_o = c.s0.tensor_point(coin_outputs(), OBSERVE).unwrap();
        let out = c.law.apply(&s_o).unwrap().partial_trace(INPUT_REGISTER).unwrap();
        let golden = ClassicalSok::from_rows(&c.env, &coin_golden().p1).unwrap();
        assert!(out.canonical_eq(&golden));
        assert_eq!(out.eval(), vec![Rational::from_ratio(1, 2); 2]);
        assert!(c.law.blockdiag());
    }

    #[test]
    fn two_observations_simulate_to_binomial_form() {
        let c = default_coin();
        let plan = constant_plan(&c.law, &c.s0, 2, OBSERVE).unwrap();
        let tr = simulate(&plan, &c.law).unwrap();
        let golden = ClassicalSok::from_rows(&c.env, &coin_golden().p2_prime).unwrap();
        assert!(tr.final_state().canonical_eq(&golden));
        assert_eq!(tr.s_tilde.trace(), Rational::from_ratio(2, 1));
        assert!(tr.accumulation_ok);
    }

    #[test]
    fn idle_output_is_idle() {
        let c = default_coin();
        check_idle(&c.law, &c.after_flips(3).unwrap(), IDLE).unwrap();
        assert!(check_idle(&c.law, &c.s0, OBSERVE).is_err());
    }

    #[test]
    fn observing_multiplies_by_q() {
        let c = default_coin();
        let a: ClassicalSok<Rational> = crate::evolution::law::observation_multiplier(&c.law, OBSERVE).unwrap();
        assert!(a.canonical_eq(&c.q));
        let idle: ClassicalSok<Rational> = crate::evolution::law::observation_multiplier(&c.law, IDLE).unwrap();
        assert!(idle.canonical_eq(&ClassicalSok::one(&c.env)));
    }

    #[test]
    fn lazy_matrix() {
        let c = default_coin();
        let lazy = lazy_observation(&c.q, &Rational::from_ratio(1, 4)).unwrap();
        assert_eq!(lazy.to_rows(), coin_golden().lazy);
        let never = lazy_observation(&c.q, &Rational::from_ratio(0, 1)).unwrap();
        assert!(never.mul(&c.s0).unwrap().canonical_eq(&c.s0));
    }
}
