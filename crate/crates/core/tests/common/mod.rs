#![allow(dead_code)]

use num_traits::{One, Zero};
use quasiknow::env::{EnvSpace, Register};
use quasiknow::evolution::{ClassicalLaw, INPUT_REGISTER, OUTPUT_REGISTER};
use quasiknow::numerics::{Rational, Scalar, C64};
use quasiknow::sok::{ClassicalSok, QuantumSok, WaveFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// `k/den` with `k` uniform in `0..=den`.
pub fn grid(rng: &mut impl Rng, den: i64) -> Rational {
    q(rng.random_range(0..=den), den)
}

/// Random matrix columns over `dim` entries on the grid `k/den`.
pub fn grid_columns(rng: &mut impl Rng, dim: usize, n_cols: usize, den: i64) -> Vec<Vec<Rational>> {
    (0..n_cols).map(|_| (0..dim).map(|_| grid(rng, den)).collect()).collect()
}

pub fn classical(rng: &mut impl Rng, dim: usize, max_cols: usize) -> ClassicalSok<Rational> {
    let n = rng.random_range(1..=max_cols);
    ClassicalSok::from_columns(&EnvSpace::indexed(dim), grid_columns(rng, dim, n, 4)).unwrap()
}

/// `rows × cols`, nonnegative, column sums `1` if `stochastic`, otherwise at most `1`.
pub fn substochastic(rng: &mut impl Rng, rows: usize, cols: usize, stochastic: bool) -> Vec<Vec<Rational>> {
    let mut t = vec![vec![Rational::zero(); cols]; rows];
    for j in 0..cols {
        let raw: Vec<i64> = (0..rows).map(|_| rng.random_range(0..=3)).collect();
        let total: i64 = raw.iter().sum();
        if total == 0 {
            if stochastic {
                t[rng.random_range(0..rows)][j] = Rational::one();
            }
            continue;
        }
        let slack = if stochastic { 0 } else { rng.random_range(0..=2) };
        for i in 0..rows {
            t[i][j] = q(raw[i], total + slack);
        }
    }
    t
}

/// `P_a = P_b Tᵀ`: a state below `b` by construction.
pub fn garble<S: Scalar>(b: &ClassicalSok<S>, t: &[Vec<S>]) -> ClassicalSok<S> {
    let pb = b.matrix_columns();
    let dim = b.env().dim();
    let cols = t
        .iter()
        .map(|row| {
            (0..dim)
                .map(|e| row.iter().zip(&pb).fold(S::zero(), |acc, (w, c)| acc + w.clone() * c[e].clone()))
                .collect()
        })
        .collect();
    ClassicalSok::from_columns(b.env(), cols).unwrap()
}

pub fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn wave(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    (0..dim).map(|_| complex(rng)).collect()
}

pub fn waves(rng: &mut impl Rng, dim: usize, max_vectors: usize) -> Vec<Vec<C64>> {
    let n = rng.random_range(1..=max_vectors);
    (0..n).map(|_| wave(rng, dim)).collect()
}

pub fn quantum_from(dim: usize, vectors: Vec<Vec<C64>>) -> QuantumSok {
    QuantumSok::from_waves(&WaveFamily::new(&EnvSpace::indexed(dim), vectors).unwrap())
}

pub fn quantum(rng: &mut impl Rng, dim: usize, max_vectors: usize) -> QuantumSok {
    quantum_from(dim, waves(rng, dim, max_vectors))
}

/// Each environment state reveals one of `n_in` signals under `observe`; `idle` reveals nothing.
pub fn observation_law(rng: &mut impl Rng, n_e: usize, n_in: usize) -> ClassicalLaw<f64> {
    let env = EnvSpace::indexed(n_e);
    let mut labels: Vec<String> = (0..n_in).map(|i| format!("s{i}")).collect();
    labels.push("none".into());
    let inputs = Register::new(INPUT_REGISTER, labels);
    let outputs = Register::new(OUTPUT_REGISTER, vec!["observe".into(), "idle".into()]);
    let (ni, no) = (n_in + 1, 2);
    let mut t = vec![vec![0.0; n_e * no]; n_e * ni];
    for e in 0..n_e {
        let raw: Vec<f64> = (0..n_in).map(|_| rng.random_range(1..=4) as f64).collect();
        let total: f64 = raw.iter().sum();
        for i in 0..n_in {
            t[e * ni + i][e * no] = raw[i] / total;
        }
        t[e * ni + n_in][e * no + 1] = 1.0;
    }
    ClassicalLaw::new(&env, inputs, outputs, t).unwrap()
}
