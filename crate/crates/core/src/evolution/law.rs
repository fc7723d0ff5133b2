//! Laws of nature: contractive maps from `E×O` to `E×I`.

use nalgebra::Complex;

use crate::env::{EnvSpace, Register};
use crate::error::{QkError, Result};
use crate::numerics::eigen::{self, CMatrix};
use crate::numerics::{eps, Scalar};
use crate::sok::{ClassicalSok, Knowledge, QuantumSok};

pub const OUTPUT_REGISTER: &str = "O";
pub const INPUT_REGISTER: &str = "I";

/// Common interface for the classical and quantum laws.
pub trait Law<K: Knowledge> {
    fn env(&self) -> &EnvSpace;
    fn inputs(&self) -> &Register;
    fn outputs(&self) -> &Register;
    fn blockdiag(&self) -> bool;
    /// Map a state over `E×O` to one over `E×I`.
    fn apply(&self, s: &K) -> Result<K>;

    fn out_env(&self) -> EnvSpace {
        self.env()
            .with_register(self.outputs().clone())
            .expect("law registers validated at construction")
    }

    fn in_env(&self) -> EnvSpace {
        self.env()
            .with_register(self.inputs().clone())
            .expect("law registers validated at construction")
    }
}

fn check_registers(env: &EnvSpace, inputs: &Register, outputs: &Register) -> Result<()> {
    if inputs.name != INPUT_REGISTER || outputs.name != OUTPUT_REGISTER {
        return Err(QkError::InvalidLaw(format!(
            "registers must be named `{INPUT_REGISTER}` and `{OUTPUT_REGISTER}`"
        )));
    }
    if inputs.size() == 0 || outputs.size() == 0 {
        return Err(QkError::InvalidLaw("empty input or output register".into()));
    }
    env.with_register(inputs.clone())
        .and(env.with_register(outputs.clone()))
        .map_err(|e| QkError::InvalidLaw(e.to_string()))?;
    Ok(())
}

/// `T' ∈ ℝ≥0^{(E×I)×(E×O)}` with maximal column sum at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalLaw<S> {
    env: EnvSpace,
    inputs: Register,
    outputs: Register,
    t: Vec<Vec<S>>,
    blockdiag: bool,
    /// Some column sum lies within tolerance above one.
    pub near_boundary: bool,
}

impl<S: Scalar> ClassicalLaw<S> {
    pub fn new(env: &EnvSpace, inputs: Register, outputs: Register, t: Vec<Vec<S>>) -> Result<Self> {
        check_registers(env, &inputs, &outputs)?;
        let (ne, ni, no) = (env.dim(), inputs.size(), outputs.size());
        if t.len() != ne * ni || t.iter().any(|r| r.len() != ne * no) {
            return Err(QkError::InvalidLaw(format!(
                "transition matrix must be {}x{}",
                ne * ni,
                ne * no
            )));
        }
        if let Some(v) = t.iter().flatten().find(|v| v.is_neg()) {
            return Err(QkError::InvalidLaw(format!("negative entry {v}")));
        }
        let mut near_boundary = false;
        for j in 0..ne * no {
            let s = t.iter().fold(S::zero(), |acc, r| acc + r[j].clone());
            let excess = s - S::one();
            if excess.is_pos() {
                return Err(QkError::InvalidLaw(format!(
                    "column {j} sums above one by {excess}"
                )));
            }
            if !S::EXACT && excess.to_f64() > 0.0 {
                near_boundary = true;
            }
        }
        let mut blockdiag = true;
        for (r, row) in t.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if r / ni != c / no && !v.approx_zero() {
                    blockdiag = false;
                }
            }
        }
        Ok(Self {
            env: env.clone(),
            inputs,
            outputs,
            t,
            blockdiag,
            near_boundary,
        })
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.t
    }

    /// Identity on `E` with trivial one-element `I` and `O`.
    pub fn identity(env: &EnvSpace) -> Self {
        let n = env.dim();
        let t = (0..n)
            .map(|r| (0..n).map(|c| if r == c { S::one() } else { S::zero() }).collect())
            .collect();
        Self::new(
            env,
            Register::indexed(INPUT_REGISTER, 1),
            Register::indexed(OUTPUT_REGISTER, 1),
            t,
        )
        .expect("identity law is valid")
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ClassicalLaw<T> {
        ClassicalLaw {
            env: self.env.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            t: self.t.iter().map(|r| r.iter().map(&f).collect()).collect(),
            blockdiag: self.blockdiag,
            near_boundary: self.near_boundary,
        }
    }

    /// `T' v` for a raw column over `E×O`.
    pub fn apply_column(&self, v: &[S]) -> Vec<S> {
        self.t
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }
}

impl<S: Scalar> Law<ClassicalSok<S>> for ClassicalLaw<S> {
    fn env(&self) -> &EnvSpace {
        &self.env
    }
    fn inputs(&self) -> &Register {
        &self.inputs
    }
    fn outputs(&self) -> &Register {
        &self.outputs
    }
    fn blockdiag(&self) -> bool {
        self.blockdiag
    }
    fn apply(&self, s: &ClassicalSok<S>) -> Result<ClassicalSok<S>> {
        let out_env = Law::<ClassicalSok<S>>::out_env(self);
        if s.env().dim() != out_env.dim() {
            return Err(QkError::DimensionMismatch(format!(
                "law expects a state over {out_env}, got {}",
                s.env()
            )));
        }
        let in_env = Law::<ClassicalSok<S>>::in_env(self);
        let cols = s.matrix_columns().iter().map(|c| self.apply_column(c)).collect();
        ClassicalSok::from_columns(&in_env, cols)
    }
}

/// `T' ∈ ℂ^{(E×I)×(E×O)}` with operator norm at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLaw {
    env: EnvSpace,
    inputs: Register,
    outputs: Register,
    t: CMatrix,
    blockdiag: bool,
    pub near_boundary: bool,
}

impl QuantumLaw {
    pub fn new(env: &EnvSpace, inputs: Register, outputs: Register, t: CMatrix) -> Result<Self> {
        check_registers(env, &inputs, &outputs)?;
        let (ne, ni, no) = (env.dim(), inputs.size(), outputs.size());
        if t.nrows() != ne * ni || t.ncols() != ne * no {
            return Err(QkError::InvalidLaw(format!(
                "transition matrix must be {}x{}",
                ne * ni,
                ne * no
            )));
        }
        let norm = eigen::sigma_max(&t);
        if norm > 1.0 + eps() {
            return Err(QkError::InvalidLaw(format!("operator norm {norm} exceeds one")));
        }
        let mut blockdiag = true;
        for r in 0..t.nrows() {
            for c in 0..t.ncols() {
                if r / ni != c / no && t[(r, c)].norm() > eps() {
                    blockdiag = false;
                }
            }
        }
        Ok(Self {
            env: env.clone(),
            inputs,
            outputs,
            t,
            blockdiag,
            near_boundary: norm > 1.0,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t
    }

    /// Amplitude version of a classical law: entrywise square roots.
    pub fn from_classical_sqrt(law: &ClassicalLaw<f64>) -> Result<Self> {
        let t = law.matrix();
        let m = CMatrix::from_fn(t.len(), t[0].len(), |r, c| Complex::new(t[r][c].sqrt(), 0.0));
        Self::new(&law.env, law.inputs.clone(), law.outputs.clone(), m)
    }
}

impl Law<QuantumSok> for QuantumLaw {
    fn env(&self) -> &EnvSpace {
        &self.env
    }
    fn inputs(&self) -> &Register {
        &self.inputs
    }
    fn outputs(&self) -> &Register {
        &self.outputs
    }
    fn blockdiag(&self) -> bool {
        self.blockdiag
    }
    fn apply(&self, s: &QuantumSok) -> Result<QuantumSok> {
        let out_env = Law::<QuantumSok>::out_env(self);
        if s.env().dim() != out_env.dim() {
            return Err(QkError::DimensionMismatch(format!(
                "law expects a state over {out_env}, got {}",
                s.env()
            )));
        }
        let g = &self.t * s.gram() * self.t.adjoint();
        QuantumSok::new(&Law::<QuantumSok>::in_env(self), eigen::hermitian_part(&g))
    }
}

/// `tr_I T(1 ⊗ δ_o)`: the multiplier that one step with output `o` applies to
/// a state when the law acts separately on each environment state.
pub fn observation_multiplier<K: Knowledge, L: Law<K>>(law: &L, output: usize) -> Result<K> {
    if output >= law.outputs().size() {
        return Err(QkError::InvalidLaw(format!("no output with index {output}")));
    }
    let one = K::one(law.env()).tensor_point(law.outputs().clone(), output)?;
    law.apply(&one)?.partial_trace(INPUT_REGISTER)?.with_env(law.env())
}

/// Index of an output label.
pub fn output_index<K: Knowledge, L: Law<K>>(law: &L, label: &str) -> Result<usize> {
    law.outputs()
        .labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| QkError::UnknownLabel(label.to_string()))
}

/// Either kind, as read from a law file.
#[derive(Debug, Clone)]
pub enum LawOfNature<S> {
    Classical(ClassicalLaw<S>),
    Quantum(QuantumLaw),
}
