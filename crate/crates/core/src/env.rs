//! Finite environment spaces, optionally factored into named registers.

use std::fmt;

use crate::error::{QkError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub labels: Vec<String>,
}

impl Register {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Self {
        Self {
            name: name.into(),
            labels,
        }
    }

    pub fn indexed(name: impl Into<String>, size: usize) -> Self {
        Self::new(name, (0..size).map(|i| i.to_string()).collect())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }
}

/// Ordered product of registers; flat indices are row-major (last register fastest).
/// Flat labels join the register labels with `,`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvSpace {
    registers: Vec<Register>,
}

pub const DEFAULT_REGISTER: &str = "E";

impl EnvSpace {
    /// A single unnamed-register environment.
    pub fn new<L: Into<String>>(labels: impl IntoIterator<Item = L>) -> Result<Self> {
        Self::from_registers(vec![Register::new(
            DEFAULT_REGISTER,
            labels.into_iter().map(Into::into).collect(),
        )])
    }

    pub fn indexed(n: usize) -> Self {
        Self::from_registers(vec![Register::indexed(DEFAULT_REGISTER, n)])
            .expect("indexed labels are unique")
    }

    pub fn from_registers(registers: Vec<Register>) -> Result<Self> {
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(QkError::InvalidEnv(format!("duplicate register `{}`", r.name)));
            }
            for (j, l) in r.labels.iter().enumerate() {
                if r.labels[..j].contains(l) {
                    return Err(QkError::InvalidEnv(format!(
                        "duplicate label `{l}` in register `{}`",
                        r.name
                    )));
                }
            }
        }
        Ok(Self { registers })
    }

    /// Rebuild a factored space from flat labels and `(name, size)` pairs.
    /// Component labels come from splitting flat labels on `,` when that is
    /// consistent, and from indices otherwise.
    pub fn from_flat(labels: &[String], registers: &[(String, usize)]) -> Result<Self> {
        if registers.is_empty() {
            return Self::new(labels.iter().cloned());
        }
        let dim: usize = registers.iter().map(|r| r.1).product();
        if dim != labels.len() {
            return Err(QkError::InvalidEnv(format!(
                "register sizes multiply to {dim} but {} labels given",
                labels.len()
            )));
        }
        let indexed = Self::from_registers(
            registers
                .iter()
                .map(|(n, s)| Register::indexed(n.clone(), *s))
                .collect(),
        )?;
        let parts: Vec<Vec<&str>> = labels.iter().map(|l| l.split(',').collect()).collect();
        if registers.len() > 1 && parts.iter().all(|p| p.len() == registers.len()) {
            let mut regs: Vec<Register> = Vec::with_capacity(registers.len());
            for (k, (name, size)) in registers.iter().enumerate() {
                let mut comp = vec![String::new(); *size];
                for (flat, p) in parts.iter().enumerate() {
                    comp[indexed.multi_index(flat)[k]] = p[k].to_string();
                }
                regs.push(Register::new(name.clone(), comp));
            }
            if let Ok(env) = Self::from_registers(regs) {
                if env.labels() == labels {
                    return Ok(env);
                }
            }
        }
        if registers.len() == 1 {
            let env = Self::from_registers(vec![Register::new(registers[0].0.clone(), labels.to_vec())])?;
            return Ok(env);
        }
        if indexed.labels() == labels {
            return Ok(indexed);
        }
        Err(QkError::InvalidEnv(
            "flat labels are not consistent with the register factorization".into(),
        ))
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dim(&self) -> usize {
        self.registers.iter().map(Register::size).product()
    }

    pub fn is_factored(&self) -> bool {
        self.registers.len() > 1
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    pub fn label(&self, flat: usize) -> String {
        self.multi_index(flat)
            .iter()
            .zip(&self.registers)
            .map(|(&k, r)| r.labels[k].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        (0..self.dim())
            .find(|&i| self.label(i) == label)
            .ok_or_else(|| QkError::UnknownLabel(label.to_string()))
    }

    pub fn register_position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| QkError::UnknownRegister(name.to_string()))
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.registers.len()];
        for (k, r) in self.registers.iter().enumerate().rev() {
            idx[k] = flat % r.size().max(1);
            flat /= r.size().max(1);
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.registers)
            .fold(0, |acc, (&i, r)| acc * r.size() + i)
    }

    /// Append a register, e.g. `E` to `E×O`.
    pub fn with_register(&self, reg: Register) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.push(reg);
        Self::from_registers(regs)
    }

    /// The space left after removing `name`, and for every flat index its
    /// `(remaining index, removed-register value)` pair.
    pub fn trace_out(&self, name: &str) -> Result<(EnvSpace, Vec<(usize, usize)>)> {
        let pos = self.register_position(name)?;
        let mut regs = self.registers.clone();
        regs.remove(pos);
        if regs.is_empty() {
            regs.push(Register::indexed(DEFAULT_REGISTER, 1));
        }
        let rest = Self::from_registers(regs)?;
        let map = (0..self.dim())
            .map(|flat| {
                let mut idx = self.multi_index(flat);
                let c = idx.remove(pos);
                let r = if idx.is_empty() { 0 } else { rest.flat_index(&idx) };
                (r, c)
            })
            .collect();
        Ok((rest, map))
    }

    pub fn ensure_same(&self, other: &EnvSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(QkError::EnvMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Display for EnvSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .registers
            .iter()
            .map(|r| format!("{}[{}]", r.name, r.size()))
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}
