use std::path::Path;

use quasiknow::evolution::{ClassicalLaw, QuantumLaw};
use quasiknow::io::{self, LawDoc, SokDoc};
use quasiknow::numerics::{Rational, Scalar};
use quasiknow::sok::{ClassicalSok, QuantumSok};
use serde_json::Value;

use crate::error::{domain, input, CliResult};

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    io::parse_json(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| domain(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    write_text(path, &io::to_json_string(v))
}

fn located<T>(path: &Path, r: quasiknow::error::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        if e.is_input_error() {
            input(msg)
        } else {
            domain(msg)
        }
    })
}

pub fn sok(path: &Path) -> CliResult<SokDoc> {
    let v = read_json(path)?;
    located(path, io::sok_from_value(&v))
}

pub fn law(path: &Path) -> CliResult<LawDoc> {
    let v = read_json(path)?;
    located(path, io::law_from_value(&v))
}

/// Several states of one kind, promoted to floats if any file needs them.
pub enum States {
    Exact(Vec<ClassicalSok<Rational>>),
    Float(Vec<ClassicalSok<f64>>),
    Quantum(Vec<QuantumSok>),
}

pub fn unify(docs: Vec<SokDoc>) -> CliResult<States> {
    let any_float = docs.iter().any(|d| matches!(d, SokDoc::Float(_)));
    let any_quantum = docs.iter().any(|d| matches!(d, SokDoc::Quantum(_)));
    if docs.iter().any(|d| matches!(d, SokDoc::Decoherent(_))) {
        return Err(domain("decoherent records are stored only; no operation is defined on them"));
    }
    if any_quantum {
        if docs.iter().any(|d| !matches!(d, SokDoc::Quantum(_))) {
            return Err(domain("cannot mix classical and quantum states"));
        }
        return Ok(States::Quantum(
            docs.into_iter()
                .map(|d| match d {
                    SokDoc::Quantum(q) => q,
                    _ => unreachable!(),
                })
                .collect(),
        ));
    }
    if any_float {
        return Ok(States::Float(
            docs.into_iter()
                .map(|d| match d {
                    SokDoc::Exact(s) => s.to_f64(),
                    SokDoc::Float(s) => s,
                    _ => unreachable!(),
                })
                .collect(),
        ));
    }
    Ok(States::Exact(
        docs.into_iter()
            .map(|d| match d {
                SokDoc::Exact(s) => s,
                _ => unreachable!(),
            })
            .collect(),
    ))
}

/// A law with states of the matching kind.
pub enum Setting {
    Exact(ClassicalLaw<Rational>, Vec<ClassicalSok<Rational>>),
    Float(ClassicalLaw<f64>, Vec<ClassicalSok<f64>>),
    Quantum(QuantumLaw, Vec<QuantumSok>),
}

pub fn setting(law: LawDoc, docs: Vec<SokDoc>) -> CliResult<Setting> {
    let states = unify(docs)?;
    match (law, states) {
        (LawDoc::Exact(l), States::Exact(s)) => Ok(Setting::Exact(l, s)),
        (LawDoc::Exact(l), States::Float(s)) => Ok(Setting::Float(l.map_scalar(Scalar::to_f64), s)),
        (LawDoc::Float(l), States::Exact(s)) => Ok(Setting::Float(l, s.iter().map(ClassicalSok::to_f64).collect())),
        (LawDoc::Float(l), States::Float(s)) => Ok(Setting::Float(l, s)),
        (LawDoc::Quantum(l), States::Quantum(s)) => Ok(Setting::Quantum(l, s)),
        _ => Err(domain("the law and the states must both be classical or both quantum")),
    }
}
