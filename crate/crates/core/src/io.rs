//! JSON files for states, laws, witnesses and algorithm plans.
//!
//! Numbers may be JSON numbers, strings (`"0.18"`, `"9/50"`) or
//! `[numerator, denominator]` pairs. A document whose numbers are all strings
//! or integers is read exactly; any fractional JSON number selects floats.
//! Output is deterministic: fixed key order and fixed number formatting.

use nalgebra::Complex;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::env::{EnvSpace, Register};
use crate::error::{QkError, Result};
use crate::evolution::law::{ClassicalLaw, Law, QuantumLaw, INPUT_REGISTER, OUTPUT_REGISTER};
use crate::numerics::eigen::{CMatrix, C64};
use crate::numerics::{format_rational, Rational, Scalar};
use crate::order::Witness;
use crate::sok::{ClassicalSok, DecoherentRecord, QuantumSok, WaveFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberMode {
    Exact,
    Float,
}

fn parse_err(msg: impl Into<String>) -> QkError {
    QkError::Parse(msg.into())
}

/// Float mode as soon as any JSON number is not an integer.
pub fn number_mode(v: &Value) -> NumberMode {
    fn has_float(v: &Value) -> bool {
        match v {
            Value::Number(n) => !(n.is_i64() || n.is_u64()),
            Value::Array(a) => a.iter().any(has_float),
            Value::Object(o) => o.values().any(has_float),
            _ => false,
        }
    }
    if has_float(v) {
        NumberMode::Float
    } else {
        NumberMode::Exact
    }
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("invalid JSON: {e}")))
}

/// Pretty-printed with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

/// Scalars that know how to write themselves.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        Value::String(format_exact(self))
    }
}

/// Terminating decimals as `"0.18"`, everything else as `"n/d"`.
pub fn format_exact(r: &Rational) -> String {
    let mut d = r.denom().clone();
    let (two, five, ten) = (BigInt::from(2), BigInt::from(5), BigInt::from(10));
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format_rational(r);
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return r.numer().to_string();
    }
    let scaled = r * Rational::from_integer(num_traits::pow(ten, digits));
    let n = scaled.to_integer();
    let sign = if n < BigInt::zero() { "-" } else { "" };
    let text = format!("{:0>width$}", n.magnitude().to_string(), width = digits + 1);
    let (int, frac) = text.split_at(text.len() - digits);
    format!("{sign}{int}.{frac}")
}

pub fn scalar<S: Scalar>(v: &Value) -> Result<S> {
    match v {
        Value::String(s) => S::parse_decimal(s).map_err(|e| parse_err(e.to_string())),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(S::from_ratio(i, 1))
            } else {
                n.as_f64()
                    .map(S::from_f64)
                    .ok_or_else(|| parse_err(format!("number {n} out of range")))
            }
        }
        Value::Array(a) if a.len() == 2 => {
            let den: S = scalar(&a[1])?;
            if den.approx_zero() {
                return Err(parse_err("zero denominator"));
            }
            Ok(scalar::<S>(&a[0])? / den)
        }
        other => Err(parse_err(format!("expected a number, found {other}"))),
    }
}

fn vector<S: Scalar>(v: &Value) -> Result<Vec<S>> {
    array(v, "vector")?.iter().map(scalar).collect()
}

fn matrix<S: Scalar>(v: &Value) -> Result<Vec<Vec<S>>> {
    array(v, "matrix")?.iter().map(vector).collect()
}

/// A real number or a `[re, im]` pair of real numbers.
fn complex(v: &Value) -> Result<C64> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex::new(scalar::<f64>(&a[0])?, scalar::<f64>(&a[1])?)),
        other => Ok(Complex::new(scalar::<f64>(other)?, 0.0)),
    }
}

fn complex_matrix(v: &Value) -> Result<Vec<Vec<C64>>> {
    array(v, "matrix")?
        .iter()
        .map(|row| array(row, "matrix row")?.iter().map(complex).collect())
        .collect()
}

fn cmatrix(rows: &[Vec<C64>], what: &str) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(parse_err(format!("ragged {what}")));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn complex_to_json(z: &C64) -> Value {
    json!([z.re, z.im])
}

fn cmatrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(&m[(i, j)])).collect()))
            .collect(),
    )
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(format!("{what} must be an array")))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_err(format!("missing field `{key}`")))
}

fn string(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(parse_err(format!("{what} must be a string"))),
    }
}

fn kind(v: &Value) -> Result<String> {
    match v.get("kind") {
        Some(k) => string(k, "kind"),
        None => Ok("classical".into()),
    }
}

fn env_from_value(v: &Value) -> Result<EnvSpace> {
    let labels: Vec<String> = array(field(v, "env")?, "env")?
        .iter()
        .map(|l| string(l, "environment label"))
        .collect::<Result<_>>()?;
    let registers: Vec<(String, usize)> = match v.get("registers") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Object(o)) => o
            .iter()
            .map(|(k, s)| {
                s.as_u64()
                    .map(|n| (k.clone(), n as usize))
                    .ok_or_else(|| parse_err(format!("register `{k}` needs an integer size")))
            })
            .collect::<Result<_>>()?,
        Some(_) => return Err(parse_err("registers must be an object of sizes")),
    };
    EnvSpace::from_flat(&labels, &registers)
}

fn env_fields(env: &EnvSpace, out: &mut Map<String, Value>) {
    out.insert("env".into(), json!(env.labels()));
    if env.is_factored() {
        let mut regs = Map::new();
        for r in env.registers() {
            regs.insert(r.name.clone(), json!(r.size()));
        }
        out.insert("registers".into(), Value::Object(regs));
    }
}

/// A state file of any kind, in the mode its numbers select.
#[derive(Debug, Clone)]
pub enum SokDoc {
    Exact(ClassicalSok<Rational>),
    Float(ClassicalSok<f64>),
    Quantum(QuantumSok),
    Decoherent(DecoherentRecord),
}

impl SokDoc {
    pub fn kind(&self) -> &'static str {
        match self {
            SokDoc::Exact(_) | SokDoc::Float(_) => "classical",
            SokDoc::Quantum(_) => "quantum",
            SokDoc::Decoherent(_) => "decoherent",
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            SokDoc::Exact(s) => classical_to_value(s),
            SokDoc::Float(s) => classical_to_value(s),
            SokDoc::Quantum(s) => quantum_to_value(s),
            SokDoc::Decoherent(r) => decoherent_to_value(r),
        }
    }
}

pub fn parse_sok(text: &str) -> Result<SokDoc> {
    sok_from_value(&parse_json(text)?)
}

pub fn sok_from_value(v: &Value) -> Result<SokDoc> {
    match kind(v)?.as_str() {
        "classical" => match number_mode(v) {
            NumberMode::Exact => classical_from_value(v).map(SokDoc::Exact),
            NumberMode::Float => classical_from_value(v).map(SokDoc::Float),
        },
        "quantum" => quantum_from_value(v).map(SokDoc::Quantum),
        "decoherent" => decoherent_from_value(v).map(SokDoc::Decoherent),
        k => Err(parse_err(format!("unknown kind `{k}`"))),
    }
}

/// Either `columns: [{weight, p}]` or `rows` (the `E×M` matrix row by row).
pub fn classical_from_value<S: Scalar>(v: &Value) -> Result<ClassicalSok<S>> {
    let env = env_from_value(v)?;
    if let Some(rows) = v.get("rows") {
        return ClassicalSok::from_rows(&env, &matrix(rows)?);
    }
    let cols = array(field(v, "columns")?, "columns")?
        .iter()
        .map(|c| {
            let w = match c.get("weight") {
                Some(w) => scalar(w)?,
                None => S::one(),
            };
            Ok((w, vector(field(c, "p")?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    ClassicalSok::from_weighted(&env, cols)
}

/// Writes the columns as stored; canonicalize first for canonical files.
pub fn classical_to_value<S: JsonScalar>(s: &ClassicalSok<S>) -> Value {
    let mut out = Map::new();
    out.insert("kind".into(), json!("classical"));
    env_fields(s.env(), &mut out);
    let cols: Vec<Value> = s
        .columns()
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("weight".into(), c.weight.to_json());
            m.insert("p".into(), Value::Array(c.p.iter().map(JsonScalar::to_json).collect()));
            Value::Object(m)
        })
        .collect();
    out.insert("columns".into(), Value::Array(cols));
    Value::Object(out)
}

/// Either `gram` or `waves` (one amplitude vector per memory state).
pub fn quantum_from_value(v: &Value) -> Result<QuantumSok> {
    let env = env_from_value(v)?;
    if let Some(w) = v.get("waves") {
        return Ok(QuantumSok::from_waves(&WaveFamily::new(&env, complex_matrix(w)?)?));
    }
    let g = cmatrix(&complex_matrix(field(v, "gram")?)?, "gram")?;
    QuantumSok::new(&env, g)
}

pub fn quantum_to_value(s: &QuantumSok) -> Value {
    let mut out = Map::new();
    out.insert("kind".into(), json!("quantum"));
    env_fields(s.env(), &mut out);
    out.insert("gram".into(), cmatrix_to_json(s.gram()));
    Value::Object(out)
}

/// `psi[d][e][m]` amplitudes; stored only.
pub fn decoherent_from_value(v: &Value) -> Result<DecoherentRecord> {
    let env: Vec<String> = array(field(v, "env")?, "env")?
        .iter()
        .map(|l| string(l, "environment label"))
        .collect::<Result<_>>()?;
    let psi: Vec<Vec<Vec<C64>>> = array(field(v, "psi")?, "psi")?
        .iter()
        .map(complex_matrix)
        .collect::<Result<_>>()?;
    let d_dim = psi.len();
    let m_dim = psi.first().and_then(|b| b.first()).map_or(0, Vec::len);
    let rec = DecoherentRecord { env, d_dim, m_dim, psi };
    if !rec.shape_ok() {
        return Err(parse_err("psi must be D blocks of E rows of M amplitudes"));
    }
    Ok(rec)
}

pub fn decoherent_to_value(r: &DecoherentRecord) -> Value {
    let psi: Vec<Value> = r
        .psi
        .iter()
        .map(|block| {
            Value::Array(
                block
                    .iter()
                    .map(|row| Value::Array(row.iter().map(complex_to_json).collect()))
                    .collect(),
            )
        })
        .collect();
    json!({"kind": "decoherent", "env": r.env, "psi": psi})
}

/// A law file in the mode its numbers select.
#[derive(Debug, Clone)]
pub enum LawDoc {
    Exact(ClassicalLaw<Rational>),
    Float(ClassicalLaw<f64>),
    Quantum(QuantumLaw),
}

impl LawDoc {
    pub fn to_value(&self) -> Value {
        match self {
            LawDoc::Exact(l) => classical_law_to_value(l),
            LawDoc::Float(l) => classical_law_to_value(l),
            LawDoc::Quantum(l) => quantum_law_to_value(l),
        }
    }
}

/// `E`, `I`, `O` are sizes or label lists.
fn labels(v: &Value, key: &str) -> Result<Vec<String>> {
    match field(v, key)? {
        Value::Number(n) => n
            .as_u64()
            .map(|n| (0..n).map(|i| i.to_string()).collect())
            .ok_or_else(|| parse_err(format!("`{key}` must be a size or a label list"))),
        Value::Array(a) => a.iter().map(|l| string(l, "label")).collect(),
        _ => Err(parse_err(format!("`{key}` must be a size or a label list"))),
    }
}

fn law_spaces(v: &Value) -> Result<(EnvSpace, Register, Register)> {
    Ok((
        EnvSpace::new(labels(v, "E")?)?,
        Register::new(INPUT_REGISTER, labels(v, "I")?),
        Register::new(OUTPUT_REGISTER, labels(v, "O")?),
    ))
}

pub fn parse_law(text: &str) -> Result<LawDoc> {
    law_from_value(&parse_json(text)?)
}

pub fn law_from_value(v: &Value) -> Result<LawDoc> {
    let (env, inputs, outputs) = law_spaces(v)?;
    let t = field(v, "T")?;
    match kind(v)?.as_str() {
        "classical" => match number_mode(t) {
            NumberMode::Exact => ClassicalLaw::new(&env, inputs, outputs, matrix(t)?).map(LawDoc::Exact),
            NumberMode::Float => ClassicalLaw::new(&env, inputs, outputs, matrix(t)?).map(LawDoc::Float),
        },
        "quantum" => {
            let m = cmatrix(&complex_matrix(t)?, "T")?;
            QuantumLaw::new(&env, inputs, outputs, m).map(LawDoc::Quantum)
        }
        k => Err(parse_err(format!("unknown kind `{k}`"))),
    }
}

fn is_indexed(labels: &[String]) -> bool {
    labels.iter().enumerate().all(|(i, l)| *l == i.to_string())
}

fn labels_value(labels: &[String]) -> Value {
    if is_indexed(labels) {
        json!(labels.len())
    } else {
        json!(labels)
    }
}

fn law_header<K: crate::sok::Knowledge, L: Law<K>>(law: &L, kind: &str) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("kind".into(), json!(kind));
    out.insert("E".into(), labels_value(&law.env().labels()));
    out.insert("I".into(), labels_value(&law.inputs().labels));
    out.insert("O".into(), labels_value(&law.outputs().labels));
    out
}

pub fn classical_law_to_value<S: JsonScalar>(law: &ClassicalLaw<S>) -> Value {
    let mut out = law_header(law, "classical");
    let t: Vec<Value> = law
        .matrix()
        .iter()
        .map(|r| Value::Array(r.iter().map(JsonScalar::to_json).collect()))
        .collect();
    out.insert("T".into(), Value::Array(t));
    Value::Object(out)
}

pub fn quantum_law_to_value(law: &QuantumLaw) -> Value {
    let mut out = law_header(law, "quantum");
    out.insert("T".into(), cmatrix_to_json(law.matrix()));
    Value::Object(out)
}

pub fn witness_to_value<S: JsonScalar>(w: &Witness<S>, direction: &str) -> Value {
    match w {
        Witness::Classical { t, norm } => json!({
            "kind": "classical",
            "T": t.iter().map(|r| r.iter().map(JsonScalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "norm": norm.to_json(),
            "direction": direction,
        }),
        Witness::Quantum { t, norm, .. } => json!({
            "kind": "quantum",
            "T": cmatrix_to_json(t),
            "norm": norm,
            "direction": direction,
        }),
    }
}

/// The matrix of a classical witness file.
pub fn classical_witness_from_value<S: Scalar>(v: &Value) -> Result<Vec<Vec<S>>> {
    matrix(field(v, "T")?)
}

pub fn quantum_witness_from_value(v: &Value) -> Result<CMatrix> {
    cmatrix(&complex_matrix(field(v, "T")?)?, "T")
}

/// Index of an algorithm plan: the state files in order and the
/// verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanIndex {
    pub initial: String,
    pub steps: Vec<String>,
    pub residuals: Vec<f64>,
    pub error_bound: Value,
}

impl PlanIndex {
    pub fn to_value(&self) -> Value {
        json!({
            "initial": self.initial,
            "steps": self.steps,
            "report": {
                "residuals": self.residuals,
                "error_bound": self.error_bound,
            },
        })
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let initial = string(field(v, "initial")?, "initial")?;
        let steps = array(field(v, "steps")?, "steps")?
            .iter()
            .map(|s| string(s, "step file"))
            .collect::<Result<_>>()?;
        let report = v.get("report").cloned().unwrap_or(Value::Null);
        let residuals = match report.get("residuals") {
            Some(r) => vector(r)?,
            None => Vec::new(),
        };
        Ok(Self {
            initial,
            steps,
            residuals,
            error_bound: report.get("error_bound").cloned().unwrap_or(Value::Null),
        })
    }
}
