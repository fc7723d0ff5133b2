use std::path::{Path, PathBuf};

use quasiknow::evolution::{
    coin_golden, coin_scenario, constant_plan, lazy_observation, observation_multiplier, output_index, poisson_series,
    simulate, AlgorithmPlan, Law, SeriesTruncation,
};
use quasiknow::io::{self, JsonScalar, PlanIndex, SokDoc};
use quasiknow::numerics::{format_rational, parse_rational, PsdOptions, Rational, Scalar};
use quasiknow::numerics::lp::LpOptions;
use quasiknow::order::{equivalent, expected_entropy, verify_classical_witness, verify_quantum_witness};
use quasiknow::sok::{ClassicalSok, Knowledge, QuantumSok, QuasiSok};
use quasiknow::tasks::{
    adversary_classical, adversary_quantum, build_universal_algorithm, payoff_average, payoff_average_quantum,
    payoff_worstcase, payoff_worstcase_quantum, run_universal_classical, trace_distance_classical,
    trace_distance_quantum, trace_distance_quantum_psd, AdvSettings, Dictionary, PayoffSpec, Soundness, WorstCase,
};
use serde_json::{json, Value};

use crate::args::{Cli, Command, DictArgs, Scenario};
use crate::error::{domain, input, CliResult};
use crate::load::{self, Setting, States};
use crate::plot::{emit_plot_data, PlotTable};
use crate::table::{self, pairs, render, show, strings};

/// Text for standard output and the machine-readable record.
pub struct Output {
    pub text: String,
    pub json: Value,
}

impl Output {
    pub fn finish(self, json_path: Option<&Path>) -> CliResult<()> {
        print!("{}", self.text);
        if let Some(p) = json_path {
            load::write_json(p, &self.json)?;
        }
        Ok(())
    }
}

/// States that can be written to files and shown as tables.
trait Emit: Knowledge {
    fn value(&self) -> Value;
    fn table(&self) -> String;
}

impl<S: JsonScalar> Emit for ClassicalSok<S> {
    fn value(&self) -> Value {
        io::classical_to_value(&self.canonicalize())
    }
    fn table(&self) -> String {
        table::classical(&self.canonicalize())
    }
}

impl Emit for QuantumSok {
    fn value(&self) -> Value {
        io::quantum_to_value(self)
    }
    fn table(&self) -> String {
        table::quantum(self)
    }
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Canon { file, out } => canon(file, out.as_deref()),
        Command::Leq { a, b, witness, verify } => {
            let states = load::unify(vec![load::sok(a)?, load::sok(b)?])?;
            match verify {
                Some(w) => verify_witness(states, &load::read_json(w)?),
                None => match states {
                    States::Exact(s) => leq(&s[0], &s[1], witness),
                    States::Float(s) => leq(&s[0], &s[1], witness),
                    States::Quantum(s) => leq(&s[0], &s[1], witness),
                },
            }
        }
        Command::Equiv { a, b, witness_prefix } => match load::unify(vec![load::sok(a)?, load::sok(b)?])? {
            States::Exact(s) => equiv(&s[0], &s[1], witness_prefix),
            States::Float(s) => equiv(&s[0], &s[1], witness_prefix),
            States::Quantum(s) => equiv(&s[0], &s[1], witness_prefix),
        },
        Command::Entropy { file } => match load::sok(file)? {
            SokDoc::Exact(s) => Ok(entropy(&s)),
            SokDoc::Float(s) => Ok(entropy(&s)),
            _ => Err(domain("expected entropy is defined for classical states")),
        },
        Command::Dist { a, b, dict, psd } => match load::unify(vec![load::sok(a)?, load::sok(b)?])? {
            States::Exact(s) => dist_classical(&s[0], &s[1], dict),
            States::Float(s) => dist_classical(&s[0], &s[1], dict),
            States::Quantum(s) => dist_quantum(&s[0], &s[1], *psd),
        },
        Command::Payoff {
            file,
            utility,
            guess,
            worst,
            per_input,
        } => {
            let mode = if *per_input { WorstCase::PerInput } else { WorstCase::Raw };
            let worst = worst.then_some(mode);
            let util = match utility {
                Some(p) => Some(load::read_json(p)?),
                None if *guess => None,
                None => return Err(input("payoff needs --utility FILE or --guess")),
            };
            let exact_util = util.as_ref().is_none_or(|u| io::number_mode(u) == io::NumberMode::Exact);
            match load::sok(file)? {
                SokDoc::Exact(s) if exact_util => payoff_classical(&s, util.as_ref(), worst),
                SokDoc::Exact(s) => payoff_classical(&s.to_f64(), util.as_ref(), worst),
                SokDoc::Float(s) => payoff_classical(&s, util.as_ref(), worst),
                SokDoc::Quantum(s) => payoff_quantum(&s, util.as_ref(), worst),
                SokDoc::Decoherent(_) => Err(domain("decoherent records are stored only")),
            }
        }
        Command::Adv {
            law,
            start,
            target,
            s0,
            blockdiag,
            strengthen,
            dict,
            out,
        } => {
            let mut docs = vec![load::sok(start)?, load::sok(target)?];
            if let Some(p) = s0 {
                docs.push(load::sok(p)?);
            }
            let opts = AdvOpts {
                blockdiag: *blockdiag,
                strengthen: *strengthen,
                dict: dict.clone(),
                out: out.clone(),
            };
            match load::setting(load::law(law)?, docs)? {
                Setting::Exact(l, s) => adv_classical(&l, &s, &opts),
                Setting::Float(l, s) => adv_classical(&l, &s, &opts),
                Setting::Quantum(l, s) => adv_quantum(&l, &s, &opts),
            }
        }
        Command::BuildAlg {
            law,
            s_tilde,
            start,
            target,
            steps,
            idle,
            out_dir,
            sweep,
            csv,
        } => {
            let docs = vec![load::sok(s_tilde)?, load::sok(start)?, load::sok(target)?];
            let opts = BuildOpts {
                steps: *steps,
                idle: idle.clone(),
                out_dir: out_dir.clone(),
                sweep: sweep.clone(),
                csv: csv.clone(),
            };
            match load::setting(load::law(law)?, docs)? {
                Setting::Exact(l, s) => build_alg(&l, &s, &opts, Some(&|n| representative(&l, &s, &opts, n))),
                Setting::Float(l, s) => build_alg(&l, &s, &opts, Some(&|n| representative(&l, &s, &opts, n))),
                Setting::Quantum(l, s) => build_alg(&l, &s, &opts, None),
            }
        }
        Command::Simulate {
            law,
            plan,
            s0,
            steps,
            output,
            out,
        } => {
            let (docs, n) = match (plan, s0, steps) {
                (Some(p), _, _) => {
                    let index = PlanIndex::from_value(&load::read_json(p)?).map_err(|e| input(e.to_string()))?;
                    let dir = p.parent().unwrap_or(Path::new("."));
                    let mut docs = vec![load::sok(&dir.join(&index.initial))?];
                    for f in &index.steps {
                        docs.push(load::sok(&dir.join(f))?);
                    }
                    (docs, None)
                }
                (None, Some(s), Some(n)) => (vec![load::sok(s)?], Some(*n)),
                _ => return Err(input("simulate needs --plan FILE or --s0 FILE --steps N")),
            };
            let sim = SimOpts {
                constant: n,
                output: output.clone(),
                out: out.clone(),
            };
            match load::setting(load::law(law)?, docs)? {
                Setting::Exact(l, s) => simulate_cmd(&l, s, &sim),
                Setting::Float(l, s) => simulate_cmd(&l, s, &sim),
                Setting::Quantum(l, s) => simulate_cmd(&l, s, &sim),
            }
        }
        Command::Poisson {
            law,
            s0,
            rt,
            k,
            output,
            tol,
            csv,
        } => {
            let exact_rt = parse_rational(rt).is_ok();
            let opts = PoissonOpts {
                rt: rt.clone(),
                k: *k,
                output: output.clone(),
                tol: *tol,
                csv: csv.clone(),
            };
            match load::setting(load::law(law)?, vec![load::sok(s0)?])? {
                Setting::Exact(l, s) if exact_rt => poisson(&l, &s[0], &opts),
                Setting::Exact(l, s) => poisson(&l.map_scalar(Scalar::to_f64), &s[0].to_f64(), &opts),
                Setting::Float(l, s) => poisson(&l, &s[0], &opts),
                Setting::Quantum(l, s) => poisson(&l, &s[0], &opts),
            }
        }
        Command::Scenario { which } => match which {
            Scenario::Coin {
                bias,
                prior,
                flips,
                out_dir,
                max_n,
                csv,
            } => coin(bias, prior, *flips, out_dir.as_deref(), *max_n, csv.as_deref()),
        },
    }
}

fn canon(file: &Path, out: Option<&Path>) -> CliResult<Output> {
    let doc = match load::sok(file)? {
        SokDoc::Exact(s) => SokDoc::Exact(s.canonicalize()),
        SokDoc::Float(s) => SokDoc::Float(s.canonicalize()),
        other => other,
    };
    let v = doc.to_value();
    let text = io::to_json_string(&v);
    if let Some(p) = out {
        load::write_text(p, &text)?;
    }
    Ok(Output { text, json: v })
}

fn leq<K: Knowledge>(a: &K, b: &K, witness: &Path) -> CliResult<Output>
where
    K::Field: JsonScalar,
{
    let v = a.leq(b)?;
    let mut rows = vec![("residual", format!("{:e}", v.residual))];
    let mut record = json!({"related": v.related, "residual": v.residual});
    if let (true, Some(w)) = (v.related, &v.witness) {
        load::write_json(witness, &io::witness_to_value(w, "a<=b"))?;
        rows.push(("witness norm", format!("{}", w.norm_f64())));
        rows.push(("witness", witness.display().to_string()));
        record["witness"] = json!(witness.display().to_string());
    }
    Ok(Output {
        text: format!("{}\n{}", v.related, pairs(&rows)),
        json: record,
    })
}

fn verify_witness(states: States, w: &Value) -> CliResult<Output> {
    let (residual, ok) = match states {
        States::Exact(s) => {
            let t = io::classical_witness_from_value::<Rational>(w)?;
            let r = verify_classical_witness(&s[0], &s[1], &t)?;
            (r.to_f64(), r.approx_zero() || !r.is_pos())
        }
        States::Float(s) => {
            let t = io::classical_witness_from_value::<f64>(w)?;
            let r = verify_classical_witness(&s[0], &s[1], &t)?;
            (r, !r.is_pos())
        }
        States::Quantum(s) => {
            let t = io::quantum_witness_from_value(w)?;
            let r = verify_quantum_witness(&s[0], &s[1], &t)?;
            (r, r <= quasiknow::numerics::eps())
        }
    };
    if !ok {
        return Err(domain(format!("witness does not verify (residual {residual:e})")));
    }
    Ok(Output {
        text: format!("valid\n{}", pairs(&[("residual", format!("{residual:e}"))])),
        json: json!({"valid": true, "residual": residual}),
    })
}

fn equiv<K: Knowledge>(a: &K, b: &K, prefix: &str) -> CliResult<Output>
where
    K::Field: JsonScalar,
{
    let e = equivalent(a, b)?;
    let mut files = Vec::new();
    for (v, tag, dir) in [(&e.forward, "ab", "a<=b"), (&e.backward, "ba", "b<=a")] {
        if let Some(w) = &v.witness {
            let p = PathBuf::from(format!("{prefix}_{tag}.json"));
            load::write_json(&p, &io::witness_to_value(w, dir))?;
            files.push(p.display().to_string());
        }
    }
    let rows = [
        ("a <= b", e.forward.related.to_string()),
        ("b <= a", e.backward.related.to_string()),
        ("canonical forms equal", e.canonical_equal.to_string()),
        ("witnesses", files.join(", ")),
    ];
    let mut text = format!("{}\n{}", e.equivalent, pairs(&rows));
    if e.inconsistent() {
        text.push_str("warning: order verdict and canonical comparison disagree\n");
    }
    Ok(Output {
        text,
        json: json!({
            "equivalent": e.equivalent,
            "forward": e.forward.related,
            "backward": e.backward.related,
            "canonical_equal": e.canonical_equal,
            "witnesses": files,
        }),
    })
}

fn entropy<S: JsonScalar>(s: &ClassicalSok<S>) -> Output {
    let h = expected_entropy(&s.canonicalize());
    let rows = [
        ("expected entropy (nats)", format!("{h}")),
        ("trace", show(&s.trace())),
        ("canonical columns", s.canonicalize().n_columns().to_string()),
    ];
    Output {
        text: pairs(&rows),
        json: json!({"expected_entropy": h, "trace": s.trace().to_json()}),
    }
}

fn dist_classical<S: JsonScalar>(a: &ClassicalSok<S>, b: &ClassicalSok<S>, d: &DictArgs) -> CliResult<Output> {
    let dict = Dictionary::from_states(&[a, b], &[], 0, d.closure_depth.max(1), d.max_columns)?;
    let r = trace_distance_classical(a, b, &dict, &LpOptions::default())?;
    let rows = [
        ("trace distance", show(&r.value)),
        ("soundness", "upper bound over the dictionary".to_string()),
        ("dictionary columns", dict.len().to_string()),
    ];
    Ok(Output {
        text: pairs(&rows),
        json: json!({"value": r.value.to_json(), "dictionary": dict.len(), "exact": false}),
    })
}

fn dist_quantum(a: &QuantumSok, b: &QuantumSok, psd: bool) -> CliResult<Output> {
    let r = trace_distance_quantum(a, b)?;
    let mut rows = vec![("trace distance", format!("{}", r.value))];
    let mut record = json!({"value": r.value, "exact": true});
    if psd {
        let n = trace_distance_quantum_psd(a, b, &PsdOptions::default())?;
        rows.push(("PSD program", format!("{}", n.value)));
        rows.push(("difference", format!("{:e}", (n.value - r.value).abs())));
        record["psd_value"] = json!(n.value);
    }
    Ok(Output {
        text: pairs(&rows),
        json: record,
    })
}

fn utility<S: Scalar>(u: Option<&Value>, env_labels: &[String]) -> CliResult<PayoffSpec<S>> {
    let Some(u) = u else {
        return Ok(PayoffSpec::guess(env_labels));
    };
    let bad = |m: &str| input(format!("utility file: {m}"));
    let outputs: Vec<String> = u
        .get("outputs")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("`outputs` must be a list of labels"))?
        .iter()
        .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad("output labels must be strings")))
        .collect::<CliResult<_>>()?;
    let rows = u.get("V").and_then(Value::as_array).ok_or_else(|| bad("`V` must be a matrix"))?;
    let v: Vec<Vec<S>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| bad("`V` rows must be arrays"))?
                .iter()
                .map(|x| io::scalar::<S>(x).map_err(|e| input(e.to_string())))
                .collect()
        })
        .collect::<CliResult<_>>()?;
    Ok(PayoffSpec::new(v, outputs)?)
}

fn payoff_classical<S: JsonScalar>(
    s: &ClassicalSok<S>,
    u: Option<&Value>,
    worst: Option<WorstCase>,
) -> CliResult<Output> {
    let s = s.canonicalize();
    let spec = utility::<S>(u, &s.env().labels())?;
    let opts = LpOptions::default();
    let r = match worst {
        None => payoff_average(&s, &spec, &opts)?,
        Some(mode) => payoff_worstcase(&s, &spec, mode, &opts)?,
    };
    let mut headers = vec!["output".to_string()];
    headers.extend((0..s.n_columns()).map(|m| format!("m{m}")));
    let kernel: Vec<Vec<String>> = spec
        .outputs
        .iter()
        .zip(&r.kernel)
        .map(|(c, row)| std::iter::once(c.clone()).chain(row.iter().map(show)).collect())
        .collect();
    let per_e: Vec<Vec<String>> = s
        .env()
        .labels()
        .into_iter()
        .zip(&r.row_payoffs)
        .map(|(l, v)| vec![l, show(v)])
        .collect();
    let text = format!(
        "{}\nkernel\n{}\npayoff per environment state\n{}",
        pairs(&[("payoff", show(&r.value)), ("case", case_name(worst).into())]),
        render(&headers, &kernel),
        render(&strings(&["env", "payoff"]), &per_e)
    );
    Ok(Output {
        text,
        json: json!({
            "value": r.value.to_json(),
            "case": case_name(worst),
            "kernel": r.kernel.iter().map(|row| row.iter().map(JsonScalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "row_payoffs": r.row_payoffs.iter().map(JsonScalar::to_json).collect::<Vec<_>>(),
        }),
    })
}

fn case_name(worst: Option<WorstCase>) -> &'static str {
    match worst {
        None => "average",
        Some(WorstCase::Raw) => "worst",
        Some(WorstCase::PerInput) => "worst, per input",
    }
}

fn payoff_quantum(s: &QuantumSok, u: Option<&Value>, worst: Option<WorstCase>) -> CliResult<Output> {
    let spec = utility::<f64>(u, &s.env().labels())?;
    let opts = PsdOptions::default();
    let r = match worst {
        None => payoff_average_quantum(s, &spec, &opts)?,
        Some(mode) => payoff_worstcase_quantum(s, &spec, mode, &opts)?,
    };
    let rows = [
        ("payoff", format!("{}", r.value)),
        ("case", case_name(worst).into()),
        ("measurement residual", format!("{:e}", r.feasibility_residual)),
    ];
    Ok(Output {
        text: pairs(&rows),
        json: json!({"value": r.value, "case": case_name(worst), "row_payoffs": r.row_payoffs}),
    })
}

struct AdvOpts {
    blockdiag: bool,
    strengthen: bool,
    dict: DictArgs,
    out: PathBuf,
}

fn adv_settings<K: Knowledge, L: Law<K>>(law: &L, states: &[K], o: &AdvOpts) -> CliResult<(QuasiSok<K>, AdvSettings<K>, K)> {
    let env = law.env();
    let start = states[0].with_env(env)?;
    let target = states[1].with_env(env)?;
    let s0 = match states.get(2) {
        Some(s) => s.with_env(env)?,
        None => start.clone(),
    };
    let delta = QuasiSok::new(target, start)?;
    let settings = AdvSettings {
        blockdiag: o.blockdiag,
        s0: Some(s0.clone()),
        strengthen: o.strengthen,
    };
    Ok((delta, settings, s0))
}

fn adv_report<K: Emit>(value: &K::Field, s_tilde: &K, residual: f64, soundness: Soundness, s0: &K, o: &AdvOpts, extra: Vec<(&str, String)>) -> CliResult<Output>
where
    K::Field: JsonScalar,
{
    load::write_json(&o.out, &s_tilde.value())?;
    let tr0 = s0.trace().to_f64();
    let steps = if tr0 > 0.0 {
        (value.to_f64() / tr0 - quasiknow::numerics::eps()).ceil().max(0.0) as usize
    } else {
        0
    };
    let label = match soundness {
        Soundness::Exact => "lower bound",
        Soundness::Truncated => "estimate (dictionary-restricted)",
    };
    let mut rows = vec![
        ("adversary value", show(value)),
        ("soundness", label.to_string()),
        ("steps needed", if o.blockdiag { show(value) } else { steps.to_string() }),
        ("feasibility residual", format!("{residual:e}")),
        ("S̃ trace", show(&s_tilde.trace())),
        ("S̃", o.out.display().to_string()),
    ];
    rows.extend(extra);
    Ok(Output {
        text: pairs(&rows),
        json: json!({
            "value": value.to_json(),
            "soundness": label,
            "steps": steps,
            "residual": residual,
            "s_tilde": o.out.display().to_string(),
        }),
    })
}

fn adv_classical<S: JsonScalar>(law: &quasiknow::evolution::ClassicalLaw<S>, states: &[ClassicalSok<S>], o: &AdvOpts) -> CliResult<Output> {
    let (delta, settings, s0) = adv_settings(law, states, o)?;
    let mults: Vec<ClassicalSok<S>> = (0..law.outputs().size())
        .map(|k| observation_multiplier(law, k))
        .collect::<Result<_, _>>()?;
    let mult_refs: Vec<&ClassicalSok<S>> = mults.iter().collect();
    let dict = Dictionary::from_states(
        &[delta.neg(), delta.pos()],
        &mult_refs,
        o.dict.posterior_depth,
        o.dict.closure_depth,
        o.dict.max_columns,
    )?;
    let r = adversary_classical(&delta, law, &dict, &settings, &LpOptions::default())?;
    adv_report(&r.value, &r.s_tilde, r.feasibility_residual, r.soundness, &s0, o, vec![("dictionary columns", dict.len().to_string())])
}

fn adv_quantum(law: &quasiknow::evolution::QuantumLaw, states: &[QuantumSok], o: &AdvOpts) -> CliResult<Output> {
    let (delta, settings, s0) = adv_settings(law, states, o)?;
    let r = adversary_quantum(&delta, law, &settings, &PsdOptions::default())?;
    adv_report(&r.value, &r.s_tilde, r.feasibility_residual, r.soundness, &s0, o, Vec::new())
}

struct BuildOpts {
    steps: usize,
    idle: String,
    out_dir: PathBuf,
    sweep: Vec<usize>,
    csv: Option<PathBuf>,
}

fn idle_states<K: Knowledge, L: Law<K>>(law: &L, states: &[K], idle: &str) -> CliResult<(K, K, K, K, K)> {
    let env = law.env();
    let idx = output_index(law, idle)?;
    let s_tilde = states[0].with_env(&law.out_env())?;
    let start = states[1].with_env(env)?;
    let target = states[2].with_env(env)?;
    let idle_s = start.tensor_point(law.outputs().clone(), idx)?;
    let idle_r = target.tensor_point(law.outputs().clone(), idx)?;
    Ok((s_tilde, start, target, idle_s, idle_r))
}

/// Error of the representative run and its bound, for one `N'`.
fn representative<S: JsonScalar>(
    law: &quasiknow::evolution::ClassicalLaw<S>,
    states: &[ClassicalSok<S>],
    o: &BuildOpts,
    n: usize,
) -> CliResult<(String, String, f64, f64)> {
    let (s_tilde, _, _, idle_s, idle_r) = idle_states(law, states, &o.idle)?;
    let r = run_universal_classical(law, &s_tilde, &idle_s, &idle_r, n, &LpOptions::default())?;
    Ok((show(&r.error), show(&r.bound), r.error.to_f64(), r.bound.to_f64()))
}

type RepFn<'a> = &'a dyn Fn(usize) -> CliResult<(String, String, f64, f64)>;

fn build_alg<K: Emit, L: Law<K>>(law: &L, states: &[K], o: &BuildOpts, rep: Option<RepFn>) -> CliResult<Output>
where
    K::Field: JsonScalar,
{
    let (s_tilde, start, target, idle_s, idle_r) = idle_states(law, states, &o.idle)?;
    let u = build_universal_algorithm(law, &s_tilde, &start, &target, &idle_s, &idle_r, o.steps)?;
    let mut files = Vec::new();
    let mut writes = vec![("initial.json".to_string(), u.plan.initial.value())];
    for (k, s) in u.plan.steps.iter().enumerate() {
        let name = format!("step_{k}.json");
        files.push(name.clone());
        writes.push((name, s.value()));
    }
    let index = PlanIndex {
        initial: "initial.json".into(),
        steps: files,
        residuals: u.step_residuals.clone(),
        error_bound: u.error_bound.to_json(),
    };
    let max_residual = u.step_residuals.iter().cloned().fold(0.0, f64::max);
    let mut rows = vec![
        ("steps", o.steps.to_string()),
        ("error bound tr S̃/N'", show(&u.error_bound)),
        ("largest step residual", format!("{max_residual:e}")),
        ("plan", o.out_dir.join("plan.json").display().to_string()),
    ];
    let mut record = json!({
        "steps": o.steps,
        "error_bound": u.error_bound.to_json(),
        "plan": o.out_dir.join("plan.json").display().to_string(),
    });
    let mut text = String::new();
    if let Some(rep) = rep {
        let (err, bound, _, _) = rep(o.steps)?;
        rows.push(("simulated error without the extra input", err.clone()));
        record["simulated_error"] = json!(err);
        record["bound"] = json!(bound);
        if !o.sweep.is_empty() {
            let mut t = PlotTable::new(&["n_prime", "error", "bound", "error_times_n_prime"]);
            for &n in &o.sweep {
                let (_, _, e, b) = rep(n)?;
                t.push(vec![n.to_string(), format!("{e}"), format!("{b}"), format!("{}", e * n as f64)]);
            }
            text = format!("\nerror versus steps\n{}", render(&t.headers, &t.rows));
            if let Some(p) = &o.csv {
                emit_plot_data(&t, p)?;
            }
        }
    } else if !o.sweep.is_empty() {
        return Err(domain("the error sweep runs on classical representatives only"));
    }
    for (name, v) in writes {
        load::write_json(&o.out_dir.join(name), &v)?;
    }
    load::write_json(&o.out_dir.join("plan.json"), &index.to_value())?;
    Ok(Output {
        text: format!("{}{text}", pairs(&rows)),
        json: record,
    })
}

struct SimOpts {
    constant: Option<usize>,
    output: Option<String>,
    out: Option<PathBuf>,
}

fn simulate_cmd<K: Emit, L: Law<K>>(law: &L, mut states: Vec<K>, o: &SimOpts) -> CliResult<Output>
where
    K::Field: JsonScalar,
{
    let plan = match o.constant {
        Some(n) => {
            let idx = match &o.output {
                Some(l) => output_index(law, l)?,
                None => 0,
            };
            constant_plan(law, &states[0], n, idx)?
        }
        None => {
            let initial = states.remove(0);
            AlgorithmPlan { initial, steps: states }
        }
    };
    let tr = simulate(&plan, law)?;
    let rows: Vec<Vec<String>> = tr
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let res = if k == 0 { String::new() } else { format!("{:e}", tr.residuals[k - 1]) };
            vec![k.to_string(), show(&s.trace()), res]
        })
        .collect();
    let fin = tr.final_state();
    if let Some(p) = &o.out {
        load::write_json(p, &fin.value())?;
    }
    let summary = [
        ("steps", plan.steps.len().to_string()),
        ("tr S̃", show(&tr.s_tilde.trace())),
        ("tr S̃ <= N tr S0", tr.accumulation_ok.to_string()),
        ("per environment state", tr.per_e_ok.map_or("n/a".into(), |b| b.to_string())),
    ];
    Ok(Output {
        text: format!(
            "{}\n{}\nfinal state\n{}",
            render(&strings(&["k", "trace", "output residual"]), &rows),
            pairs(&summary),
            fin.table()
        ),
        json: json!({
            "steps": plan.steps.len(),
            "traces": tr.states.iter().map(|s| s.trace().to_json()).collect::<Vec<_>>(),
            "residuals": tr.residuals,
            "s_tilde_trace": tr.s_tilde.trace().to_json(),
            "accumulation_ok": tr.accumulation_ok,
            "final": fin.value(),
        }),
    })
}

struct PoissonOpts {
    rt: String,
    k: usize,
    output: Option<String>,
    tol: Option<f64>,
    csv: Option<PathBuf>,
}

/// Exact coefficients as fractions, floats as they are.
fn show_fraction<S: JsonScalar>(x: &S) -> String {
    let s = show(x);
    if S::EXACT {
        parse_rational(&s).map(|r| format_rational(&r)).unwrap_or(s)
    } else {
        s
    }
}

fn poisson<K: Emit, L: Law<K>>(law: &L, s0: &K, o: &PoissonOpts) -> CliResult<Output>
where
    K::Field: JsonScalar,
{
    let idx = match &o.output {
        Some(l) => output_index(law, l)?,
        None => 0,
    };
    let rt = K::Field::parse_decimal(&o.rt).map_err(|e| input(e.to_string()))?;
    let a: K = observation_multiplier(law, idx)?;
    let s0 = s0.with_env(law.env())?;
    let series = poisson_series(&a, &s0, SeriesTruncation { k: o.k, rt }, o.tol)?;
    let pre = series.prefactor();
    let rt_label = show_fraction(&series.truncation.rt);
    let mut plot = PlotTable::new(&["k", "coefficient", "power_trace", "term_trace"]);
    let mut rows = Vec::new();
    for (k, (c, t)) in series.coefficients.iter().zip(&series.power_traces).enumerate() {
        let value = pre * c.to_f64();
        rows.push(vec![
            k.to_string(),
            format!("e^-{rt_label} * {}", show_fraction(c)),
            format!("{value:.12e}"),
            show_fraction(t),
        ]);
        plot.push(vec![
            k.to_string(),
            format!("{value}"),
            format!("{}", t.to_f64()),
            format!("{}", value * t.to_f64()),
        ]);
    }
    if let Some(p) = &o.csv {
        emit_plot_data(&plot, p)?;
    }
    let tr0 = s0.trace().to_f64();
    let total = series.total_trace();
    let summary = [
        ("trace S(0)", format!("{tr0}")),
        ("truncated total trace", format!("{total}")),
        ("tail bound", format!("{:e}", series.tail_bound)),
        ("dropped trace", format!("{:e}", tr0 - total)),
    ];
    Ok(Output {
        text: format!(
            "{}\n{}",
            render(&strings(&["k", "coefficient", "value", "tr(A^k S0)"]), &rows),
            pairs(&summary)
        ),
        json: json!({
            "rt": series.truncation.rt.to_json(),
            "K": o.k,
            "prefactor": pre,
            "coefficients": series.coefficients.iter().map(JsonScalar::to_json).collect::<Vec<_>>(),
            "power_traces": series.power_traces.iter().map(JsonScalar::to_json).collect::<Vec<_>>(),
            "total_trace": total,
            "tail_bound": series.tail_bound,
        }),
    })
}

fn coin(
    bias: &str,
    prior: &[String],
    flips: usize,
    out_dir: Option<&Path>,
    max_n: usize,
    csv: Option<&Path>,
) -> CliResult<Output> {
    let num = |s: &str| parse_rational(s).map_err(|e| input(e.to_string()));
    let bias = num(bias)?;
    let prior: Vec<Rational> = prior.iter().map(|p| num(p)).collect::<CliResult<_>>()?;
    let c = coin_scenario(bias.clone(), &prior)?;
    let state = c.after_flips(flips)?.canonicalize();
    let mut text = format!(
        "one-flip multiplier Q\n{}\nprior\n{}\nafter {flips} flips (canonical)\n{}",
        table::classical(&c.q),
        table::classical(&c.s0),
        table::classical(&state)
    );
    let mut record = json!({"after_flips": io::classical_to_value(&state)});

    let half = Rational::from_ratio(1, 2);
    if bias == Rational::from_ratio(3, 5) && prior == [half.clone(), half] {
        let g = coin_golden();
        let matches = |n: usize, rows: &[Vec<Rational>]| -> CliResult<bool> {
            Ok(c.after_flips(n)?.canonical_eq(&ClassicalSok::from_rows(&c.env, rows)?))
        };
        let lazy = lazy_observation(&c.q, &Rational::from_ratio(1, 4))?;
        let checks = [
            ("one flip", matches(1, &g.p1)?),
            ("two flips, ordered", matches(2, &g.p2)?),
            ("two flips, counted", matches(2, &g.p2_prime)?),
            ("lazy observation", lazy.to_rows() == g.lazy),
        ];
        let rows: Vec<(&str, String)> = checks.iter().map(|(k, v)| (*k, if *v { "ok" } else { "MISMATCH" }.to_string())).collect();
        text.push_str(&format!("\nreference values\n{}", pairs(&rows)));
        record["reference_ok"] = json!(checks.iter().all(|(_, v)| *v));
    }

    let mut plot = PlotTable::new(&["n", "average", "worst", "worst_per_input"]);
    let mut shown = Vec::new();
    let opts = LpOptions::default();
    let spec = PayoffSpec::guess(&c.env.labels());
    for n in 0..=max_n {
        let s = c.after_flips(n)?.canonicalize();
        let avg = payoff_average(&s, &spec, &opts)?.value;
        let raw = payoff_worstcase(&s, &spec, WorstCase::Raw, &opts)?.value;
        let per = payoff_worstcase(&s, &spec, WorstCase::PerInput, &opts)?.value;
        shown.push(vec![n.to_string(), show(&avg), show(&raw), show(&per)]);
        plot.push(vec![
            n.to_string(),
            format!("{}", avg.to_f64()),
            format!("{}", raw.to_f64()),
            format!("{}", per.to_f64()),
        ]);
    }
    text.push_str(&format!(
        "\nguessing payoff after n flips\n{}",
        render(&strings(&["n", "average", "worst", "worst per input"]), &shown)
    ));
    if let Some(p) = csv {
        emit_plot_data(&plot, p)?;
    }
    if let Some(dir) = out_dir {
        load::write_json(&dir.join("law.json"), &io::classical_law_to_value(&c.law))?;
        load::write_json(&dir.join("s0.json"), &io::classical_to_value(&c.s0))?;
        load::write_json(&dir.join("q.json"), &io::classical_to_value(&c.q))?;
        load::write_json(&dir.join(format!("after_{flips}.json")), &io::classical_to_value(&state))?;
    }
    record["payoff"] = json!(shown);
    Ok(Output { text, json: record })
}
