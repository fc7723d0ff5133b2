use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario(name: &str) -> String {
    scenarios().join(name).display().to_string()
}

fn qk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("qk runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\n{}\n{}",
        o.status.code(),
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn canonical_output_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(qk(dir.path(), &["canon", &scenario("coin_p2prime.json")]));
    let golden = std::fs::read_to_string(scenarios().join("golden/coin_p2prime.canon.json")).unwrap();
    assert_eq!(out, golden);
}

#[test]
fn canonical_files_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["coin_p2.json", "coin_q.json", "qubit_plus.json", "qubit_zero.json"] {
        let first = ok(qk(dir.path(), &["canon", &scenario(name), "--out", "c.json"]));
        let second = ok(qk(dir.path(), &["canon", "c.json"]));
        assert_eq!(first, second, "{name}");
    }
}

#[test]
fn order_on_the_coin_pair_writes_a_checkable_witness() {
    let dir = tempfile::tempdir().unwrap();
    let (counted, ordered) = (scenario("coin_p2prime.json"), scenario("coin_p2.json"));
    let out = ok(qk(dir.path(), &["leq", &counted, &ordered, "--witness", "w.json"]));
    assert!(out.starts_with("true\n"));
    let out = ok(qk(dir.path(), &["leq", &counted, &ordered, "--verify", "w.json"]));
    assert!(out.starts_with("valid"));
    let t2 = scenario("coin_t2.json");
    let t2p = scenario("coin_t2prime.json");
    ok(qk(dir.path(), &["leq", &counted, &ordered, "--verify", &t2]));
    ok(qk(dir.path(), &["leq", &ordered, &counted, "--verify", &t2p]));
    // A witness for the wrong direction is rejected.
    let bad = qk(dir.path(), &["leq", &ordered, &counted, "--verify", &t2]);
    assert_eq!(bad.status.code(), Some(2), "{}", String::from_utf8_lossy(&bad.stderr));
}

#[test]
fn equivalence_and_strict_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(qk(dir.path(), &["equiv", &scenario("coin_p2.json"), &scenario("coin_p2prime.json")]));
    assert!(out.starts_with("true\n"));
    assert!(dir.path().join("witness_ab.json").exists());
    let out = ok(qk(dir.path(), &["leq", &scenario("coin_s0.json"), &scenario("coin_p2.json")]));
    assert!(out.starts_with("true\n"));
    let out = ok(qk(dir.path(), &["leq", &scenario("coin_p2.json"), &scenario("coin_s0.json")]));
    assert!(out.starts_with("false\n"));
}

#[test]
fn poisson_table_shows_exact_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(qk(
        dir.path(),
        &[
            "poisson",
            "--rt",
            "1",
            "--K",
            "20",
            &scenario("coin_law.json"),
            &scenario("coin_s0.json"),
            "--csv",
            "p.csv",
        ],
    ));
    let row = out.lines().find(|l| l.starts_with("2 ")).unwrap();
    assert!(row.contains("e^-1 * 1/2"), "{row}");
    let coeff = csv_column(&dir.path().join("p.csv"), "coefficient");
    assert_eq!(coeff.len(), 21);
    assert!((coeff[2] - (-1f64).exp() / 2.0).abs() < 1e-15);
}

#[test]
fn coin_payoff_table_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(qk(dir.path(), &["scenario", "coin", "--csv", "pay.csv", "--out-dir", "coin"]));
    assert!(!out.contains("MISMATCH"));
    let avg = csv_column(&dir.path().join("pay.csv"), "average");
    assert!(avg.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(avg[1], 0.6);
    assert!((avg[3] - 0.648).abs() < 1e-12);
    assert!(dir.path().join("coin/law.json").exists());
}

#[test]
fn adversary_plan_and_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (law, s0) = (scenario("coin_law.json"), scenario("coin_s0.json"));
    let target = scenario("coin_p2prime.json");
    let out = ok(qk(d, &["adv", &law, &s0, &target, "--out", "st.json", "--json", "adv.json"]));
    assert!(out.contains("adversary value:"));
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("adv.json")).unwrap()).unwrap();
    assert_eq!(record["steps"], 2);

    ok(qk(
        d,
        &["build-alg", &law, "st.json", &s0, &target, "--steps", "10", "--sweep", "2,10,100", "--csv", "err.csv"],
    ));
    let err = csv_column(&d.join("err.csv"), "error");
    let bound = csv_column(&d.join("err.csv"), "bound");
    let n = [2.0, 10.0, 100.0];
    for i in 0..3 {
        assert!(err[i] <= bound[i] + 1e-12);
        assert!((err[i] * n[i] - err[0] * n[0]).abs() < 1e-9, "error is not proportional to 1/N'");
    }
    let out = ok(qk(d, &["simulate", &law, "--plan", "plan/plan.json"]));
    assert!(out.contains("tr S̃ <= N tr S0:       true"), "{out}");
}

#[test]
fn quantum_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let (plus, zero) = (scenario("qubit_plus.json"), scenario("qubit_zero.json"));
    let out = ok(qk(dir.path(), &["dist", &plus, &zero, "--psd"]));
    assert!(out.contains("trace distance:  1.414213562373095"), "{out}");
    let out = ok(qk(dir.path(), &["payoff", &plus, "--guess"]));
    let value: f64 = out.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((value - 0.5).abs() < 1e-6, "{out}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(qk(d, &["canon", "missing.json"]).status.code(), Some(2));
    std::fs::write(d.join("broken.json"), "{").unwrap();
    assert_eq!(qk(d, &["canon", "broken.json"]).status.code(), Some(2));
    assert_eq!(qk(d, &["no-such-verb"]).status.code(), Some(2));
    // Well-formed but mathematically rejected: the observing output is not idle.
    let law = scenario("coin_law.json");
    let s0 = scenario("coin_s0.json");
    let target = scenario("coin_p2.json");
    ok(qk(d, &["adv", &law, &s0, &target, "--out", "st.json"]));
    let r = qk(d, &["build-alg", &law, "st.json", &s0, &target, "--idle", "observe"]);
    assert_eq!(r.status.code(), Some(1), "{}", String::from_utf8_lossy(&r.stderr));
    let r = qk(d, &["entropy", &scenario("qubit_plus.json")]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn interrupt_exits_130() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_qk"))
        .args([
            "simulate",
            &scenario("coin_law.json"),
            "--s0",
            &scenario("coin_s0.json"),
            "--steps",
            "1000000",
        ])
        .current_dir(dir.path())
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    std::thread::sleep(std::time::Duration::from_millis(500));
    let killed = Command::new("kill")
        .args(["-INT", &child.id().to_string()])
        .status()
        .unwrap();
    assert!(killed.success());
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(130));
}
