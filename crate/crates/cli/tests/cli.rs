use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qresource"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn values(report: &Value) -> Vec<(String, f64)> {
    report["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["measure"].as_str().unwrap().to_string(), r["value"].as_f64().unwrap()))
        .collect()
}

#[test]
fn bell_file_all_measures() {
    let bell = fixture("bell.json");
    let out = run(&["measure", bell.to_str().unwrap(), "--measure", "all", "--kind", "relative-entropy", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["config"]["restarts"], 16);
    for (name, v) in values(&report) {
        let expected = if name == "coherence" { 0.0 } else { 1.0 };
        assert!((v - expected).abs() < 1e-6, "{name} = {v}");
    }
    assert_eq!(report["results"][1]["bound_type"], "exact");
}

#[test]
fn iq_file_gives_zero_bd() {
    let iq = fixture("iq.json");
    for kind in ["relative-entropy", "l1"] {
        let out = run(&["measure", iq.to_str().unwrap(), "--measure", "bd", "--kind", kind, "--json"]);
        assert_eq!(out.status.code(), Some(0));
        let v = values(&json(&out));
        assert_eq!(v.len(), 1);
        assert!(v[0].1.abs() < 1e-10, "{kind}: {}", v[0].1);
    }
    let out = run(&["measure", iq.to_str().unwrap(), "--measure", "discord", "--json"]);
    assert!(values(&json(&out))[0].1 < 1e-6);
}

#[test]
fn single_party_coherence() {
    let plus = fixture("plus_single.json");
    let out = run(&["measure", plus.to_str().unwrap(), "--measure", "coherence", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["dims"], serde_json::json!([2, 1]));
    assert!((values(&report)[0].1 - 1.0).abs() < 1e-9);
}

#[test]
fn text_output_is_a_table() {
    let bell = fixture("bell.json");
    let out = run(&["measure", bell.to_str().unwrap(), "--measure", "bd"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("bd") && l.contains("exact")), "{text}");
}

#[test]
fn invalid_states_exit_2() {
    for (name, needle) in [
        ("trace_0_9.json", "trace"),
        ("non_hermitian.json", "hermiticity"),
        ("malformed.json", ""),
        ("does_not_exist.json", ""),
    ] {
        let path = fixture(name);
        let out = run(&["measure", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(needle), "{name}: {err}");
    }
    let trace = fixture("trace_0_9.json");
    let err = String::from_utf8(run(&["measure", trace.to_str().unwrap()]).stderr).unwrap();
    assert!(err.contains("0.0999") || err.contains("0.1"), "{err}");
}

#[test]
fn bad_flags_exit_2() {
    let bell = fixture("bell.json");
    assert_eq!(run(&["measure", bell.to_str().unwrap(), "--restarts", "0"]).status.code(), Some(2));
    assert_eq!(run(&["measure", bell.to_str().unwrap(), "--kind", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["axioms", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(run(&["qkd", "--bell-diagonal", "-0.1", "0.0"]).status.code(), Some(2));
    assert_eq!(run(&["demo", "--criteria", "42"]).status.code(), Some(2));
}

#[test]
fn qkd_reports() {
    let out = run(&["qkd", "--bell-diagonal", "0.05", "0.05", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!((r["key_rate"].as_f64().unwrap() - 0.427206).abs() < 1e-6);
    assert!(r["consistency_gap"].as_f64().unwrap() < 1e-8);
    assert!((r["s_za_e"].as_f64().unwrap() - r["s_za_e_purified"].as_f64().unwrap()).abs() < 1e-8);

    let out = run(&["qkd", "--bell-diagonal", "0", "0", "--json"]);
    assert!((json(&out)["key_rate"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let bell = fixture("bell.json");
    let out = run(&["qkd", bell.to_str().unwrap(), "--json"]);
    assert!((json(&out)["key_rate"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn axiom_suites() {
    let out = run(&["axioms", "--suite", "lemmas", "--trials", "50", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["trials"], 50);

    let out = run(&["axioms", "--suite", "bd", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["axioms", "--suite", "bd", "--trials", "20", "--adversarial", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let ooc = r["out_of_class"].as_array().unwrap();
    assert!(!ooc.is_empty());
    assert!(ooc.iter().all(|o| o["after"].as_f64() > o["before"].as_f64()));
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["axioms", "--suite", "coherence", "--trials", "20", "--seed", "5", "--json"]);
    let b = run(&["axioms", "--suite", "coherence", "--trials", "20", "--seed", "5", "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn demo_rows() {
    let out = run(&["demo", "--criteria", "1,7,8", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["pass"] == true));
    assert_eq!(rows[2]["checks"][1]["expected"], "0.427206");

    let out = run(&["demo", "--criteria", "8"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"), "{text}");
}

#[test]
fn failing_criterion_exits_1() {
    // the entrywise l1 measure is not invariant under unitaries on B
    let out = run(&["demo", "--criteria", "3", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = json(&out);
    assert_eq!(rows[0]["checks"][0]["pass"], true);
    assert_eq!(rows[0]["checks"][1]["pass"], false);
}

#[test]
fn matches_library_on_random_state() {
    use qresource::measures::{bd_l1_closed_form, bd_relative_entropy};
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.json");
    let rho = qresource::Sampler::new(21).bipartite(3, 2, 5);
    qresource::io::write_state_file(&path, &rho).unwrap();
    for (kind, expected) in [
        ("relative-entropy", bd_relative_entropy(&rho).value),
        ("l1", bd_l1_closed_form(&rho).value),
    ] {
        let out = run(&["measure", path.to_str().unwrap(), "--measure", "bd", "--kind", kind, "--json"]);
        assert_eq!(values(&json(&out))[0].1, expected);
    }
}
