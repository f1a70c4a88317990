use std::path::PathBuf;
use std::process::{Command, Output};

use deligne::delignedata::ManifoldData;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/manifolds").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deligne")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn classify_circle_and_levels() {
    let o = run(&["classify", &path("s1.json")]);
    assert!(o.status.success());
    assert!(stdout(&o).trim_end().ends_with("total 2"), "{}", stdout(&o));
    let o = run(&["classify", &path("s1.json"), "--level", "2"]);
    assert!(stdout(&o).trim_end().ends_with("total 4"));
}

#[test]
fn classify_corpus_totals() {
    for (file, total) in [
        ("s2xs3.json", 2),
        ("rp5.json", 2),
        ("rp5xS.json", 4),
        ("battery/b2_z3xz3.json", 4),
        ("battery/b0_z6.json", 4),
        ("battery/b3_z2_z4xz4.json", 64),
    ] {
        let o = run(&["classify", &path(file)]);
        assert!(o.status.success(), "{file}: {}", stderr(&o));
        assert!(stdout(&o).trim_end().ends_with(&format!("total {total}")), "{file}: {}", stdout(&o));
    }
}

#[test]
fn classify_json_parses_back() {
    let o = run(&["classify", &path("rp5xS.json"), "--json"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["count"], 4);
    assert_eq!(v["classes"].as_array().unwrap().len(), 4);
    let back = ManifoldData::from_json_str(&text).unwrap();
    let orig = ManifoldData::from_json_str(&std::fs::read_to_string(data("rp5xS.json")).unwrap()).unwrap();
    assert_eq!(back, orig);
}

#[test]
fn irreps_of_rp5() {
    let o = run(&["irreps", &path("rp5.json"), "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["dim"] == 1));
}

#[test]
fn equivalence_of_circle_labels() {
    let o = run(&["equiv", &path("s1.json"), "--label1", "0:0", "--label2", "2:0"]);
    assert!(stdout(&o).contains("are equivalent"));
    let o = run(&["equiv", &path("s1.json"), "--label1", "0:0", "--label2", "-1:0"]);
    assert!(stdout(&o).contains("not equivalent"));
}

#[test]
fn transport_twists_odd_lambda() {
    let o = run(&["transport", &path("rp5xS.json"), "--theta", "1", "--label", "1:1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("1:1 -> 1:0"), "{}", stdout(&o));
    let o = run(&["transport", &path("rp5xS.json"), "--theta", "0", "--label", "1:1"]);
    assert!(stdout(&o).starts_with("1:1 -> 1:1"));
}

#[test]
fn invalid_input_exits_one() {
    let o = run(&["validate", &path("invalid/bad_sigma.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("do not sum to zero"));
    let o = run(&["classify", &path("invalid/bad_rational.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
    let o = run(&["classify", &path("missing.json")]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["transport", &path("rp5xS.json"), "--theta", "1;1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_accepts_corpus() {
    for f in ["s1.json", "s2xs3.json", "rp5.json", "rp5xS.json", "battery/b3_z2_z4xz4.json"] {
        let o = run(&["validate", &path(f)]);
        assert!(o.status.success(), "{f}: {}", stderr(&o));
    }
}

#[test]
fn selftest_suites_pass() {
    let o = run(&["selftest", "--suite", "finheis", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = run(&["selftest", "--suite", "fock", "--trials", "500", "--tol", "1e-8"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn tampered_selftest_exits_two() {
    let o = run(&["selftest", "--suite", "all", "--trials", "5", "--tamper"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("fock/") && err.contains("seed 0"), "{err}");
}

#[test]
fn induced_selftest_with_flags() {
    let o = run(&["induced-selftest", "--radius", "3", "--modes", "1", "--trials", "10", "--round-trips", "2", "--seed", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = run(&["induced-selftest", "--radius", "2", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn selftest_is_deterministic() {
    let a = stdout(&run(&["selftest", "--suite", "spectral", "--seed", "11", "--trials", "20", "--json"]));
    let b = stdout(&run(&["selftest", "--suite", "spectral", "--seed", "11", "--trials", "20", "--json"]));
    assert_eq!(a, b);
}
