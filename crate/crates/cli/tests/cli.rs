use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use maxmin_core::harness::{negative_gadget_cds, x_fixture_cds};
use maxmin_core::render::layer_count;
use serde_json::Value;

const FIG1: &str = "c fig 1\np cnf 4 3\n1 2 -3 0\n-2 3 -4 0\n-1 2 4 0\n";

fn maxmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxmin")).args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn compile_figure_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("fig1.cnf");
    fs::write(&cnf, FIG1).unwrap();
    let out = dir.path().join("out");
    let o = maxmin(&["compile", p(&cnf), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout_json(&o);
    assert_eq!(summary["stabbers"], 27);
    assert_eq!(summary["targets"], 21);
    for f in ["cds.json", "cert.json", "points.json"] {
        assert!(out.join(f).exists());
    }

    let svg = dir.path().join("fig.svg");
    let cds = out.join("cds.json");
    let cert = out.join("cert.json");
    let o = maxmin(&["render", p(&cds), "--cert", p(&cert), "--out", p(&svg)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(layer_count(&text, "even", "line") + layer_count(&text, "odd", "line"), 18);
    assert_eq!(layer_count(&text, "clause", "line"), 9);
    assert_eq!(layer_count(&text, "targets", "circle"), 21);
    let again = maxmin(&["render", p(&cds), "--cert", p(&cert)]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);

    let o = maxmin(&["solve", p(&cds), "--mode", "cds", "--cert", p(&cert)]);
    assert_eq!(stdout_json(&o)["status"], "feasible");

    let o = maxmin(&["render", p(&out.join("points.json"))]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(layer_count(&text, "pairs", "circle"), 2 * 21);
}

#[test]
fn compile_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("f.cnf");
    fs::write(&cnf, "p cnf 2 1\n1 -2 0\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(maxmin(&["compile", p(&cnf), "--out", p(&a)]).status.success());
    assert!(maxmin(&["compile", p(&cnf), "--out", p(&b)]).status.success());
    for f in ["cds.json", "cert.json", "points.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn gap_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("f.cnf");
    fs::write(&cnf, "p cnf 2 1\n1 -2 0\n").unwrap();
    let o = maxmin(&["compile", p(&cnf), "--gap", "n^2", "--out", p(dir.path())]);
    assert!(o.status.success());
    let pi: maxmin_core::reduction::PointInstance =
        serde_json::from_str(&fs::read_to_string(dir.path().join("points.json")).unwrap()).unwrap();
    let n = num_bigint::BigInt::from(pi.len());
    let bound = maxmin_core::geom::Rational::from_integer(n.pow(4));
    assert!(&pi.delta_sq / &pi.epsilon_sq > bound);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cnf");
    fs::write(&bad, "p cnf 2 1\n1 x 0\n").unwrap();
    assert_eq!(maxmin(&["compile", p(&bad)]).status.code(), Some(2));
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"kind\": 3}").unwrap();
    assert_eq!(maxmin(&["render", p(&junk)]).status.code(), Some(2));
    let bad_gap = dir.path().join("ok.cnf");
    fs::write(&bad_gap, "p cnf 1 1\n1 0\n").unwrap();
    assert_eq!(maxmin(&["compile", p(&bad_gap), "--gap", "n^x", "--out", p(dir.path())]).status.code(), Some(2));
    let crossing = dir.path().join("crossing.cnf");
    let hints = "c layout clause 1 side=above order=1\nc layout clause 2 side=above order=1\n";
    fs::write(&crossing, format!("{hints}p cnf 4 2\n1 3 0\n2 4 0\n")).unwrap();
    let o = maxmin(&["compile", p(&crossing), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!stdout_json(&o)["defects"].as_array().unwrap().is_empty());
}

#[test]
fn solve_modes() {
    let dir = tempfile::tempdir().unwrap();
    let square = dir.path().join("square.json");
    fs::write(&square, r#"[["0","0"],["1","0"],["1","1"],["0","1"]]"#).unwrap();
    let o = maxmin(&["solve", p(&square), "--mode", "maxmin"]);
    assert_eq!(stdout_json(&o)["optimum_sq"], "1/1");

    let x = dir.path().join("x.json");
    fs::write(&x, serde_json::to_string(&x_fixture_cds()).unwrap()).unwrap();
    let o = maxmin(&["solve", p(&x), "--mode", "cds"]);
    assert_eq!(stdout_json(&o)["chosen"].as_array().unwrap().len(), 1);

    let neg = dir.path().join("neg.json");
    fs::write(&neg, serde_json::to_string(&negative_gadget_cds()).unwrap()).unwrap();
    let o = maxmin(&["solve", p(&neg), "--mode", "cds"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["status"], "infeasible");

    let unsat = dir.path().join("unsat.cnf");
    fs::write(&unsat, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let o = maxmin(&["solve", p(&unsat), "--mode", "sat"]);
    assert_eq!(stdout_json(&o)["status"], "infeasible");

    let out = dir.path().join("sol.json");
    let o = maxmin(&["solve", p(&square), "--mode", "maxmin", "--out", p(&out)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 5);
}

#[test]
fn point_cap_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let square = dir.path().join("square.json");
    fs::write(&square, r#"[["0","0"],["1","0"],["1","1"],["0","1"]]"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_maxmin"))
        .args(["solve", p(&square), "--mode", "maxmin"])
        .env("MAXMIN_POINT_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains('3'));
}

#[test]
fn verify_reports() {
    let o = maxmin(&["verify", "--seeds", "30"]);
    assert!(o.status.success());
    let lines: Vec<Value> = o.stdout.split(|&b| b == b'\n').filter(|l| !l.is_empty()).map(|l| serde_json::from_slice(l).unwrap()).collect();
    assert_eq!(lines.len(), 30);
    assert!(lines.iter().all(|r| r["consistent"] == true));

    let dir = tempfile::tempdir().unwrap();
    let fig = dir.path().join("fig1.cnf");
    fs::write(&fig, FIG1).unwrap();
    let o = maxmin(&["verify", p(&fig)]);
    let r = stdout_json(&o);
    assert_eq!(r["consistent"], true);
    assert_eq!(r["triangulation_feasible"], Value::Null);

    let unsat = dir.path().join("unsat.cnf");
    fs::write(&unsat, "p cnf 2 3\n1 2 0\n-1 0\n-2 0\n").unwrap();
    let r = stdout_json(&maxmin(&["verify", p(&unsat)]));
    assert_eq!((r["sat"].clone(), r["cds_feasible"].clone(), r["consistent"].clone()), (false.into(), false.into(), true.into()));
}

#[test]
fn empty_instance_renders_blank_canvas() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("empty.json");
    fs::write(&f, r#"{"stabbers": [], "targets": []}"#).unwrap();
    let o = maxmin(&["render", p(&f)]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().ends_with("</svg>\n"));
}
