use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const K4: &str = "graph k4
edge e0 a b 1
edge e1 a c 1
edge e2 a d 1
edge e3 b c 1
edge e4 b d 1
edge e5 c d 1
";

const B3: &str = "graph b3
edge e0 u v 1
edge e1 u v 2
edge e2 u v 3
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropdiv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap().trim().to_string()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn genus_and_canonical() {
    let dir = TempDir::new().unwrap();
    let k4 = file(&dir, "k4.graph", K4);
    let o = run(&["genus", s(&k4)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3");
    assert_eq!(stdout(&run(&["canonical", s(&k4)])), "v:a,v:b,v:c,v:d");
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.graph");
    let o = run(&["genus", s(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
    let k4 = file(&dir, "k4.graph", K4);
    assert_eq!(run(&["rank", s(&k4), "v:zz"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let bad = file(&dir, "bad.graph", "graph x\nedge e0 a b -1\n");
    assert_eq!(run(&["genus", s(&bad)]).status.code(), Some(2));
}

#[test]
fn rank_certificate_round_trip() {
    let dir = TempDir::new().unwrap();
    let k4 = file(&dir, "k4.graph", K4);
    let cert = dir.path().join("cert.json");
    for method in ["subdivide", "rds", "both"] {
        let o = run(&["--method", method, "rank", s(&k4), "v:a,v:b,v:c", "--cert", s(&cert)]);
        assert_eq!(stdout(&o), "1", "method {method}");
    }
    let o = run(&["verify-cert", s(&k4), s(&cert)]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "verified"));

    let mut wire: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    wire["rank"] = Value::from(2);
    std::fs::write(&cert, wire.to_string()).unwrap();
    let o = run(&["verify-cert", s(&k4), s(&cert)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("rejected"));
}

#[test]
fn divisor_files_are_accepted() {
    let dir = TempDir::new().unwrap();
    let b3 = file(&dir, "b3.graph", B3);
    let d = file(&dir, "d.div", "# u + v\nchip v:u 1\nchip v:v 1\n");
    assert_eq!(stdout(&run(&["rank", s(&b3), s(&d)])), "1");
}

#[test]
fn reduction_commands() {
    let dir = TempDir::new().unwrap();
    let k4 = file(&dir, "k4.graph", K4);
    let o = run(&["reduce", s(&k4), "2*v:a,-1*v:b", "--sink", "v:c", "--finite"]);
    let text = stdout(&o);
    let (reduced, script) = text.split_once('\n').unwrap();
    let script: Value = serde_json::from_str(script).unwrap();
    assert_eq!(script["c"], Value::from(0));
    assert_eq!(stdout(&run(&["is-reduced", s(&k4), reduced, "--at", "v:c", "--finite"])), "true");
    assert_eq!(stdout(&run(&["is-reduced", s(&k4), "3*v:a", "--at", "v:c"])), "false");

    let circle = file(&dir, "c.graph", "graph circle\nedge e0 o o 1\n");
    assert_eq!(stdout(&run(&["reduce", s(&circle), "e:e0@1/4,e:e0@1/2", "--sink", "v:o"])), "v:o,e:e0@3/4");
}

#[test]
fn equivalence_commands() {
    let dir = TempDir::new().unwrap();
    let b3 = file(&dir, "b3.graph", B3);
    assert_eq!(stdout(&run(&["equiv", s(&b3), "2*v:u", "2*v:v"])), "false");
    assert_eq!(stdout(&run(&["equiv", s(&b3), "e:e0@1/2,e:e0@1/2", "v:u,v:v"])), "true");
    let o = run(&["witness", s(&b3), "v:u,v:v", "e:e0@1/2,e:e0@1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let f: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(f["edges"].as_array().unwrap().len(), 3);
    assert_eq!(run(&["witness", s(&b3), "v:u", "v:v"]).status.code(), Some(2));
    assert_eq!(stdout(&run(&["aj", s(&b3), "v:u", "--base", "v:u"])), "[0/1, 0/1]");
}

#[test]
fn riemann_roch_and_clifford_check() {
    let dir = TempDir::new().unwrap();
    let k4 = file(&dir, "k4.graph", K4);
    let o = run(&["riemann-roch", s(&k4), "v:a,v:b"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("holds"));
    let o = run(&["--json", "clifford-check", s(&k4), "v:a,v:b"]);
    let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep["checks"][0]["passed"], Value::Bool(true));
    assert_eq!(rep["checks"][0]["detail"]["rank"], Value::from(0));
}

#[test]
fn hyperellipticity() {
    let dir = TempDir::new().unwrap();
    let k4 = file(&dir, "k4.graph", K4);
    let b3 = file(&dir, "b3.graph", B3);
    assert_eq!(stdout(&run(&["hyperelliptic", s(&k4)])), "false");
    assert_eq!(stdout(&run(&["find-g12", s(&k4)])), "none");
    assert_eq!(stdout(&run(&["hyperelliptic", s(&b3)])), "true");
    let o = run(&["find-g12", s(&b3)]);
    let cert = file(&dir, "g12.json", &stdout(&o));
    let o = run(&["verify-cert", s(&b3), s(&cert)]);
    assert_eq!(stdout(&o), "verified");
    let circle = file(&dir, "c.graph", "graph circle\nedge e0 o o 1\n");
    assert_eq!(run(&["find-g12", s(&circle)]).status.code(), Some(2));
}

#[test]
fn generators_write_models() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("h.graph");
    let o = run(&["gen", "hyperelliptic", "--genus", "4", "--seed", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&run(&["genus", s(&out)])), "4");
    assert_eq!(stdout(&run(&["hyperelliptic", s(&out)])), "true");

    let n = dir.path().join("n.graph");
    run(&["gen", "nonhyperelliptic", "--genus", "4", "--seed", "3", "--out", s(&n)]);
    assert_eq!(stdout(&run(&["genus", s(&n)])), "4");
    assert_eq!(stdout(&run(&["hyperelliptic", s(&n)])), "false");
    assert_eq!(run(&["gen", "nonhyperelliptic", "--genus", "2"]).status.code(), Some(2));

    let tree = file(&dir, "t.graph", "graph t\nedge a x y 1\nedge b y z 2\nedge c y w 1\n");
    let cover = dir.path().join("cover.graph");
    run(&["gen", "cover", s(&tree), "--doubled", "a,b,c", "--out", s(&cover)]);
    assert_eq!(stdout(&run(&["genus", s(&cover)])), "2");
}

#[test]
fn clifford_verify_reports() {
    let dir = TempDir::new().unwrap();
    let n = dir.path().join("n.graph");
    run(&["gen", "nonhyperelliptic", "--genus", "5", "--seed", "1", "--out", s(&n)]);
    let args = ["--json", "--seed", "7", "clifford-verify", s(&n), "--trials", "50"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let strip = |o: &Output| {
        let mut v: Value = serde_json::from_str(&stdout(o)).unwrap();
        v.as_object_mut().unwrap().remove("timing_ms");
        v
    };
    let first = strip(&a);
    assert_eq!(first, strip(&run(&args)));
    assert_eq!(first["seed"], Value::from(7));
    assert_eq!(first["checks"][0]["detail"]["counterexamples"], Value::Array(vec![]));

    let k4 = file(&dir, "k4.graph", K4);
    assert_eq!(run(&["clifford-verify", s(&k4)]).status.code(), Some(2));
    let h = dir.path().join("h.graph");
    run(&["gen", "hyperelliptic", "--genus", "4", "--out", s(&h)]);
    let o = run(&["clifford-verify", s(&h)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("g12 "));
}
