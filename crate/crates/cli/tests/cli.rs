use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phi-convex"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("PHI_CONVEX_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write_csv(path: &Path, rows: &[(f64, f64)]) {
    let mut s = String::from("x,value\n");
    for (x, v) in rows {
        s.push_str(&format!("{x},{v}\n"));
    }
    std::fs::write(path, s).unwrap();
}

/// Nodes of (0, 1) with `n` interior points.
fn nodes(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

#[test]
fn analyze_convex_entry_holds() {
    let o = run(&["analyze", "--function", "catalog:power:2", "--error", "zero", "--a", "-1", "--b", "1", "--n", "31"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], "phi-convex/1");
    assert_eq!(v["verdict"], "holds");
    assert_eq!(v["checks"]["convex_definitional"]["verdict"], "holds");
    assert_eq!(v["slope_certificate"]["built"], true);
    assert_eq!(v["slope_certificate"]["star_monotone"]["verdict"], "holds");
}

#[test]
fn analyze_concave_entry_is_violated() {
    let o = run(&["analyze", "--function", "catalog:concave", "--error", "zero", "--n", "15"]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["verdict"], "fails");
    assert_eq!(v["checks"]["convex"]["witness"]["kind"], "triple");
    assert_eq!(v["slope_certificate"]["built"], false);
}

#[test]
fn usage_and_help() {
    assert_eq!(code(&run(&["analyze", "--bogus"])), 1);
    assert_eq!(code(&run(&["analyze", "--function", "catalog:power:2", "--error", "cubic", "--n", "8"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("sandwich"));
}

#[test]
fn missing_file_is_io_error() {
    let o = run(&["envelope", "--function", "csv:definitely-missing.csv", "--error", "zero"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("definitely-missing.csv"));
}

#[test]
fn malformed_csv_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "x,value\n0.1,1\n0.2,2\n0.5,3\n").unwrap();
    let o = run(&["analyze", "--function", p.to_str().unwrap(), "--error", "zero"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gamma_on_cubic_power() {
    let o = run(&["gamma", "--error", "power:3", "--length", "1", "--m", "128", "--max-iter", "32"]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["gamma_holds"], false);
    assert!(v["witness"].is_array());
    let sups: Vec<f64> = v["envelope_sups"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(sups.len() >= 3);
    assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
    assert_eq!(v["envelope_final"].as_array().unwrap().len(), 129);
    assert_eq!(v["envelope_sup_deltas"].as_array().unwrap().len(), sups.len() - 1);

    let ok = run(&["gamma", "--error", "power:2"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["gamma_holds"], true);
}

#[test]
fn envelope_outputs_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env.json");
    let o = run(&[
        "envelope", "--function", "catalog:concave", "--error", "zero", "--n", "31",
        "--trace", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["converged"], true);
    assert_eq!(v["is_phi_convex"], true);
    let trace = std::fs::read_to_string(dir.path().join("env.trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + v["iterations"].as_u64().unwrap() as usize);

    // The values CSV reloads onto the same grid with identical values.
    let values = dir.path().join("env.csv");
    let a = run(&["analyze", "--function", values.to_str().unwrap(), "--error", "zero"]);
    assert_eq!(code(&a), 0);
    let av = json(&a);
    assert_eq!(av["grid"]["n"], 31);
    let reloaded = phi_convex::gridfn::io::read_function_file(&values).unwrap();
    let result: Vec<f64> = v["result"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(reloaded.values(), &result[..]);
}

#[test]
fn envelope_rejects_error_without_zero_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("phi.csv");
    let mut s = String::from("t,phi\n");
    for j in 0..=16 {
        s.push_str(&format!("{},{}\n", j as f64 / 16.0, 0.5));
    }
    std::fs::write(&phi, s).unwrap();
    let spec = format!("csv:{}", phi.display());
    let o = run(&["envelope", "--function", "catalog:concave", "--error", &spec, "--n", "15"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn sandwich_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let n = 20;
    let xs = nodes(n);
    let upper = dir.path().join("upper.csv");
    let lower = dir.path().join("lower.csv");
    let above = dir.path().join("above.csv");
    write_csv(&upper, &xs.iter().map(|&x| (x, -x * x)).collect::<Vec<_>>());
    write_csv(&lower, &xs.iter().map(|&x| (x, -x - 0.1)).collect::<Vec<_>>());
    write_csv(&above, &xs.iter().map(|&x| (x, -x * x + 0.1)).collect::<Vec<_>>());

    let out = dir.path().join("s.json");
    let o = run(&[
        "sandwich", "--lower", lower.to_str().unwrap(), "--upper", upper.to_str().unwrap(),
        "--error", "zero", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "holds");
    assert!(dir.path().join("s.csv").exists());

    let o = run(&[
        "sandwich", "--lower", above.to_str().unwrap(), "--upper", upper.to_str().unwrap(), "--error", "zero",
    ]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["status"], "violated");
    assert_eq!(v["witness"]["kind"], "triple");
    assert!(v["h"].is_null());
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["analyze", "--function", "catalog:noisy:0.01:40", "--error", "power:1:0.1", "--n", "48", "--m-mult", "2"];
    let mut outputs = Vec::new();
    for threads in ["1", "3", "8"] {
        let out = dir.path().join(format!("r{threads}.json"));
        let mut full: Vec<&str> = args.to_vec();
        let o_str = out.to_str().unwrap().to_string();
        full.extend(["--out", &o_str, "--threads", threads]);
        assert!(matches!(code(&run(&full)), 0 | 3));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);

    let a = run(&["gamma", "--error", "power:2.5", "--m", "64"]);
    let b = bin()
        .args(["gamma", "--error", "power:2.5", "--m", "64"])
        .env("PHI_CONVEX_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}
