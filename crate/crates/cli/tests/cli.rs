use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauss-extremal")).args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["inputs", "terms_used", "elapsed"] {
        assert!(v.get(key).is_some(), "{args:?} lacks {key}");
    }
    assert!(v.get("value").is_some() || v.get("values").is_some(), "{args:?} lacks value(s)");
    assert!(v.get("tail_bound").is_some() || v.get("error_estimate").is_some(), "{args:?} lacks certificate");
    v
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr not JSON: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn majorant_value_anchor() {
    let v = json_ok(&["value", "--nu", "-0.5", "--lambda", "1", "--delta", "2", "--dim", "1", "--side", "plus"]);
    assert!((v["value"].as_f64().unwrap() - 2.1415927).abs() < 1e-6);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["command", "inputs", "value", "terms_used", "tail_bound", "elapsed"]);
}

#[test]
fn verify_quadrature_passes() {
    let v = json_ok(&["verify", "quadrature", "--nu", "0", "--lambda", "1", "--side", "minus", "--rtol", "1e-5"]);
    assert_eq!(v["status"], "PASS");
    let (a, b) = (v["value"].as_f64().unwrap(), v["quadrature_value"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-5 * a);
}

#[test]
fn verify_onesided_passes() {
    let v = json_ok(&["verify", "onesided", "--nu", "0.5", "--lambda", "2", "--side", "plus", "--grid", "lin:-8:8:2001"]);
    assert_eq!(v["status"], "PASS");
    assert_eq!(v["points"], 2001);
}

#[test]
fn periodic_lebesgue_degree_one() {
    // Σ_j e^{−π(j−1/4)²} by direct summation
    let v = json_ok(&["periodic", "--measure", "lebesgue", "--degree", "1", "--lambda", "1", "--side", "minus"]);
    assert!((v["value"].as_f64().unwrap() - 0.999993025315288).abs() < 1e-12);
    assert_eq!(v["nodes"], serde_json::json!([0.25, 0.75]));
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 3);
}

#[test]
fn periodic_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let dens = dir.path().join("density.csv");
    let mut f = std::fs::File::create(&dens).unwrap();
    writeln!(f, "x,weight").unwrap();
    for i in 0..64 {
        let x = i as f64 / 64.0;
        writeln!(f, "{x},{}", 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).cos()).unwrap();
    }
    drop(f);
    let spec = format!("density:{}", dens.display());
    let v = json_ok(&["periodic", "--measure", &spec, "--degree", "3", "--lambda", "1.5", "--side", "plus"]);
    let gap = (v["value"].as_f64().unwrap() - v["value_formula"].as_f64().unwrap()).abs();
    assert!(gap < 1e-10);

    let mom = dir.path().join("moments.csv");
    std::fs::write(&mom, "m,c\n0,1\n1,0.15\n2,0\n3,0\n4,0\n").unwrap();
    let spec = format!("moments:{}", mom.display());
    let w = json_ok(&["periodic", "--measure", &spec, "--degree", "3", "--lambda", "1.5", "--side", "plus"]);
    assert!((w["value"].as_f64().unwrap() - v["value"].as_f64().unwrap()).abs() < 1e-12);

    // point mass at 0: singular Gram matrix is a numeric failure
    std::fs::write(&mom, "0,1\n1,1\n2,1\n").unwrap();
    let out = run(&["periodic", "--measure", &spec, "--degree", "1", "--lambda", "1", "--side", "minus"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "ill_conditioned");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["value", "--nu", "-2", "--lambda", "1", "--side", "plus"],
        vec!["value", "--nu", "0", "--lambda", "-1", "--side", "plus"],
        vec!["value", "--nu", "0", "--side", "plus"],
        vec!["value", "--nu", "0", "--lambda", "1", "--side", "plus", "--delta", "0"],
        vec!["sweep", "value", "--nu", "0", "--side", "plus", "--lambda-grid", "cubic:1:2:3"],
        vec!["eval", "--nu", "0", "--lambda", "1", "--side", "plus", "--dim", "2", "--point", "1"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_json(&out)["exit_code"], 2);
    }
    // rejected by the argument parser itself
    for args in [vec!["value", "--nu", "0", "--lambda", "1", "--side", "sideways"], vec!["value", "-n", "0"]] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2));
        assert_eq!(stderr_json(&out)["error"], "usage");
    }
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("periodic"));
}

#[test]
fn identical_runs_match_apart_from_elapsed() {
    let args = ["sweep", "value", "--nu", "0", "--side", "minus", "--lambda-grid", "log:0.1:10:9"];
    let strip = |o: Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("elapsed");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(run(&args)), strip(run(&args)));
}

#[test]
fn sweep_csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "eval", "--nu", "0", "--lambda", "1", "--side", "minus", "--x-grid", "lin:0:3:4", "--format", "csv", "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,value,target");
    assert_eq!(lines.len(), 5);
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(f[1] <= f[2] + 1e-15);
    }
}

#[test]
fn subordinated_value_and_eval() {
    let v = json_ok(&["value", "--nu", "0", "--measure", "power:sigma=1", "--side", "minus"]);
    assert!(v["value"].as_f64().unwrap() > 0.0);
    let e = json_ok(&["eval", "--nu", "0", "--dim", "2", "--point", "0.3,-1", "--measure", "power:sigma=1", "--side", "minus"]);
    assert!(e["value"].as_f64().unwrap() <= e["target"].as_f64().unwrap());
    let p = json_ok(&["eval", "--nu", "-0.5", "--lambda", "1", "--side", "minus", "--point", "0"]);
    assert!(p["value"].as_f64().unwrap() <= 1.0);
}

#[test]
fn hilbert_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("points.csv");
    let body: String = (0..12).map(|i| format!("{}\n", 1.1 * i as f64)).collect();
    std::fs::write(&pts, body).unwrap();
    let v = json_ok(&["hilbert", "check", "--points", pts.to_str().unwrap(), "--delta", "1", "--measure", "point:1"]);
    assert_eq!(v["status"], "PASS");
    assert!(v["values"]["margin_lower"].as_f64().unwrap() >= -1e-9);
    assert!((v["inputs"]["type_parameter"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-15);

    let h = json_ok(&["hilbert", "hls", "--dim", "1", "--sigma", "1", "--delta", "1"]);
    assert!(h["values"]["upper"].as_f64().unwrap() > 0.0);
    let out = run(&["hilbert", "hls", "--dim", "1", "--sigma", "-1", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&pts, "0\n0.5\n").unwrap();
    let out = run(&["hilbert", "check", "--points", pts.to_str().unwrap(), "--delta", "1", "--measure", "point:1"]);
    assert_eq!(out.status.code(), Some(2));
}
