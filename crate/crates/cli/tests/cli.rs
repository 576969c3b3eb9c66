use std::path::Path;
use std::process::{Command, Output};

fn dyadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadic")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const RAMP: &str = "dim 1\nroot L0:k0:(0)\nL0:k-3:(0) 0\nL0:k-3:(1) 1\nL0:k-3:(2) 2\nL0:k-3:(3) 3\nL0:k-3:(4) 4\nL0:k-3:(5) 5\nL0:k-3:(6) 6\nL0:k-3:(7) 7\n";

#[test]
fn e4_oscillation_norm_is_infinite_with_witness() {
    let out = dyadic(&["norm", "--example", "E4", "--K", "8", "--p", "2", "--gamma", "2", "--kind", "osc"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["value"], "+inf");
    assert!(!v["result"]["witness"].as_array().unwrap().is_empty());
}

#[test]
fn ramp_file_has_finite_norm() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ramp.fn", RAMP);
    let out = dyadic(&["norm", "--file", &f, "--p", "2", "--kind", "osc", "--gamma1", "0", "--gamma2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let x = json(&out)["result"]["value"].as_f64().unwrap();
    assert!(x.is_finite() && x > 0.0);
}

#[test]
fn empty_file_gives_zero_norm_and_empty_profile() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "empty.fn", "");
    let out = dyadic(&["norm", "--file", &f, "--p", "2", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["value"].as_f64(), Some(0.0));
    let out = dyadic(&["profile", "--file", &f, "--p", "2", "--gamma", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["lambda,W,lambda_p_W,source"]);
}

#[test]
fn parameter_errors_exit_2() {
    for args in [
        vec!["norm", "--example", "E4", "--K", "0"],
        vec!["norm", "--example", "E4", "--p", "-1"],
        vec!["norm", "--example", "E9"],
        vec!["norm"],
        vec!["verify", "--claims", "7"],
        vec!["verify", "--claims", "1", "--set", "depth=3"],
        vec!["norm", "--example", "E4", "--measure", "cantor"],
    ] {
        assert_eq!(dyadic(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn truncation_needs_permission() {
    let args = ["norm", "--example", "E0", "--window=-3:2"];
    assert_eq!(dyadic(&args).status.code(), Some(3));
    let mut more = args.to_vec();
    more.push("--allow-truncation");
    let out = dyadic(&more);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["exactness"], "truncated");
}

#[test]
fn flags_override_config_and_config_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# run\nexample = E4\np = 3\nallow-truncation = true\n");
    let out = dyadic(&["norm", "--config", &cfg, "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["p"], "2");
    assert_eq!(v["config"]["example"], "E4");
    assert_eq!(v["config"]["allow_truncation"], "true");

    let bad = write(dir.path(), "bad.cfg", "claims = 1\n");
    assert_eq!(dyadic(&["norm", "--config", &bad, "--example", "E4"]).status.code(), Some(2));
}

#[test]
fn example_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("e4.fn");
    let f = f.to_str().unwrap();
    assert_eq!(dyadic(&["example", "--example", "E4", "--K", "6", "--out", f]).status.code(), Some(0));
    let a = json(&dyadic(&["norm", "--example", "E4", "--K", "6", "--norm", "jn"]));
    let b = json(&dyadic(&["norm", "--file", f, "--p", "2", "--norm", "jn"]));
    assert_eq!(a["result"]["value"], b["result"]["value"]);
}

#[test]
fn profile_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ramp.fn", RAMP);
    let svg = dir.path().join("p.svg");
    let out = dyadic(&["profile", "--file", &f, "--p", "2", "--kind", "osc", "--gamma1", "0", "--gamma2", "2", "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().filter(|l| !l.starts_with('#')).skip(1).all(|l| l.ends_with(",step") || l.ends_with(",tail")));
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn single_thread_verify_is_byte_identical() {
    let args = ["verify", "--threads", "1", "--claims", "claims"];
    let a = dyadic(&args);
    let b = dyadic(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["verdict"], "consistent");
}

#[test]
fn sweep_reports_each_value() {
    let out = dyadic(&["sweep", "--example", "E4", "--values", "4,6", "--norm", "op"]);
    assert_eq!(out.status.code(), Some(2), "sweep computes the op norm only");
    let out = dyadic(&["sweep", "--example", "E4", "--values", "4,6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("4,+inf"));
}
