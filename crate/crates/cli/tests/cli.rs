use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn isoband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoband"))
        .args(args)
        .env_remove("ISOBAND_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Deterministic noisy ramp without pulling in an RNG.
fn noisy_ramp(n: usize) -> String {
    (1..=n)
        .map(|i| {
            let t = i as f64 / (n as f64 + 1.0);
            let noise = ((i as f64) * 12.9898).sin() * 43758.5453;
            let noise = 2.0 * (noise - noise.floor()) - 1.0;
            format!("{}\n", 20.0 * t - 10.0 + noise)
        })
        .collect()
}

fn band_rows(csv: &str) -> Vec<[f64; 4]> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,lower,fitted,upper"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|f| f.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn fit_example_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "2\n1\n");
    let out = isoband(&["fit", s(&input)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1.5\n1.5\n");
    assert!(stderr(&out).contains("df = 1"));

    let noisy = write(&dir, "noisy.csv", &noisy_ramp(300));
    let first = dir.path().join("fit1.csv");
    assert!(isoband(&["fit", s(&noisy), "-o", s(&first)])
        .status
        .success());
    let second = isoband(&["fit", s(&first)]);
    assert_eq!(stdout(&second), std::fs::read_to_string(&first).unwrap());
}

#[test]
fn fit_json_and_blocks() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "3\n1\n2\n5\n");
    let blocks = dir.path().join("blocks.csv");
    let out = isoband(&["fit", s(&input), "--format", "json", "--blocks", s(&blocks)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["df"], 2);
    assert_eq!(v["fitted"], serde_json::json!([2.0, 2.0, 2.0, 5.0]));
    assert_eq!(
        std::fs::read_to_string(blocks).unwrap(),
        "start,end,level\n0,3,2\n3,4,5\n"
    );
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = isoband(&["fit", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(s(&missing)));

    let bad = write(&dir, "bad.csv", "1\n2\nabc\n");
    let out = isoband(&["fit", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"));

    let empty = write(&dir, "empty.csv", "");
    assert_eq!(isoband(&["fit", s(&empty)]).status.code(), Some(2));

    let nan = write(&dir, "nan.csv", "1\nNaN\n");
    assert_eq!(isoband(&["fit", s(&nan)]).status.code(), Some(2));

    assert_eq!(isoband(&["fit"]).status.code(), Some(2));
    assert_eq!(isoband(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn band_on_simulated_data() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", &noisy_ramp(1000));
    let out = isoband(&["band", s(&input), "--sigma", "1", "--delta", "0.1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = band_rows(&stdout(&out));
    assert_eq!(rows.len(), 1000);
    let crossings: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r[1] > r[3])
        .map(|(k, _)| k)
        .collect();
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], k as f64);
        if !crossings.contains(&k) {
            assert!(r[1] <= r[2] && r[2] <= r[3]);
        }
    }
    if !crossings.is_empty() {
        assert!(stderr(&out).contains("cross"));
    }
}

#[test]
fn band_rejects_bad_delta() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "1\n2\n3\n");
    let out = isoband(&["band", s(&input), "--sigma", "1", "--delta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = isoband(&["band", s(&input), "--sigma", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eps_iso_shifts_envelopes_exactly() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", &noisy_ramp(200));
    let base = isoband(&["band", s(&input), "--sigma", "1", "--delta", "0.1"]);
    let wide = isoband(&[
        "band",
        s(&input),
        "--sigma",
        "1",
        "--delta",
        "0.1",
        "--eps-iso",
        "0.5",
    ]);
    let (a, b) = (band_rows(&stdout(&base)), band_rows(&stdout(&wide)));
    for (r, w) in a.iter().zip(&b) {
        assert_eq!(w[1], r[1] - 0.5);
        assert_eq!(w[2], r[2]);
        assert_eq!(w[3], r[3] + 0.5);
    }
}

#[test]
fn band_json_mirrors_csv() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", &noisy_ramp(50));
    let csv = band_rows(&stdout(&isoband(&[
        "band",
        s(&input),
        "--sigma",
        "0.5",
        "--delta",
        "0.2",
    ])));
    let json = isoband(&[
        "band",
        s(&input),
        "--sigma",
        "0.5",
        "--delta",
        "0.2",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), csv.len());
    for (r, c) in rows.iter().zip(&csv) {
        assert_eq!(r["index"].as_f64().unwrap(), c[0]);
        assert_eq!(r["lower"].as_f64().unwrap(), c[1]);
        assert_eq!(r["fitted"].as_f64().unwrap(), c[2]);
        assert_eq!(r["upper"].as_f64().unwrap(), c[3]);
    }
}

#[test]
fn band_with_estimated_sigma_and_backbone() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", &noisy_ramp(100));
    let out = isoband(&["band", s(&input), "--delta", "0.1"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("estimated sigma"));

    let out = isoband(&["band", s(&input), "--sw-bound", "1", "--psi", "const"]);
    assert!(out.status.success());
    let rows = band_rows(&stdout(&out));
    // psi = 1: the single-point window gives fitted -/+ 1 as the loosest bound
    assert!(rows
        .iter()
        .all(|r| r[1] >= r[2] - 1.0 - 1e-12 && r[3] <= r[2] + 1.0 + 1e-12));

    let psi = write(&dir, "psi.csv", "1\n4\n9\n");
    let out = isoband(&[
        "band",
        s(&input),
        "--sw-bound",
        "1",
        "--psi",
        "custom",
        "--psi-file",
        s(&psi),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_norm_exit_codes() {
    assert_eq!(
        isoband(&["check-norm", "--norm", "l2"]).status.code(),
        Some(0)
    );
    assert_eq!(
        isoband(&["check-norm", "--norm", "sw-sqrt"]).status.code(),
        Some(0)
    );
    assert_eq!(
        isoband(&["check-norm", "--norm", "nope"]).status.code(),
        Some(2)
    );

    let out = isoband(&["check-norm", "--norm", "first-coord", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nuna_passed"], false);
    let w = &v["contraction_witness"];
    assert!(w["lhs"].as_f64().unwrap() > w["rhs"].as_f64().unwrap());
    assert!(v["nuna_violation"]["i"].is_u64());
}

#[test]
fn sigma_example() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "2\n1\n");
    let out = isoband(&[
        "sigma",
        s(&input),
        "--method",
        "bias-corrected",
        "--c1",
        "1.5",
    ]);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 1.0);
    let out = isoband(&["sigma", s(&input), "--method", "mle"]);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 0.5);
    // n - c1 * df <= 0
    let out = isoband(&["sigma", s(&input), "--c1", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn envelope_forms() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "x.csv", "0\n1\n2\n3\n");
    let p = isoband(&["envelope", s(&input), "--sigma", "1", "--delta", "0.1"]);
    let d = isoband(&[
        "envelope",
        s(&input),
        "--sigma",
        "1",
        "--delta",
        "0.1",
        "--form",
        "direct",
    ]);
    assert!(p.status.success());
    assert_eq!(stdout(&p), stdout(&d));
    assert!(stdout(&p).starts_with("index,lower,upper\n"));
}

#[test]
fn density_output() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "z.csv", "0.9\n0.1\n0.2\n");
    let out = isoband(&[
        "density",
        s(&input),
        "--c",
        "0.5",
        "--lipschitz",
        "1",
        "--delta",
        "0.1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,z,density"));
    let vals: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!((vals[0] - 10.0 / 3.0).abs() < 1e-12);
    assert!((vals[2] - 10.0 / 21.0).abs() < 1e-12);
    assert!(stderr(&out).contains("not valid"));

    let outside = write(&dir, "bad.csv", "0.5\n1.5\n");
    assert_eq!(isoband(&["density", s(&outside)]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_streams_trials() {
    let dir = TempDir::new().unwrap();
    let trials = dir.path().join("trials.jsonl");
    let args = [
        "simulate",
        "slopes",
        "--n-values",
        "100,130",
        "--trials",
        "3",
        "--seed",
        "7",
        "--trials-out",
        s(&trials),
    ];
    let a = isoband(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = isoband(&args);
    assert_eq!(a.stdout, b.stdout);
    let summary = stdout(&a);
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("n,region,mean_width,coverage"));
    assert_eq!(lines.count(), 4);
    let records = std::fs::read_to_string(&trials).unwrap();
    let parsed: Vec<serde_json::Value> = records
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(parsed.len(), 6);
    assert_eq!(parsed[0]["n"], 100);
    assert!(parsed[0]["band"]["lower"].is_array());

    let other_seed = isoband(&[
        "simulate",
        "slopes",
        "--n-values",
        "100,130",
        "--trials",
        "3",
        "--seed",
        "8",
    ]);
    assert_ne!(a.stdout, other_seed.stdout);
}

#[test]
fn thread_cap_does_not_change_results() {
    let args = [
        "simulate",
        "coverage",
        "--n",
        "120",
        "--trials",
        "8",
        "--factors",
        "1,0.5",
    ];
    let default = isoband(&args);
    let capped = Command::new(env!("CARGO_BIN_EXE_isoband"))
        .args(args)
        .env("ISOBAND_THREADS", "1")
        .output()
        .unwrap();
    assert!(capped.status.success());
    assert_eq!(default.stdout, capped.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_isoband"))
        .args(args)
        .env("ISOBAND_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_density_small() {
    let out = isoband(&[
        "simulate", "density", "--n", "2000", "--trials", "2", "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["half_width"], serde_json::Value::Null);
}
