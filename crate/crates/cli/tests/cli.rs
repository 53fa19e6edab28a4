use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn boundent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boundent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_optimal_point_matches_network() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("net.txt");
    let out = boundent(&[
        "generate",
        "--family",
        "abls",
        "--a",
        "0.3460",
        "--b",
        "0.3460",
        "--c",
        "2.8902",
        "--dump-circuit",
        path(&dump),
    ]);
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["family"], "abls");
    assert!(v["max_norm_distance"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["direct"]["entries"].as_array().unwrap().len(), 64);
    let text = std::fs::read_to_string(dump).unwrap();
    assert!(text.starts_with("qubits=6\n"));
    assert!(boundent::circuit::Circuit::from_text(&text).is_ok());
}

#[test]
fn generate_one_negative_cut_preset() {
    let v = json(&boundent(&["generate", "--preset", "eq24"]));
    assert_eq!(v["family"], "dct");
    let third = 1.0 / 3.0;
    let sixth = 1.0 / 6.0;
    let entries = v["direct"]["entries"].as_array().unwrap();
    let re = |i: usize, j: usize| entries[8 * i + j][0].as_f64().unwrap();
    // |000>, |111> block: (λ0⁺ ± λ0⁻)/2 with λ0⁻ = 0
    assert!((re(0, 0) - third / 2.0).abs() < 1e-15);
    assert!((re(0, 7) - third / 2.0).abs() < 1e-15);
    assert!((re(7, 7) - third / 2.0).abs() < 1e-15);
    // diagonal (g, λ11, λ01, λ10, λ10, λ01, λ11, g) with λ01 = λ11 = 1/6, λ10 = 0
    for (i, want) in [
        (1, sixth),
        (2, sixth),
        (3, 0.0),
        (4, 0.0),
        (5, sixth),
        (6, sixth),
    ] {
        assert!((re(i, i) - want).abs() < 1e-15, "{i}");
    }
    assert!(re(1, 2).abs() < 1e-15);
    assert!(v["max_norm_distance"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn degenerate_abls_parameters_exit_2() {
    let out = boundent(&[
        "generate", "--family", "abls", "--a", "1", "--b", "1", "--c", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ab≠c violated"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["generate"],
        vec!["generate", "--family", "abls", "--a", "0.3"],
        vec!["generate", "--preset", "eq24", "--a", "0.3"],
        vec!["generate", "--family", "dct", "--lambda0-plus", "0.5"],
        vec!["frobnicate"],
        vec!["sweep", "--start", "0.5", "--stop", "0.1"],
        vec!["sweep", "--step", "0"],
        vec!["certify", "--from-counts", "/nonexistent/counts.jsonl"],
    ] {
        let out = boundent(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn certify_optimal_abls() {
    let v = json(&boundent(&["certify", "--preset", "optimal-abls"]));
    assert_eq!(v["verdict"], "BOUND_ENTANGLED");
    assert!(v["witness"]["witness_value"].as_f64().unwrap() < 0.0);
    for c in v["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], true, "{c}");
    }
}

#[test]
fn certify_one_negative_cut_preset() {
    let v = json(&boundent(&["certify", "--preset", "eq24"]));
    let pt = v["pt"].as_array().unwrap();
    let ppt: Vec<(&str, bool)> = pt
        .iter()
        .map(|r| (r["cut"].as_str().unwrap(), r["is_ppt"].as_bool().unwrap()))
        .collect();
    assert_eq!(ppt, vec![("A", false), ("B", true), ("C", true)]);
    assert_eq!(v["verdict"], "BOUND_ENTANGLED");
}

#[test]
fn certify_is_byte_identical() {
    let a = boundent(&["certify", "--preset", "optimal-abls"]);
    let b = boundent(&["certify", "--preset", "optimal-abls"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn maximally_mixed_counts_are_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("mixed.json");
    let counts = dir.path().join("counts.jsonl");
    let entries: Vec<String> = (0..64)
        .map(|k| if k % 9 == 0 { "[0.125,0]" } else { "[0,0]" }.to_string())
        .collect();
    std::fs::write(
        &state,
        format!(
            "{{\"schema\":1,\"n_qubits\":3,\"entries\":[{}]}}",
            entries.join(",")
        ),
    )
    .unwrap();
    let out = boundent(&[
        "tomo-sim",
        "--state",
        path(&state),
        "--shots",
        "4000",
        "--seed",
        "5",
        "--out",
        path(&counts),
    ]);
    assert!(out.status.success());
    let lines = std::fs::read_to_string(&counts).unwrap();
    assert_eq!(lines.lines().count(), 29);

    let v = json(&boundent(&[
        "certify",
        "--from-counts",
        path(&counts),
        "--project",
    ]));
    assert_eq!(v["verdict"], "SEPARABLE_UNKNOWN");
    assert_eq!(v["state_family"], "counts");
}

#[test]
fn tomo_sim_and_bootstrap_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.jsonl");
    let run = || {
        boundent(&[
            "tomo-sim",
            "--preset",
            "optimal-abls",
            "--shots",
            "3000",
            "--seed",
            "11",
        ])
    };
    let first = run();
    assert!(first.status.success());
    assert_eq!(first.stdout, run().stdout);
    std::fs::write(&counts, &first.stdout).unwrap();

    let cert = || {
        boundent(&[
            "certify",
            "--from-counts",
            path(&counts),
            "--bootstrap",
            "20",
            "--seed",
            "4",
        ])
    };
    let a = cert();
    let v = json(&a);
    let interval = &v["reconstruction"]["min_pt_bootstrap"];
    assert_eq!(interval["resamples"], 20);
    assert!(interval["lower"].as_f64().unwrap() <= interval["upper"].as_f64().unwrap());
    assert_eq!(a.stdout, cert().stdout);
}

#[test]
fn counts_without_required_setting_exit_2() {
    let out = boundent(&["tomo-sim", "--preset", "optimal-abls", "--shots", "100"]);
    let kept: String = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("\"xyz\""))
        .map(|l| format!("{l}\n"))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("partial.jsonl");
    std::fs::write(&counts, kept).unwrap();
    let out = boundent(&["certify", "--from-counts", path(&counts)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("xyz"));
}

fn sweep_rows(csv: &[u8]) -> Vec<(f64, f64, String)> {
    String::from_utf8_lossy(csv)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].to_string(),
            )
        })
        .collect()
}

#[test]
fn sweep_reproduces_branch_switch() {
    let out = boundent(&[
        "sweep", "--start", "0.05", "--stop", "0.95", "--step", "0.005",
    ]);
    assert!(out.status.success());
    assert!(out
        .stdout
        .starts_with(b"a,epsilon,branch,theta_e,theta_f,theta_g,p_star\n"));
    let rows = sweep_rows(&out.stdout);
    assert_eq!(rows.len(), 181);
    let switch = rows
        .windows(2)
        .find(|w| w[0].2 == "corner" && w[1].2 == "symmetric")
        .map(|w| w[1].0)
        .unwrap();
    assert!((switch - 0.346).abs() <= 0.005, "{switch}");
    let max = rows.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    assert!(max >= 0.1069 - 1e-3, "{max}");
}

#[test]
fn single_point_sweep_equals_epsilon_min() {
    let out = boundent(&[
        "sweep", "--start", "0.346", "--stop", "0.346", "--step", "0.01",
    ]);
    let rows = sweep_rows(&out.stdout);
    assert_eq!(rows.len(), 1);
    let p = boundent::states::AblsParams::symmetric(0.346).unwrap();
    let eps = boundent::witness::epsilon_min(&p).epsilon;
    assert_eq!(rows[0].1, eps);
}
