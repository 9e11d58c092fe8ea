use std::path::Path;
use std::process::{Command, Output};

use kcc_cli::commands::{AnalyzeReport, DeviationSummary, InvariantsReport};
use kcc_core::stability::{JacobiVerdict, LyapunovClass};

fn kcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_lcdm_finds_three_jacobi_unstable_points() {
    let o = kcc(&["analyze", "lcdm", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).unwrap();
    let locations: Vec<_> = report.fixed_points.iter().map(|r| r.location.clone()).collect();
    assert_eq!(locations, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    let classes: Vec<_> = report.fixed_points.iter().map(|r| r.lyapunov_class).collect();
    assert_eq!(
        classes,
        vec![LyapunovClass::Saddle, LyapunovClass::StableNode, LyapunovClass::UnstableNode]
    );
    for r in &report.fixed_points {
        assert_eq!(r.jacobi_verdict, JacobiVerdict::Unstable);
        assert!(r.residual <= 1e-10);
    }
    let text = stdout(&kcc(&["analyze", "lcdm"]));
    assert_eq!(text.matches("Jacobi-unstable").count(), 3);
}

#[test]
fn three_dimensional_definition_is_never_jacobi_stable() {
    let dir = tempfile::tempdir().unwrap();
    // stable focus at the origin in 3D: eigenvalues -1, -1±2i
    let path = write(
        dir.path(),
        "focus3.toml",
        r#"
name = "focus3"
dimension = 3
variables = ["a", "b", "c"]
components = ["-a + 2*b", "-2*a - b", "-c + a^2"]

[search]
box = [[-1, 1], [-1, 1], [-1, 1]]
grid = 3
"#,
    );
    let o = kcc(&["analyze", &path, "--format", "json"]);
    assert_eq!(code(&o), 0);
    let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!report.fixed_points.is_empty());
    for r in &report.fixed_points {
        assert_ne!(r.jacobi_verdict, JacobiVerdict::Stable);
    }
    for model in ["lorenz", "network-path3"] {
        let o = kcc(&["analyze", model, "--format", "json"]);
        let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(report.fixed_points.iter().all(|r| r.jacobi_verdict != JacobiVerdict::Stable));
    }
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.toml", "");
    let o = kcc(&["analyze", &empty]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
    assert!(o.stdout.is_empty());

    let bad = write(dir.path(), "bad.toml", "variables = [\"x\"]\ncomponents = [\"x*(\"]\n");
    let o = kcc(&["analyze", &bad]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte"));

    for args in [
        &["analyze", "no-such-model"][..],
        &["analyze", "lcdm", "--tol", "bogus=1"],
        &["analyze", "lcdm", "--seeds", "1,2,3"],
        &["invariants", "lcdm", "--at", "0,1"],
        &["deviate", "harmonic", "--W", "0,0"],
        &["deviate", "harmonic", "--dt", "0"],
        &["deviate", "harmonic", "--x0", "1"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&kcc(args)), 1, "{args:?}");
    }
}

#[test]
fn no_fixed_point_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "none.toml", "variables = [\"x\"]\ncomponents = [\"x^2 + 1\"]\n");
    let o = kcc(&["analyze", &path]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invariants_at_lcdm_attractor() {
    let o = kcc(&["invariants", "lcdm", "--at", "0,1;0,0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let report: InvariantsReport = serde_json::from_str(&stdout(&o)).unwrap();
    let p = report.invariants.deviation.to_rows();
    let want = [[4.0, 0.0], [-1.75, 2.25]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((p[i][j] - want[i][j]).abs() < 1e-12, "{p:?}");
        }
    }
    for name in ["epsilon", "berwald", "torsion", "curvature", "douglas"] {
        assert!(report.zero_tensors.iter().any(|z| z == name), "{name}");
    }
    let text = stdout(&kcc(&["invariants", "lcdm", "--at", "0,1;0,0"]));
    assert!(text.contains("[[4, 0], [-1.75, 2.25]]"), "{text}");
    assert!(text.contains("Berwald connection             0  (zero)"));
}

#[test]
fn harmonic_deviation_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    let o = kcc(&["deviate", "harmonic", "--out", csv.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let summary: DeviationSummary = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary.jacobi_verdict, JacobiVerdict::Stable);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,y1,y2,xi1,xi2,norm");
    let row: Vec<f64> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect::<Vec<f64>>())
        .find(|r| r[0] == 1.0)
        .expect("sample at t = 1");
    let exact = (1f64.sin().powi(2) + (1f64.cos() - 1.0).powi(2)).sqrt();
    assert!((row[7] - exact).abs() < 1e-10, "{} vs {exact}", row[7]);
    assert!((row[7] - 0.959).abs() < 1e-3);

    let text = stdout(&kcc(&["deviate", "harmonic"]));
    assert!(text.contains("informational"));
    assert!(text.contains("Jacobi-stable"));
}

#[test]
fn divergent_deviation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "blowup.toml", "variables = [\"x\"]\ncomponents = [\"x^2\"]\n");
    let o = kcc(&["deviate", &path, "--x0", "1", "--t-end", "3", "--format", "json"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: DeviationSummary = serde_json::from_str(&stdout(&o)).unwrap();
    let tr = summary.truncated.expect("truncated");
    assert!(tr.time > 0.5 && tr.time < 1.01, "{}", tr.time);
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncated"));
}

/// Re-serialising the parsed report reproduces the output byte for byte, so
/// every float survived the round trip bit-identically.
fn assert_round_trip<T: serde::de::DeserializeOwned + serde::Serialize>(args: &[&str]) {
    let o = kcc(args);
    assert_eq!(code(&o), 0, "{args:?}");
    let text = stdout(&o);
    let parsed: T = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again, text, "{args:?}");
}

#[test]
fn json_round_trip_is_bit_identical() {
    assert_round_trip::<AnalyzeReport>(&["analyze", "lorenz", "--format", "json"]);
    assert_round_trip::<AnalyzeReport>(&["analyze", "network-path3", "--format", "json"]);
    assert_round_trip::<InvariantsReport>(&["invariants", "lcdm", "--at", "0.3,0.1;0.7,-0.2;0.5", "--format", "json"]);
    assert_round_trip::<DeviationSummary>(&["deviate", "lcdm", "--t-end", "0.5", "--format", "json"]);
    let text = stdout(&kcc(&["analyze", "lorenz", "--format", "json"]));
    let report: AnalyzeReport = serde_json::from_str(&text).unwrap();
    let direct = kcc_core::stability::analyze_system(
        &kcc_core::models::lorenz(),
        &kcc_core::stability::SeedSpec::Grid {
            bounds: vec![(-10.0, 10.0), (-10.0, 10.0), (0.0, 30.0)],
            per_axis: 5,
        },
        &Default::default(),
    )
    .unwrap();
    assert_eq!(report.fixed_points, direct.reports);
}

#[test]
fn network_definition_with_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ring.txt", "# 3-cycle, nodes numbered from 0\n3\n0 1\n1 2\n2 0\n");
    let path = write(
        dir.path(),
        "ring.toml",
        r#"
[model]
kind = "network"
graph = "ring.txt"
evolution = ["-x1", "-x2", "-x3"]
coupling = ["x1", "x2", "x3"]
sigma = 0.5

[search]
seeds = [[0.2, -0.1, 0.3]]
"#,
    );
    let o = kcc(&["analyze", &path, "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.fixed_points.len(), 1);
    assert!(report.fixed_points[0].location.iter().all(|v| v.abs() < 1e-12));
    assert_eq!(report.fixed_points[0].lyapunov_class, LyapunovClass::StableNode);
    assert_ne!(report.fixed_points[0].jacobi_verdict, JacobiVerdict::Stable);
}

#[test]
fn flags_override_definition_search() {
    let o = kcc(&["analyze", "lcdm", "--seeds", "0.9,0.1", "--format", "json"]);
    let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.seed_count, 1);
    let o = kcc(&["analyze", "lcdm", "--box", "-0.2:0.2,0.8:1.2", "--grid", "2", "--format", "json"]);
    let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.seed_count, 4);
    assert_eq!(report.fixed_points.len(), 1);
    let at = &report.fixed_points[0].location;
    assert!(at[0].abs() < 1e-12 && (at[1] - 1.0).abs() < 1e-12, "{at:?}");
    let o = kcc(&["analyze", "lcdm", "--tol", "hyperbolic=1e-6", "--format", "json"]);
    let report: AnalyzeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.tolerances.hyperbolic, 1e-6);
}

#[test]
fn output_is_deterministic() {
    let first = stdout(&kcc(&["analyze", "network-path3", "--format", "json"]));
    for _ in 0..3 {
        assert_eq!(stdout(&kcc(&["analyze", "network-path3", "--format", "json"])), first);
    }
}

#[test]
fn models_lists_builtins() {
    let text = stdout(&kcc(&["models"]));
    for name in kcc_core::models::BUILTIN_NAMES {
        assert!(text.contains(name));
    }
}
