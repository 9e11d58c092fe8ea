use kcc_demo::{analyze_system, deviation_run, trace_det_map};
use serde_json::Value;

fn parse(json: &str) -> Value {
    serde_json::from_str(json).expect("valid JSON")
}

#[test]
fn lcdm_analysis() {
    let v = parse(&analyze_system("x, y", "-x*(1-x+3*y)\n(3+x-3*y)*y", 1.0, 5));
    let points = v["points"].as_array().unwrap();
    let locations: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p["location"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect())
        .collect();
    for want in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]] {
        assert!(
            locations.iter().any(|l| (l[0] - want[0]).abs() < 1e-12 && (l[1] - want[1]).abs() < 1e-12),
            "{locations:?}"
        );
    }
    assert!(points.iter().all(|p| p["jacobi"] == "Jacobi-unstable"));
}

#[test]
fn errors_are_json() {
    let v = parse(&analyze_system("x", "x*(", 1.0, 3));
    assert!(v["error"].as_str().unwrap().contains("byte"));
    assert!(parse(&trace_det_map(1, 1.0))["error"].is_string());
    assert!(parse(&deviation_run("x1,x2", "x2;-x1", "1,0", "0,0", 1.0, 1e-2))["error"].is_string());
}

#[test]
fn trace_det_regions() {
    let res = 40;
    let v = parse(&trace_det_map(res, 4.0));
    let labels = v["lyapunov"].as_array().unwrap();
    let stable = v["jacobi_stable"].as_array().unwrap();
    assert_eq!(labels.len(), res * res);
    let step = 8.0 / res as f64;
    for row in 0..res {
        let det = 4.0 - (row as f64 + 0.5) * step;
        for col in 0..res {
            let trace = -4.0 + (col as f64 + 0.5) * step;
            let k = row * res + col;
            // Re(λ²) = T²/2 − D, negative only inside the parabola D > T²/2
            let inside = det > trace * trace / 2.0 + 1e-9;
            assert_eq!(stable[k] == 1, inside, "T={trace} D={det}");
            if det < 0.0 {
                assert_eq!(labels[k], "saddle");
            }
        }
    }
}

#[test]
fn harmonic_deviation_norm() {
    let v = parse(&deviation_run("x1,x2", "x2\n-x1", "1,0", "1,0", 2.0, 1e-3));
    assert_eq!(v["verdict"], "Jacobi-stable");
    let times = v["times"].as_array().unwrap();
    let norms = v["norms"].as_array().unwrap();
    let k = times.iter().position(|t| t.as_f64() == Some(1.0)).unwrap();
    let exact = (1f64.sin().powi(2) + (1f64.cos() - 1.0).powi(2)).sqrt();
    assert!((norms[k].as_f64().unwrap() - exact).abs() < 1e-10);
    assert_eq!(times.last().unwrap().as_f64(), Some(2.0));
    assert!(v["truncated_at"].is_null());
}
