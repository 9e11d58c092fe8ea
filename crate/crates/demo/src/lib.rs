//! Browser bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string. Failures come back as
//! `{"error": "..."}` so the page has a single decoding path.

use kcc_core::deviation;
use kcc_core::kcc::Sode;
use kcc_core::linalg::Matrix;
use kcc_core::odesys::VectorField;
use kcc_core::stability::{self, jacobi_classify, lyapunov_classify, SeedSpec, Tolerances};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Longest run the page may request, in steps.
pub const MAX_STEPS: usize = 200_000;
/// Most points returned for plotting.
pub const MAX_PLOT_POINTS: usize = 2_000;
pub const MAX_RESOLUTION: usize = 400;

#[derive(Serialize)]
struct ErrorReply {
    error: String,
}

fn reply<T: Serialize>(result: Result<T, String>) -> String {
    let json = match result {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&ErrorReply { error }),
    };
    json.unwrap_or_else(|e| format!("{{\"error\":\"serialization failed: {e}\"}}"))
}

fn split_list(text: &str, sep: &[char]) -> Vec<String> {
    text.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn parse_numbers(text: &str, what: &str) -> Result<Vec<f64>, String> {
    split_list(text, &[',', ' '])
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{what}: '{s}' is not a finite number"))
        })
        .collect()
}

/// Variables separated by commas, one component per line (or `;`).
fn parse_field(variables: &str, components: &str) -> Result<VectorField, String> {
    let vars = split_list(variables, &[',', ' ']);
    let comps = split_list(components, &['\n', ';']);
    VectorField::parse("demo", &vars, &comps).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct PointSummary {
    location: Vec<f64>,
    eigenvalues: Vec<[f64; 2]>,
    lyapunov: &'static str,
    jacobi_spectrum: Vec<[f64; 2]>,
    jacobi: &'static str,
    margin: f64,
}

#[derive(Serialize)]
struct AnalysisReply {
    dimension: usize,
    seeds: usize,
    failed_seeds: usize,
    points: Vec<PointSummary>,
}

fn pairs(zs: &[num_complex::Complex64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

pub fn analyze_text(variables: &str, components: &str, half_width: f64, grid: usize) -> Result<impl Serialize, String> {
    let field = parse_field(variables, components)?;
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err("box half-width must be positive".into());
    }
    let n = field.dimension();
    let spec = SeedSpec::Grid {
        bounds: vec![(-half_width, half_width); n],
        per_axis: grid.clamp(1, 12),
    };
    let seeds = spec.seeds(n).map_err(|e| e.to_string())?.len();
    let analysis = stability::analyze_system(&field, &spec, &Tolerances::default()).map_err(|e| e.to_string())?;
    Ok(AnalysisReply {
        dimension: n,
        seeds,
        failed_seeds: analysis.failures.len(),
        points: analysis
            .reports
            .iter()
            .map(|r| PointSummary {
                location: r.location.clone(),
                eigenvalues: pairs(&r.eigenvalues),
                lyapunov: r.lyapunov_class.label(),
                jacobi_spectrum: pairs(&r.jacobi_spectrum),
                jacobi: r.jacobi_verdict.label(),
                margin: r.jacobi_margin,
            })
            .collect(),
    })
}

/// Fixed points inside `[-half_width, half_width]^n` with their classifications.
#[wasm_bindgen]
pub fn analyze_system(variables: &str, components: &str, half_width: f64, grid: usize) -> String {
    reply(analyze_text(variables, components, half_width, grid))
}

#[derive(Serialize)]
struct MapReply {
    resolution: usize,
    range: f64,
    /// Lyapunov label per cell, row-major, det decreasing down the rows.
    lyapunov: Vec<&'static str>,
    /// 1 where the linear system is Jacobi stable.
    jacobi_stable: Vec<u8>,
}

/// Classify `ẋ = A x` over the (trace, det) square `[-range, range]²`
/// using the companion matrix `[[0, 1], [-det, trace]]`.
pub fn trace_det_cells(resolution: usize, range: f64) -> Result<impl Serialize, String> {
    if !(2..=MAX_RESOLUTION).contains(&resolution) {
        return Err(format!("resolution must be in 2..={MAX_RESOLUTION}"));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err("range must be positive".into());
    }
    let tol = Tolerances::default().hyperbolic;
    let step = 2.0 * range / resolution as f64;
    let mut lyapunov = Vec::with_capacity(resolution * resolution);
    let mut jacobi_stable = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        let det = range - (row as f64 + 0.5) * step;
        for col in 0..resolution {
            let trace = -range + (col as f64 + 0.5) * step;
            let a = Matrix::from_rows(&[[0.0, 1.0], [-det, trace]]);
            let eigs = stability::eigenvalues(&a).map_err(|e| e.to_string())?;
            lyapunov.push(lyapunov_classify(&eigs, tol).label());
            let verdict = jacobi_classify(&eigs, 2, tol).verdict;
            jacobi_stable.push(u8::from(verdict == stability::JacobiVerdict::Stable));
        }
    }
    Ok(MapReply {
        resolution,
        range,
        lyapunov,
        jacobi_stable,
    })
}

#[wasm_bindgen]
pub fn trace_det_map(resolution: usize, range: f64) -> String {
    reply(trace_det_cells(resolution, range))
}

#[derive(Serialize)]
struct DeviationReply {
    times: Vec<f64>,
    norms: Vec<f64>,
    verdict: &'static str,
    spectrum: Vec<[f64; 2]>,
    truncated_at: Option<f64>,
}

pub fn deviation_samples(
    variables: &str,
    components: &str,
    x0: &str,
    w: &str,
    t_end: f64,
    dt: f64,
) -> Result<impl Serialize, String> {
    let field = parse_field(variables, components)?;
    let n = field.dimension();
    let x0 = parse_numbers(x0, "x0")?;
    let w = parse_numbers(w, "W")?;
    if x0.len() != n || w.len() != n {
        return Err(format!("x0 and W need {n} entries each"));
    }
    if dt > 0.0 && t_end / dt > MAX_STEPS as f64 {
        return Err(format!("at most {MAX_STEPS} steps per run"));
    }
    let sode = Sode::lift(&field);
    let y0 = deviation::default_velocity(&sode, &x0).ok_or("f(x0) cannot be evaluated")?;
    let run = deviation::integrate(&sode, &x0, &y0, &w, t_end, dt).map_err(|e| e.to_string())?;
    let p = sode.deviation_tensor(&x0, &y0, 0.0).map_err(|e| e.to_string())?;
    let (spectrum, verdict) =
        stability::deviation_verdict(&p, Tolerances::default().hyperbolic).map_err(|e| e.to_string())?;
    let stride = run.len().div_ceil(MAX_PLOT_POINTS).max(1);
    let keep: Vec<usize> = (0..run.len()).step_by(stride).chain([run.len() - 1]).collect();
    let mut keep = keep;
    keep.dedup();
    Ok(DeviationReply {
        times: keep.iter().map(|&k| run.times[k]).collect(),
        norms: keep.iter().map(|&k| run.norms[k]).collect(),
        verdict: verdict.label(),
        spectrum: pairs(&spectrum),
        truncated_at: run.truncated.map(|t| t.time),
    })
}

/// `‖ξ(t)‖` along the lifted trajectory from `x0` with `ξ̇(0) = W`.
#[wasm_bindgen]
pub fn deviation_run(variables: &str, components: &str, x0: &str, w: &str, t_end: f64, dt: f64) -> String {
    reply(deviation_samples(variables, components, x0, w, t_end, dt))
}
