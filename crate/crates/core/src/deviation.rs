//! Jacobi (geodesic deviation) equation integrated along a trajectory.
//!
//! The coupled first-order system in `(x, y, ξ, η)` is
//! `ẋ = y`, `ẏ = −2G`, `ξ̇ = η`, `η̇ = −2N·η − 2(∂G/∂x)·ξ`,
//! advanced with fixed-step classic Runge–Kutta.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kcc::{KccError, Sode};
use crate::linalg::norm2;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_PROBE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DeviationError {
    #[error("step dt must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("t_end must be finite and at least dt, got {0}")]
    InvalidHorizon(f64),
    #[error("initial deviation velocity W must be nonzero")]
    ZeroDisplacement,
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("initial state: {0}")]
    Initial(#[source] KccError),
    #[error("probe time {probe} lies outside the integrated range [0, {end}]")]
    ProbeOutOfRange { probe: f64, end: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TruncationReason {
    Evaluation { message: String },
    NonFinite,
}

/// Why and when a run stopped early.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Last time with a complete sample.
    pub time: f64,
    pub reason: TruncationReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Focusing {
    Bunching,
    Dispersing,
}

impl fmt::Display for Focusing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Focusing::Bunching => "bunching",
            Focusing::Dispersing => "dispersing",
        })
    }
}

/// Literal `‖ξ(t*)‖ < t*²` comparison. Informational only: with `ξ̇(0) = W ≠ 0`
/// the norm grows like `‖W‖t`, so small probes almost always disperse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocusingDiagnostic {
    pub probe: f64,
    pub norm: f64,
    pub threshold: f64,
    /// Sign of `‖ξ(t*)‖ − t*²`.
    pub comparison: i8,
    pub label: Focusing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRun {
    pub dt: f64,
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    pub xi_dot: Vec<Vec<f64>>,
    /// `ξ̇(0)`
    pub w: Vec<f64>,
    pub norms: Vec<f64>,
    /// Diagnostic at the default probe time, when it lies inside the run.
    pub t2_comparison: Option<FocusingDiagnostic>,
    pub truncated: Option<Truncation>,
}

impl DeviationRun {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// `t, x1…, y1…, xi1…, norm`
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        let n = self.w.len();
        let mut header = vec!["t".to_string()];
        for prefix in ["x", "y", "xi"] {
            header.extend((1..=n).map(|i| format!("{prefix}{i}")));
        }
        header.push("norm".into());
        writeln!(out, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k].to_string()];
            for block in [&self.x[k], &self.y[k], &self.xi[k]] {
                row.extend(block.iter().map(f64::to_string));
            }
            row.push(self.norms[k].to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

struct Layout {
    n: usize,
}

impl Layout {
    fn split<'a>(&self, s: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let n = self.n;
        (&s[..n], &s[n..2 * n], &s[2 * n..3 * n], &s[3 * n..])
    }
}

fn rhs(sode: &Sode, layout: &Layout, state: &[f64], t: f64) -> Result<Vec<f64>, KccError> {
    let n = layout.n;
    let (x, y, xi, eta) = layout.split(state);
    let (g, dg_dx, conn) = sode.first_order(x, y, t)?;
    let n_eta = conn.matvec(eta);
    let d_xi = dg_dx.matvec(xi);
    let mut out = Vec::with_capacity(4 * n);
    out.extend_from_slice(y);
    out.extend(g.iter().map(|v| -2.0 * v));
    out.extend_from_slice(eta);
    out.extend((0..n).map(|i| -2.0 * n_eta[i] - 2.0 * d_xi[i]));
    Ok(out)
}

fn axpy(base: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    base.iter().zip(k).map(|(b, v)| b + h * v).collect()
}

fn rk4_step(sode: &Sode, layout: &Layout, s: &[f64], t: f64, dt: f64) -> Result<Vec<f64>, KccError> {
    let k1 = rhs(sode, layout, s, t)?;
    let k2 = rhs(sode, layout, &axpy(s, &k1, 0.5 * dt), t + 0.5 * dt)?;
    let k3 = rhs(sode, layout, &axpy(s, &k2, 0.5 * dt), t + 0.5 * dt)?;
    let k4 = rhs(sode, layout, &axpy(s, &k3, dt), t + dt)?;
    Ok((0..s.len())
        .map(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrates from `ξ(0) = 0`, `ξ̇(0) = w` over `round(t_end/dt)` steps.
///
/// Evaluation failures and non-finite states truncate the run instead of
/// failing it; see [`DeviationRun::truncated`].
pub fn integrate(
    sode: &Sode,
    x0: &[f64],
    y0: &[f64],
    w: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<DeviationRun, DeviationError> {
    let n = sode.dimension();
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DeviationError::InvalidStep(dt));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(DeviationError::InvalidHorizon(t_end));
    }
    for (what, v) in [("x0", x0), ("y0", y0), ("W", w)] {
        if v.len() != n {
            return Err(DeviationError::Dimension {
                what,
                expected: n,
                got: v.len(),
            });
        }
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(DeviationError::ZeroDisplacement);
    }
    let layout = Layout { n };
    let steps = (t_end / dt).round() as usize;
    let mut state: Vec<f64> = [x0, y0, &vec![0.0; n], w].concat();
    rhs(sode, &layout, &state, 0.0).map_err(DeviationError::Initial)?;

    let mut run = DeviationRun {
        dt,
        times: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps + 1),
        xi: Vec::with_capacity(steps + 1),
        xi_dot: Vec::with_capacity(steps + 1),
        w: w.to_vec(),
        norms: Vec::with_capacity(steps + 1),
        t2_comparison: None,
        truncated: None,
    };
    let record = |run: &mut DeviationRun, s: &[f64], t: f64| {
        let (x, y, xi, eta) = layout.split(s);
        run.times.push(t);
        run.x.push(x.to_vec());
        run.y.push(y.to_vec());
        run.xi.push(xi.to_vec());
        run.xi_dot.push(eta.to_vec());
        run.norms.push(norm2(xi));
    };
    record(&mut run, &state, 0.0);
    for k in 0..steps {
        let t = k as f64 * dt;
        match rk4_step(sode, &layout, &state, t, dt) {
            Ok(next) if next.iter().all(|v| v.is_finite()) => {
                state = next;
                record(&mut run, &state, (k + 1) as f64 * dt);
            }
            Ok(_) => {
                log::warn!("deviation run diverged after t = {t}");
                run.truncated = Some(Truncation {
                    time: t,
                    reason: TruncationReason::NonFinite,
                });
                break;
            }
            Err(e) => {
                log::warn!("deviation run stopped at t = {t}: {e}");
                run.truncated = Some(Truncation {
                    time: t,
                    reason: TruncationReason::Evaluation { message: e.to_string() },
                });
                break;
            }
        }
    }
    run.t2_comparison = focusing_diagnostic(&run, DEFAULT_PROBE).ok();
    Ok(run)
}

/// Compares `‖ξ(t*)‖` (linearly interpolated between samples) with `t*²`.
pub fn focusing_diagnostic(run: &DeviationRun, probe: f64) -> Result<FocusingDiagnostic, DeviationError> {
    let end = run.end_time();
    if !(probe > 0.0 && probe <= end) {
        return Err(DeviationError::ProbeOutOfRange { probe, end });
    }
    let pos = probe / run.dt;
    let lo = (pos.floor() as usize).min(run.len() - 1);
    let hi = (lo + 1).min(run.len() - 1);
    let frac = (pos - lo as f64).clamp(0.0, 1.0);
    let xi: Vec<f64> = run.xi[lo]
        .iter()
        .zip(&run.xi[hi])
        .map(|(a, b)| a + frac * (b - a))
        .collect();
    let norm = norm2(&xi);
    let threshold = probe * probe;
    let diff = norm - threshold;
    let comparison = if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else {
        0
    };
    Ok(FocusingDiagnostic {
        probe,
        norm,
        threshold,
        comparison,
        label: if norm < threshold {
            Focusing::Bunching
        } else {
            Focusing::Dispersing
        },
    })
}

/// `y0 = f(x0)` for lifted systems, so the second-order trajectory follows
/// the original flow.
pub fn default_velocity(sode: &Sode, x0: &[f64]) -> Option<Vec<f64>> {
    sode.source_field().and_then(|f| f.eval(x0).ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odesys::VectorField;

    fn harmonic() -> Sode {
        Sode::lift(&VectorField::parse("harmonic", &["x1", "x2"], &["x2", "-x1"]).unwrap())
    }

    fn harmonic_error(dt: f64) -> f64 {
        let run = integrate(&harmonic(), &[1.0, 0.0], &[0.0, -1.0], &[1.0, 0.0], 1.0, dt).unwrap();
        run.times
            .iter()
            .zip(&run.xi)
            .map(|(t, xi)| (xi[0] - t.sin()).abs().max((xi[1] - (t.cos() - 1.0)).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn harmonic_closed_form() {
        let run = integrate(&harmonic(), &[1.0, 0.0], &[0.0, -1.0], &[1.0, 0.0], 1.0, 1e-3).unwrap();
        assert_eq!(run.len(), 1001);
        assert_eq!(run.xi[0], vec![0.0, 0.0]);
        assert_eq!(run.xi_dot[0], vec![1.0, 0.0]);
        let last = run.xi.last().unwrap();
        assert!((last[0] - 1f64.sin()).abs() < 1e-6);
        assert!((last[1] - (1f64.cos() - 1.0)).abs() < 1e-6);
        assert!(run.truncated.is_none());
    }

    #[test]
    fn fourth_order_convergence() {
        let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&dt| harmonic_error(dt)).collect();
        for pair in errors.windows(2) {
            assert!(pair[0] / pair[1] >= 12.0, "{errors:?}");
            assert!((pair[0] / pair[1]).log2() >= 3.5);
        }
    }

    #[test]
    fn free_motion_and_diagnostic() {
        let zero = Sode::lift(&VectorField::parse("zero", &["a", "b"], &["0", "0"]).unwrap());
        let run = integrate(&zero, &[0.0, 0.0], &[0.0, 0.0], &[0.6, 0.8], 1.0, 1e-2).unwrap();
        for (t, n) in run.times.iter().zip(&run.norms) {
            assert!((n - t).abs() < 1e-12);
        }
        let d = focusing_diagnostic(&run, 0.1).unwrap();
        assert_eq!(d.label, Focusing::Dispersing);
        assert_eq!(d.comparison, 1);
        assert!((d.norm - 0.1).abs() < 1e-12);
        assert!(focusing_diagnostic(&run, 2.0).is_err());
        assert_eq!(run.t2_comparison.as_ref().unwrap().label, Focusing::Dispersing);
    }

    #[test]
    fn harmonic_probe() {
        let run = integrate(&harmonic(), &[1.0, 0.0], &[0.0, -1.0], &[1.0, 0.0], 0.5, 1e-3).unwrap();
        let d = focusing_diagnostic(&run, 0.1).unwrap();
        assert!((d.norm - (2.0 - 2.0 * 0.1f64.cos()).sqrt()).abs() < 1e-9);
        assert_eq!(d.label, Focusing::Dispersing);
    }

    #[test]
    fn preconditions() {
        let s = harmonic();
        let ok = |w: &[f64], t_end, dt| integrate(&s, &[1.0, 0.0], &[0.0, -1.0], w, t_end, dt);
        assert_eq!(ok(&[0.0, 0.0], 1.0, 0.1), Err(DeviationError::ZeroDisplacement));
        assert_eq!(ok(&[1.0, 0.0], 1.0, 0.0), Err(DeviationError::InvalidStep(0.0)));
        assert_eq!(ok(&[1.0, 0.0], 0.01, 0.1), Err(DeviationError::InvalidHorizon(0.01)));
        assert!(matches!(ok(&[1.0], 1.0, 0.1), Err(DeviationError::Dimension { .. })));
    }

    #[test]
    fn domain_error_truncates() {
        // x leaves the domain of ln at t = 1
        let f = VectorField::parse("ln", &["x"], &["-1 + 0*ln(x)"]).unwrap();
        let s = Sode::lift(&f);
        let y0 = default_velocity(&s, &[1.0]).unwrap();
        let run = integrate(&s, &[1.0], &y0, &[1.0], 2.0, 0.01).unwrap();
        let cut = run.truncated.as_ref().unwrap();
        assert!(matches!(cut.reason, TruncationReason::Evaluation { .. }));
        assert!(cut.time < 1.0 && cut.time > 0.9);
        assert_eq!(run.len(), run.x.len());
    }

    #[test]
    fn divergence_truncates() {
        let s = Sode::parse(&["-y1^2"]).unwrap();
        let run = integrate(&s, &[0.0], &[1.0], &[1.0], 5.0, 0.01).unwrap();
        assert_eq!(run.truncated.as_ref().unwrap().reason, TruncationReason::NonFinite);
    }

    #[test]
    fn csv_layout() {
        let run = integrate(&harmonic(), &[1.0, 0.0], &[0.0, -1.0], &[1.0, 0.0], 0.02, 0.01).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,y1,y2,xi1,xi2,norm");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1,0,0,-1,0,0,0"));
    }
}
