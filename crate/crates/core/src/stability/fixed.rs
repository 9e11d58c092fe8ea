use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::classify::{jacobi_classify, lyapunov_classify, JacobiVerdict, LyapunovClass};
use super::eigen::polynomial_roots;
use super::poly::{characteristic_polynomial, descartes_bound, hurwitz_determinants, hurwitz_stable};
use super::{StabilityError, Tolerances};
use crate::linalg::{norm_inf, Matrix};
use crate::odesys::VectorField;

const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;

/// Where Newton starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeedSpec {
    Points(Vec<Vec<f64>>),
    /// `per_axis` evenly spaced seeds (inclusive) on each interval.
    Grid { bounds: Vec<(f64, f64)>, per_axis: usize },
}

impl SeedSpec {
    pub fn seeds(&self, dimension: usize) -> Result<Vec<Vec<f64>>, StabilityError> {
        match self {
            SeedSpec::Points(points) => {
                if points.is_empty() {
                    return Err(StabilityError::InvalidSeeds("no seeds given".into()));
                }
                if let Some(p) = points.iter().find(|p| p.len() != dimension) {
                    return Err(StabilityError::InvalidSeeds(format!(
                        "seed has {} coordinates, system has {dimension}",
                        p.len()
                    )));
                }
                Ok(points.clone())
            }
            SeedSpec::Grid { bounds, per_axis } => {
                if bounds.len() != dimension {
                    return Err(StabilityError::InvalidSeeds(format!(
                        "box has {} intervals, system has {dimension}",
                        bounds.len()
                    )));
                }
                if *per_axis == 0 {
                    return Err(StabilityError::InvalidSeeds("grid count must be positive".into()));
                }
                if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
                    return Err(StabilityError::InvalidSeeds("box intervals must satisfy lo <= hi".into()));
                }
                let axes: Vec<Vec<f64>> = bounds
                    .iter()
                    .map(|&(lo, hi)| {
                        if *per_axis == 1 {
                            vec![0.5 * (lo + hi)]
                        } else {
                            (0..*per_axis)
                                .map(|k| lo + (hi - lo) * k as f64 / (*per_axis - 1) as f64)
                                .collect()
                        }
                    })
                    .collect();
                let mut seeds = vec![Vec::new()];
                for axis in &axes {
                    seeds = seeds
                        .into_iter()
                        .flat_map(|s| {
                            axis.iter().map(move |&v| {
                                let mut next = s.clone();
                                next.push(v);
                                next
                            })
                        })
                        .collect();
                }
                Ok(seeds)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeedFailureReason {
    NoConvergence { residual: f64 },
    SingularJacobian,
    /// No damped step reduced the residual.
    Stalled { residual: f64 },
    Evaluation { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: Vec<f64>,
    pub reason: SeedFailureReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSearch {
    /// Distinct fixed points in lexicographic order.
    pub points: Vec<Vec<f64>>,
    pub failures: Vec<SeedFailure>,
}

/// Damped Newton from a single seed.
pub fn newton(vf: &VectorField, seed: &[f64], tol: &Tolerances) -> Result<Vec<f64>, SeedFailure> {
    let fail = |reason| SeedFailure {
        seed: seed.to_vec(),
        reason,
    };
    let eval = |x: &[f64]| vf.eval(x).map_err(|e| fail(SeedFailureReason::Evaluation { message: e.to_string() }));
    let mut x = seed.to_vec();
    let mut f = eval(&x)?;
    let mut residual = norm_inf(&f);
    for _ in 0..MAX_ITERATIONS {
        if !residual.is_finite() {
            break;
        }
        if residual <= tol.residual {
            // one polishing step, skipped at singular points
            if let Ok(step) = newton_step(vf, &x, &f) {
                let polished: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + d).collect();
                if let Ok(fp) = vf.eval(&polished) {
                    if norm_inf(&fp) <= residual {
                        return Ok(polished);
                    }
                }
            }
            return Ok(x);
        }
        let step = newton_step(vf, &x, &f).map_err(fail)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            if let Ok(ft) = vf.eval(&trial) {
                let r = norm_inf(&ft);
                if r < residual {
                    accepted = Some((trial, ft, r));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xn, fnew, r)) => {
                x = xn;
                f = fnew;
                residual = r;
            }
            None => return Err(fail(SeedFailureReason::Stalled { residual })),
        }
    }
    if residual <= tol.residual {
        return Ok(x);
    }
    Err(fail(SeedFailureReason::NoConvergence { residual }))
}

fn newton_step(vf: &VectorField, x: &[f64], f: &[f64]) -> Result<Vec<f64>, SeedFailureReason> {
    let j = vf
        .jacobian(x)
        .map_err(|e| SeedFailureReason::Evaluation { message: e.to_string() })?;
    let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
    j.entries.solve(&rhs).ok_or(SeedFailureReason::SingularJacobian)
}

/// Merges points closer than `tol.merge` in the ∞-norm (first one wins)
/// and sorts lexicographically.
pub fn merge_points(found: impl IntoIterator<Item = Vec<f64>>, tol: &Tolerances) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for p in found {
        let duplicate = points.iter().any(|q| {
            q.iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= tol.merge
        });
        if !duplicate {
            points.push(p);
        }
    }
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points
}

pub fn find_fixed_points(
    vf: &VectorField,
    seeds: &SeedSpec,
    tol: &Tolerances,
) -> Result<FixedPointSearch, StabilityError> {
    let seeds = seeds.seeds(vf.dimension())?;
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for seed in &seeds {
        match newton(vf, seed, tol) {
            Ok(p) => found.push(p),
            Err(f) => {
                log::debug!("seed {:?} abandoned: {:?}", f.seed, f.reason);
                failures.push(f);
            }
        }
    }
    Ok(FixedPointSearch {
        points: merge_points(found, tol),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub location: Vec<f64>,
    pub residual: f64,
    pub jacobian: Matrix,
    /// `[1, a₁, …, aₙ]`
    pub characteristic_polynomial: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub hurwitz: Vec<f64>,
    pub hurwitz_stable: bool,
    pub descartes_bound: usize,
    pub lyapunov_class: LyapunovClass,
    /// `¼A²`
    pub deviation_tensor: Matrix,
    pub jacobi_spectrum: Vec<Complex64>,
    pub jacobi_verdict: JacobiVerdict,
    pub jacobi_margin: f64,
    pub jacobi_saddle_focus: bool,
}

/// Largest distance under a greedy nearest-neighbour matching of two
/// multisets, relative to `max(1, |z|)`.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d / z.norm().max(1.0));
    }
    worst
}

pub fn analyze_fixed_point(
    vf: &VectorField,
    x: &[f64],
    tol: &Tolerances,
) -> Result<FixedPointReport, StabilityError> {
    let residual = norm_inf(&vf.eval(x)?);
    if !(residual <= tol.fixed_point) {
        return Err(StabilityError::NotAFixedPoint { residual });
    }
    let n = vf.dimension();
    let jacobian = vf.jacobian(x)?.entries;
    let poly = characteristic_polynomial(&jacobian)?;
    let eigenvalues = polynomial_roots(&poly)?;
    let hurwitz = hurwitz_determinants(&poly);
    let jacobi = jacobi_classify(&eigenvalues, n, tol.hyperbolic);

    let deviation_tensor = jacobian.matmul(&jacobian).scale(0.25);
    let direct = polynomial_roots(&characteristic_polynomial(&deviation_tensor)?)?;
    let mismatch = multiset_distance(&direct, &jacobi.spectrum);
    if mismatch > tol.spectrum {
        return Err(StabilityError::SpectrumMismatch { deviation: mismatch });
    }

    Ok(FixedPointReport {
        location: x.to_vec(),
        residual,
        characteristic_polynomial: poly.coefficients().to_vec(),
        hurwitz_stable: hurwitz_stable(&poly),
        descartes_bound: descartes_bound(&poly),
        lyapunov_class: lyapunov_classify(&eigenvalues, tol.hyperbolic),
        eigenvalues,
        hurwitz,
        jacobian,
        deviation_tensor,
        jacobi_spectrum: jacobi.spectrum,
        jacobi_verdict: jacobi.verdict,
        jacobi_margin: jacobi.margin,
        jacobi_saddle_focus: jacobi.saddle_focus,
    })
}

/// Fixed points found from `seeds` together with their reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemAnalysis {
    pub reports: Vec<FixedPointReport>,
    pub failures: Vec<SeedFailure>,
}

pub fn analyze_system(
    vf: &VectorField,
    seeds: &SeedSpec,
    tol: &Tolerances,
) -> Result<SystemAnalysis, StabilityError> {
    let search = find_fixed_points(vf, seeds, tol)?;
    let reports = search
        .points
        .iter()
        .map(|p| analyze_fixed_point(vf, p, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SystemAnalysis {
        reports,
        failures: search.failures,
    })
}
