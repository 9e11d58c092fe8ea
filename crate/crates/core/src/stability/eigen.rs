//! Polynomial roots by Aberth–Ehrlich simultaneous iteration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::poly::{characteristic_polynomial, CharPoly};
use super::StabilityError;
use crate::linalg::Matrix;

const MAX_SWEEPS: usize = 500;
const REL_STEP: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Error, Serialize, Deserialize)]
#[error("root iteration did not converge in {sweeps} sweeps (max residual {max_residual:e})")]
pub struct EigenError {
    pub sweeps: usize,
    pub best: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Eigenvalues of `a` as roots of its characteristic polynomial, sorted by
/// `(Re, Im)`. Complex roots come out as exact conjugate pairs.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>, StabilityError> {
    let p = characteristic_polynomial(a)?;
    Ok(polynomial_roots(&p)?)
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// Rounding-level bound on `|p(z)|`.
fn rounding_bound(c: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    let s = c.iter().fold(0.0, |acc, &ck| acc * r + ck.abs());
    4.0 * c.len() as f64 * f64::EPSILON * s
}

pub fn polynomial_roots(p: &CharPoly) -> Result<Vec<Complex64>, EigenError> {
    let zeros = p.zero_root_multiplicity();
    let c = &p.coefficients()[..p.degree() + 1 - zeros];
    let m = c.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if m == 1 {
        roots.push(Complex64::new(-c[1], 0.0));
    } else if m > 1 {
        roots.extend(aberth(c)?);
    }
    let mut roots = pair_conjugates(c, roots);
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn aberth(c: &[f64]) -> Result<Vec<Complex64>, EigenError> {
    let m = c.len() - 1;
    let radius = 1.0 + c[1..].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let offset = 0.7;
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / m as f64 + offset))
        .collect();
    let mut done = vec![false; m];
    for _ in 0..MAX_SWEEPS {
        for k in 0..m {
            if done[k] {
                continue;
            }
            let (pv, dp) = horner(c, z[k]);
            if pv.norm() <= rounding_bound(c, z[k]) {
                done[k] = true;
                continue;
            }
            let ratio = pv / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if j != k {
                    repulsion += (z[k] - z[j]).inv();
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() == 0.0 || !denom.is_finite() {
                ratio
            } else {
                ratio / denom
            };
            if !step.is_finite() {
                continue;
            }
            z[k] -= step;
            if step.norm() <= REL_STEP * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    let residuals: Vec<f64> = z.iter().map(|&zk| horner(c, zk).0.norm()).collect();
    Err(EigenError {
        sweeps: MAX_SWEEPS,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        best: z,
        residuals,
    })
}

/// Averages matched conjugate pairs; unmatched or numerically real roots
/// are projected onto the real axis.
fn pair_conjugates(c: &[f64], mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let small = |z: Complex64| 1e-10 * z.norm().max(1.0);
    let n = roots.len();
    let mut fixed = vec![false; n];
    for k in 0..n {
        if fixed[k] {
            continue;
        }
        if roots[k].im.abs() <= small(roots[k]) {
            roots[k].im = 0.0;
            fixed[k] = true;
            continue;
        }
        let target = roots[k].conj();
        let partner = (0..n)
            .filter(|&j| j != k && !fixed[j] && roots[j].im * roots[k].im < 0.0)
            .min_by(|&a, &b| (roots[a] - target).norm().total_cmp(&(roots[b] - target).norm()));
        fixed[k] = true;
        match partner {
            Some(j) => {
                fixed[j] = true;
                let re = 0.5 * (roots[k].re + roots[j].re);
                let im = 0.5 * (roots[k].im.abs() + roots[j].im.abs());
                // a multiple real root split into a spurious pair
                let r = Complex64::new(re, 0.0);
                let as_real = im <= 1e-4 * r.norm().max(1.0)
                    && horner(c, r).0.norm() <= 10.0 * rounding_bound(c, r);
                let im = if as_real { 0.0 } else { im };
                roots[k] = Complex64::new(re, im);
                roots[j] = Complex64::new(re, -im);
            }
            None => roots[k].im = 0.0,
        }
    }
    roots
}
