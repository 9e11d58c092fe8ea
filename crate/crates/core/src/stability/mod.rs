//! Fixed points and their Lyapunov and Jacobi classification.

mod classify;
mod eigen;
mod fixed;
mod poly;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::odesys::FieldError;

pub use classify::{jacobi_classify, lyapunov_classify, JacobiAssessment, JacobiVerdict, LyapunovClass};
pub use eigen::{eigenvalues, polynomial_roots, EigenError};
pub use fixed::{
    analyze_fixed_point, analyze_system, find_fixed_points, merge_points, multiset_distance, newton, FixedPointReport,
    FixedPointSearch, SeedFailure, SeedFailureReason, SeedSpec, SystemAnalysis,
};
pub use poly::{
    characteristic_polynomial, descartes_bound, hurwitz_determinants, hurwitz_stable, sign_changes, CharPoly,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum StabilityError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("polynomial has no nonzero coefficient")]
    ZeroPolynomial,
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("not a fixed point: residual {residual:e}")]
    NotAFixedPoint { residual: f64 },
    #[error("deviation spectrum disagrees with squared Jacobian eigenvalues by {deviation:e}")]
    SpectrumMismatch { deviation: f64 },
    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),
}

/// Numerical thresholds used by the fixed-point pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Real parts (and Jacobi margins) below this are treated as zero.
    pub hyperbolic: f64,
    /// Newton convergence on `‖f‖∞`.
    pub residual: f64,
    /// Fixed points closer than this (∞-norm) are merged.
    pub merge: f64,
    /// Largest `‖f(x*)‖∞` accepted by [`analyze_fixed_point`].
    pub fixed_point: f64,
    /// Relative agreement required between the two deviation-spectrum routes.
    pub spectrum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hyperbolic: 1e-9,
            residual: 1e-10,
            merge: 1e-7,
            fixed_point: 1e-8,
            spectrum: 1e-7,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 5] = ["hyperbolic", "residual", "merge", "fixed-point", "spectrum"];

    /// Overrides one threshold by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance {name} must be positive and finite"));
        }
        let slot = match name {
            "hyperbolic" => &mut self.hyperbolic,
            "residual" => &mut self.residual,
            "merge" => &mut self.merge,
            "fixed-point" | "fixed_point" => &mut self.fixed_point,
            "spectrum" => &mut self.spectrum,
            _ => {
                return Err(format!(
                    "unknown tolerance '{name}' (expected one of {})",
                    Self::NAMES.join(", ")
                ))
            }
        };
        *slot = value;
        Ok(())
    }
}

/// Jacobi verdict from the spectrum of a deviation tensor at an arbitrary
/// phase point: stable when every eigenvalue has real part below `−tol`.
pub fn deviation_verdict(
    p: &Matrix,
    tol: f64,
) -> Result<(Vec<num_complex::Complex64>, JacobiVerdict), StabilityError> {
    let spectrum = eigenvalues(p)?;
    let verdict = if spectrum.iter().any(|z| z.re > tol) {
        JacobiVerdict::Unstable
    } else if spectrum.iter().all(|z| z.re < -tol) {
        JacobiVerdict::Stable
    } else {
        JacobiVerdict::Indeterminate
    };
    Ok((spectrum, verdict))
}

#[cfg(test)]
mod tests;
