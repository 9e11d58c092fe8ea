use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovClass {
    StableNode,
    UnstableNode,
    Saddle,
    StableFocus,
    UnstableFocus,
    SaddleFocus,
    Center,
    NonHyperbolic,
}

impl LyapunovClass {
    pub fn label(self) -> &'static str {
        match self {
            Self::StableNode => "stable-node",
            Self::UnstableNode => "unstable-node",
            Self::Saddle => "saddle",
            Self::StableFocus => "stable-focus",
            Self::UnstableFocus => "unstable-focus",
            Self::SaddleFocus => "saddle-focus",
            Self::Center => "center",
            Self::NonHyperbolic => "non-hyperbolic",
        }
    }

    /// Linear (Lyapunov) asymptotic stability.
    pub fn is_stable(self) -> bool {
        matches!(self, Self::StableNode | Self::StableFocus)
    }
}

impl fmt::Display for LyapunovClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobiVerdict {
    #[serde(rename = "Jacobi-stable")]
    Stable,
    #[serde(rename = "Jacobi-unstable")]
    Unstable,
    Indeterminate,
}

impl JacobiVerdict {
    pub fn label(self) -> &'static str {
        match self {
            Self::Stable => "Jacobi-stable",
            Self::Unstable => "Jacobi-unstable",
            Self::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for JacobiVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Linear classification of a fixed point from its Jacobian spectrum.
///
/// Centers are reported when every eigenvalue on the imaginary axis is
/// non-real; a (numerically) zero eigenvalue gives `NonHyperbolic`.
pub fn lyapunov_classify(eigs: &[Complex64], tol: f64) -> LyapunovClass {
    let on_axis: Vec<&Complex64> = eigs.iter().filter(|z| z.re.abs() <= tol).collect();
    if !on_axis.is_empty() {
        return if on_axis.iter().all(|z| z.im.abs() > tol) {
            LyapunovClass::Center
        } else {
            LyapunovClass::NonHyperbolic
        };
    }
    let positive = eigs.iter().filter(|z| z.re > 0.0).count();
    let oscillating = eigs.iter().any(|z| z.im.abs() > tol);
    match (positive, oscillating) {
        (0, false) => LyapunovClass::StableNode,
        (0, true) => LyapunovClass::StableFocus,
        (p, false) if p == eigs.len() => LyapunovClass::UnstableNode,
        (p, true) if p == eigs.len() => LyapunovClass::UnstableFocus,
        (_, false) => LyapunovClass::Saddle,
        (_, true) => LyapunovClass::SaddleFocus,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiAssessment {
    pub verdict: JacobiVerdict,
    /// `maxⱼ Re(λⱼ²) = maxⱼ (αⱼ² − βⱼ²)`
    pub margin: f64,
    /// `{λⱼ²/4}`, the spectrum of the deviation tensor at the fixed point.
    pub spectrum: Vec<Complex64>,
    /// `n = 3` with a complex pair satisfying `α² < β²`.
    pub saddle_focus: bool,
}

/// Jacobi classification of a fixed point of a lifted `n`-dimensional system.
pub fn jacobi_classify(eigs: &[Complex64], n: usize, tol: f64) -> JacobiAssessment {
    let squares: Vec<Complex64> = eigs.iter().map(|z| z * z).collect();
    let margin = squares.iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max);
    let verdict = if squares.iter().any(|s| s.re > tol) {
        JacobiVerdict::Unstable
    } else if squares.iter().any(|s| s.re.abs() <= tol) {
        JacobiVerdict::Indeterminate
    } else if n.is_multiple_of(2) && eigs.iter().all(|z| z.im.abs() > tol) {
        JacobiVerdict::Stable
    } else {
        JacobiVerdict::Indeterminate
    };
    let mut spectrum: Vec<Complex64> = squares.iter().map(|s| s * 0.25).collect();
    spectrum.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let saddle_focus = n == 3 && eigs.iter().any(|z| z.im.abs() > tol && z.re * z.re - z.im * z.im < 0.0);
    JacobiAssessment {
        verdict,
        margin: if squares.is_empty() { 0.0 } else { margin },
        spectrum,
        saddle_focus,
    }
}
