use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StabilityError;
use crate::linalg::Matrix;

/// Monic polynomial `λⁿ + a₁λⁿ⁻¹ + … + aₙ`, stored as `[1, a₁, …, aₙ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharPoly {
    coefficients: Vec<f64>,
}

impl CharPoly {
    /// Normalises by the leading coefficient.
    pub fn from_coefficients(mut coefficients: Vec<f64>) -> Result<Self, StabilityError> {
        let lead = *coefficients.first().ok_or(StabilityError::ZeroPolynomial)?;
        if lead == 0.0 {
            return Err(StabilityError::ZeroPolynomial);
        }
        for c in &mut coefficients {
            *c /= lead;
        }
        Ok(Self { coefficients })
    }

    /// `Π (λ − rₖ)`; imaginary parts of the product are dropped.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k] += ck;
                next[k + 1] -= ck * r;
            }
            c = next;
        }
        Self {
            coefficients: c.into_iter().map(|z| z.re).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `[1, a₁, …, aₙ]`
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `aₖ`, zero outside `0..=n`.
    pub fn a(&self, k: isize) -> f64 {
        if k < 0 {
            return 0.0;
        }
        self.coefficients.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Number of exact-zero trailing coefficients, i.e. the multiplicity of `λ = 0`.
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coefficients[1..].iter().rev().take_while(|&&c| c == 0.0).count()
    }
}

/// Faddeev–LeVerrier: `M₁ = I`, `Mₖ = A·Mₖ₋₁ + aₖ₋₁I`, `aₖ = −tr(A·Mₖ)/k`.
pub fn characteristic_polynomial(a: &Matrix) -> Result<CharPoly, StabilityError> {
    if !a.is_square() {
        return Err(StabilityError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut coefficients = Vec::with_capacity(n + 1);
    coefficients.push(1.0);
    let mut m = Matrix::identity(n);
    for k in 1..=n {
        if k > 1 {
            m = a.matmul(&m).add(&Matrix::identity(n).scale(coefficients[k - 1]));
        }
        let am = a.matmul(&m);
        coefficients.push(-am.trace() / k as f64);
    }
    Ok(CharPoly { coefficients })
}

/// Leading principal minors `D₁…Dₙ` of the Hurwitz matrix `H[i][j] = a_{2j−i}`
/// (1-based), each by its own fraction-free elimination.
pub fn hurwitz_determinants(p: &CharPoly) -> Vec<f64> {
    let n = p.degree();
    let h = Matrix::from_fn(n, n, |i, j| p.a(2 * (j as isize + 1) - (i as isize + 1)));
    (1..=n)
        .map(|k| bareiss_determinant(Matrix::from_fn(k, k, |i, j| h[(i, j)])))
        .collect()
}

/// `aₙ > 0` and every Hurwitz determinant positive.
pub fn hurwitz_stable(p: &CharPoly) -> bool {
    p.degree() == 0 || (p.a(p.degree() as isize) > 0.0 && hurwitz_determinants(p).iter().all(|&d| d > 0.0))
}

fn bareiss_determinant(mut m: Matrix) -> f64 {
    let n = m.rows();
    let mut sign = 1.0;
    let mut prev = 1.0;
    for k in 0..n {
        if m[(k, k)] == 0.0 {
            match (k + 1..n).find(|&r| m[(r, k)] != 0.0) {
                Some(r) => {
                    for j in 0..n {
                        let tmp = m[(k, j)];
                        m[(k, j)] = m[(r, j)];
                        m[(r, j)] = tmp;
                    }
                    sign = -sign;
                }
                None => return 0.0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[(i, j)] = (m[(i, j)] * m[(k, k)] - m[(i, k)] * m[(k, j)]) / prev;
            }
            m[(i, k)] = 0.0;
        }
        prev = m[(k, k)];
    }
    if n == 0 {
        1.0
    } else {
        sign * m[(n - 1, n - 1)]
    }
}

/// Sign changes in a coefficient sequence after dropping zero roots and
/// ignoring zero coefficients.
pub fn sign_changes(coefficients: &[f64]) -> Result<usize, StabilityError> {
    let end = coefficients
        .iter()
        .rposition(|&c| c != 0.0)
        .ok_or(StabilityError::ZeroPolynomial)?;
    let signs: Vec<bool> = coefficients[..=end]
        .iter()
        .filter(|&&c| c != 0.0)
        .map(|&c| c > 0.0)
        .collect();
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

/// Descartes bound `m`: the number of positive real roots is `m`, `m − 2`, ….
pub fn descartes_bound(p: &CharPoly) -> usize {
    sign_changes(&p.coefficients).expect("monic polynomial is nonzero")
}
