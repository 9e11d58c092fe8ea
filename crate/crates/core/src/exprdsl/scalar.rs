//! Scalar types an [`Expression`](super::Expression) can be evaluated over.

use super::taylor;

/// Arithmetic needed by the expression evaluator.
///
/// Elementary functions enter through [`Scalar::compose`], which receives the
/// normalised Taylor coefficients `g⁽ᵏ⁾(v)/k!` at the current value `v` for
/// `k = 0..=self.order()`.
pub trait Scalar: Clone {
    /// Whatever a constant needs to know to be shaped like its peers.
    type Shape: Clone;

    fn constant(value: f64, shape: &Self::Shape) -> Self;
    fn value(&self) -> f64;
    /// Highest derivative order carried (0 for plain reals).
    fn order(&self) -> usize;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, k: f64) -> Self;
    fn compose(&self, taylor: &[f64]) -> Self;

    /// Caller guarantees `rhs.value() != 0`.
    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.compose(&taylor::recip(rhs.value(), rhs.order())))
    }
}

impl Scalar for f64 {
    type Shape = ();

    fn constant(value: f64, _: &()) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn order(&self) -> usize {
        0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn compose(&self, taylor: &[f64]) -> Self {
        taylor[0]
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

/// Second-order forward-mode dual number over `n` directions.
///
/// Carries the value, the gradient and the (symmetric) Hessian with respect
/// to the seeded directions. Products only ever fill the upper triangle and
/// mirror it, so the Hessian block is symmetric bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DualScalar {
    value: f64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl DualScalar {
    pub fn constant(value: f64, directions: usize) -> Self {
        Self {
            value,
            first: vec![0.0; directions],
            second: vec![0.0; directions * directions],
        }
    }

    /// The `index`-th seeded direction, evaluated at `value`.
    pub fn variable(value: f64, index: usize, directions: usize) -> Self {
        let mut d = Self::constant(value, directions);
        d.first[index] = 1.0;
        d
    }

    pub fn directions(&self) -> usize {
        self.first.len()
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    /// Row-major `n × n` second-derivative block.
    pub fn second(&self) -> &[f64] {
        &self.second
    }

    pub fn second_at(&self, i: usize, j: usize) -> f64 {
        self.second[i * self.directions() + j]
    }
}

impl Scalar for DualScalar {
    type Shape = usize;

    fn constant(value: f64, shape: &usize) -> Self {
        DualScalar::constant(value, *shape)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn order(&self) -> usize {
        2
    }
    fn add(&self, rhs: &Self) -> Self {
        Self {
            value: self.value + rhs.value,
            first: self.first.iter().zip(&rhs.first).map(|(a, b)| a + b).collect(),
            second: self.second.iter().zip(&rhs.second).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        Self {
            value: self.value - rhs.value,
            first: self.first.iter().zip(&rhs.first).map(|(a, b)| a - b).collect(),
            second: self.second.iter().zip(&rhs.second).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        let n = self.directions();
        let (a, b) = (self.value, rhs.value);
        let first = self
            .first
            .iter()
            .zip(&rhs.first)
            .map(|(ga, gb)| a * gb + b * ga)
            .collect();
        let mut second = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = a * rhs.second[i * n + j]
                    + b * self.second[i * n + j]
                    + (self.first[i] * rhs.first[j] + rhs.first[i] * self.first[j]);
                second[i * n + j] = v;
                second[j * n + i] = v;
            }
        }
        Self {
            value: a * b,
            first,
            second,
        }
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn scale(&self, k: f64) -> Self {
        Self {
            value: self.value * k,
            first: self.first.iter().map(|v| v * k).collect(),
            second: self.second.iter().map(|v| v * k).collect(),
        }
    }
    fn compose(&self, taylor: &[f64]) -> Self {
        let n = self.directions();
        let t1 = taylor[1];
        let t2 = 2.0 * taylor[2];
        let mut second = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = t1 * self.second[i * n + j] + t2 * (self.first[i] * self.first[j]);
                second[i * n + j] = v;
                second[j * n + i] = v;
            }
        }
        Self {
            value: taylor[0],
            first: self.first.iter().map(|g| t1 * g).collect(),
            second,
        }
    }
}
