//! Normalised Taylor coefficients `g⁽ᵏ⁾(u) / k!` of the elementary functions.
//!
//! Every differentiable scalar type composes elementary functions through
//! these tables, so value and derivative arithmetic stay bit-identical
//! between the dense dual numbers and the truncated jets.

pub(crate) fn sin(u: f64, order: usize) -> Vec<f64> {
    let (s, c) = u.sin_cos();
    let cycle = [s, c, -s, -c];
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(cycle[k % 4] / fact);
    }
    out
}

pub(crate) fn cos(u: f64, order: usize) -> Vec<f64> {
    let (s, c) = u.sin_cos();
    let cycle = [c, -s, -c, s];
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(cycle[k % 4] / fact);
    }
    out
}

pub(crate) fn exp(u: f64, order: usize) -> Vec<f64> {
    let e = u.exp();
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(e / fact);
    }
    out
}

/// Requires `u > 0`.
pub(crate) fn ln(u: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(u.ln());
    let mut power = 1.0;
    for k in 1..=order {
        power *= u;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out.push(sign / (k as f64 * power));
    }
    out
}

/// `1/u`; requires `u != 0`.
pub(crate) fn recip(u: f64, order: usize) -> Vec<f64> {
    let inv = 1.0 / u;
    let mut out = Vec::with_capacity(order + 1);
    let mut term = inv;
    for _ in 0..=order {
        out.push(term);
        term *= -inv;
    }
    out
}

/// `u^n` for integer `n`; requires `u != 0` when `n < 0`.
pub(crate) fn powi(u: f64, n: i32, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        if k > 0 {
            binom *= (n as f64 - (k as f64 - 1.0)) / k as f64;
        }
        if binom == 0.0 {
            out.push(0.0);
        } else {
            out.push(binom * u.powi(n - k as i32));
        }
    }
    out
}

/// `u^p` for real `p`; requires `u > 0` (or `u == 0` with `order == 0`).
pub(crate) fn powf(u: f64, p: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        if k > 0 {
            binom *= (p - (k as f64 - 1.0)) / k as f64;
        }
        out.push(binom * u.powf(p - k as f64));
    }
    out
}

pub(crate) fn sqrt(u: f64, order: usize) -> Vec<f64> {
    let mut out = powf(u, 0.5, order);
    out[0] = u.sqrt();
    out
}

/// Away from zero `|u|` is locally linear.
pub(crate) fn abs(u: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    out[0] = u.abs();
    if order >= 1 {
        out[1] = u.signum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_match_known_series() {
        // exp at 0: 1, 1, 1/2, 1/6
        let e = exp(0.0, 3);
        assert_eq!(e, vec![1.0, 1.0, 0.5, 1.0 / 6.0]);
        // ln at 1: 0, 1, -1/2, 1/3
        let l = ln(1.0, 3);
        assert_eq!(l, vec![0.0, 1.0, -0.5, 1.0 / 3.0]);
        // x^2 at 3: 9, 6, 1, 0
        assert_eq!(powi(3.0, 2, 3), vec![9.0, 6.0, 1.0, 0.0]);
        // 1/x at 2: 1/2, -1/4, 1/8
        assert_eq!(recip(2.0, 2), vec![0.5, -0.25, 0.125]);
    }
}
