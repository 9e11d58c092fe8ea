//! Human-readable number formatting (6 significant digits, `%g` style).

use kcc_core::linalg::{Matrix, Tensor3, Tensor4};
use num_complex::Complex64;

pub const SIGNIFICANT: usize = 6;

/// `%g`-like rendering with [`SIGNIFICANT`] digits and trailing zeros trimmed.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else if z.re == 0.0 {
        format!("{}i", num(z.im))
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", num(z.re), num(z.im.abs()))
    }
}

pub fn list(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(", ")
}

pub fn vector(values: &[f64]) -> String {
    format!("({})", list(values))
}

pub fn complex_list(values: &[Complex64]) -> String {
    values.iter().map(|&z| complex(z)).collect::<Vec<_>>().join(", ")
}

pub fn matrix(m: &Matrix) -> String {
    let rows: Vec<String> = (0..m.rows()).map(|i| format!("[{}]", list(m.row(i)))).collect();
    format!("[{}]", rows.join(", "))
}

/// One line per leading index `i`, each a `[j][k]` matrix.
pub fn tensor3_lines(t: &Tensor3) -> Vec<String> {
    let n = t.dim();
    (0..n)
        .map(|i| {
            let slice = Matrix::from_fn(n, n, |j, k| t.get(i, j, k));
            format!("[{}] {}", i + 1, matrix(&slice))
        })
        .collect()
}

/// One line per leading pair `(i, j)`, each a `[k][l]` matrix.
pub fn tensor4_lines(t: &Tensor4) -> Vec<String> {
    let n = t.dim();
    let mut lines = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let slice = Matrix::from_fn(n, n, |k, l| t.get(i, j, k, l));
            lines.push(format!("[{}][{}] {}", i + 1, j + 1, matrix(&slice)));
        }
    }
    lines
}
