//! Central finite differences for opaque `G(x, y, t)`.
//!
//! Everything works on the flattened phase point `z = (x, y, t)`. Steps are
//! relative: `h = ε^{1/3}·max(1, |z_a|)` for first derivatives and
//! `h = ε^{1/4}·max(1, |z_a|)` for second derivatives. The third to fifth
//! invariants difference the second-order quantities again with coarser
//! steps, so they are only accurate to roughly `1e-4` relative.

use super::{deviation_from_geometry, KccError, LocalGeometry};
use crate::linalg::{Matrix, Tensor3, Tensor4};

pub fn first_step(c: f64) -> f64 {
    f64::EPSILON.cbrt() * c.abs().max(1.0)
}

pub fn second_step(c: f64) -> f64 {
    f64::EPSILON.powf(0.25) * c.abs().max(1.0)
}

fn coarse_step(c: f64, root: f64) -> f64 {
    f64::EPSILON.powf(1.0 / root) * c.abs().max(1.0)
}

type Eval<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>, KccError> + 'a;

fn shifted(z: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut w = z.to_vec();
    for &(a, d) in moves {
        w[a] += d;
    }
    w
}

fn combine(terms: &[(f64, Vec<f64>)]) -> Vec<f64> {
    let mut out = vec![0.0; terms[0].1.len()];
    for (w, v) in terms {
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// `∂F/∂z_a` with an explicit step.
fn partial_with<F>(eval: &F, z: &[f64], a: usize, h: f64) -> Result<Vec<f64>, KccError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, KccError> + ?Sized,
{
    let plus = eval(&shifted(z, &[(a, h)]))?;
    let minus = eval(&shifted(z, &[(a, -h)]))?;
    Ok(combine(&[(0.5 / h, plus), (-0.5 / h, minus)]))
}

/// `∂²F/∂z_a∂z_b` with explicit steps.
fn second_with<F>(eval: &F, z: &[f64], a: usize, b: usize, ha: f64, hb: f64) -> Result<Vec<f64>, KccError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, KccError> + ?Sized,
{
    if a == b {
        let plus = eval(&shifted(z, &[(a, ha)]))?;
        let mid = eval(z)?;
        let minus = eval(&shifted(z, &[(a, -ha)]))?;
        let w = 1.0 / (ha * ha);
        return Ok(combine(&[(w, plus), (-2.0 * w, mid), (w, minus)]));
    }
    let w = 0.25 / (ha * hb);
    let pp = eval(&shifted(z, &[(a, ha), (b, hb)]))?;
    let pm = eval(&shifted(z, &[(a, ha), (b, -hb)]))?;
    let mp = eval(&shifted(z, &[(a, -ha), (b, hb)]))?;
    let mm = eval(&shifted(z, &[(a, -ha), (b, -hb)]))?;
    Ok(combine(&[(w, pp), (-w, pm), (-w, mp), (w, mm)]))
}

fn second<F>(eval: &F, z: &[f64], a: usize, b: usize) -> Result<Vec<f64>, KccError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, KccError> + ?Sized,
{
    second_with(eval, z, a, b, second_step(z[a]), second_step(z[b]))
}

/// `(∂G/∂x, ∂G/∂y)`.
pub(super) fn first_blocks(eval: &Eval<'_>, z: &[f64], n: usize) -> Result<(Matrix, Matrix), KccError> {
    let mut dg_dx = Matrix::zeros(n, n);
    let mut conn = Matrix::zeros(n, n);
    for j in 0..n {
        let dx = partial_with(eval, z, j, first_step(z[j]))?;
        let dy = partial_with(eval, z, n + j, first_step(z[n + j]))?;
        for i in 0..n {
            dg_dx[(i, j)] = dx[i];
            conn[(i, j)] = dy[i];
        }
    }
    Ok((dg_dx, conn))
}

pub(super) fn local_geometry(eval: &Eval<'_>, z: &[f64], n: usize) -> Result<LocalGeometry, KccError> {
    let g = eval(z)?;
    let (dg_dx, connection) = first_blocks(eval, z, n)?;
    let mut berwald = Tensor3::zeros(n);
    let mut dn_dx = Tensor3::zeros(n);
    for j in 0..n {
        for l in 0..n {
            let yy = second(eval, z, n + j, n + l)?;
            let yx = second(eval, z, n + j, l)?;
            for i in 0..n {
                berwald.set(i, j, l, yy[i]);
                dn_dx.set(i, j, l, yx[i]);
            }
        }
    }
    let mut dn_dt = Matrix::zeros(n, n);
    for j in 0..n {
        let yt = second(eval, z, n + j, 2 * n)?;
        for i in 0..n {
            dn_dt[(i, j)] = yt[i];
        }
    }
    Ok(LocalGeometry {
        g,
        dg_dx,
        connection,
        berwald,
        dn_dx,
        dn_dt,
    })
}

/// Torsion, curvature and Douglas tensors by differencing `P` and the
/// Berwald connection in `y`.
pub(super) fn higher_invariants(
    eval: &Eval<'_>,
    z: &[f64],
    n: usize,
) -> Result<(Tensor3, Tensor4, Tensor4), KccError> {
    let deviation = |w: &[f64]| -> Result<Vec<f64>, KccError> {
        let geo = local_geometry(eval, w, n)?;
        Ok(deviation_from_geometry(&geo, &w[n..2 * n]).as_slice().to_vec())
    };
    let berwald = |w: &[f64]| -> Result<Vec<f64>, KccError> {
        Ok(local_geometry(eval, w, n)?.berwald.as_slice().to_vec())
    };

    let mut dp = Vec::with_capacity(n);
    let mut db = Vec::with_capacity(n);
    for k in 0..n {
        let h = coarse_step(z[n + k], 6.0);
        dp.push(partial_with(&deviation, z, n + k, h)?);
        db.push(partial_with(&berwald, z, n + k, h)?);
    }
    let mut ddp = vec![Vec::new(); n * n];
    for k in 0..n {
        for l in k..n {
            let hk = coarse_step(z[n + k], 8.0);
            let hl = coarse_step(z[n + l], 8.0);
            let d = second_with(&deviation, z, n + k, n + l, hk, hl)?;
            ddp[k * n + l] = d.clone();
            ddp[l * n + k] = d;
        }
    }

    let mut torsion = Tensor3::zeros(n);
    let mut curvature = Tensor4::zeros(n);
    let mut douglas = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                torsion.set(i, j, k, (dp[k][i * n + j] - dp[j][i * n + k]) / 3.0);
                for l in 0..n {
                    let c = (ddp[k * n + l][i * n + j] - ddp[j * n + l][i * n + k]) / 3.0;
                    curvature.set(i, j, k, l, c);
                    douglas.set(i, j, k, l, db[l][(i * n + j) * n + k]);
                }
            }
        }
    }
    Ok((torsion, curvature, douglas))
}
