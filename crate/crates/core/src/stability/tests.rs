use num_complex::Complex64;

use super::*;
use crate::linalg::Matrix;
use crate::odesys::VectorField;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

fn poly(coeffs: &[f64]) -> CharPoly {
    CharPoly::from_coefficients(coeffs.to_vec()).unwrap()
}

fn lcdm() -> VectorField {
    VectorField::parse("lcdm", &["x", "y"], &["-x*(1-x+3*y)", "(3+x-3*y)*y"]).unwrap()
}

fn assert_roots(got: &[Complex64], want: &[Complex64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).norm() <= tol, "{got:?} vs {want:?}");
    }
}

#[test]
fn characteristic_polynomial_examples() {
    let p = characteristic_polynomial(&Matrix::from_rows(&[[2.0, 0.0], [0.0, 3.0]])).unwrap();
    assert_eq!(p.coefficients(), &[1.0, -5.0, 6.0]);
    let p = characteristic_polynomial(&Matrix::from_rows(&[[-4.0, 0.0], [1.0, -3.0]])).unwrap();
    assert_eq!(p.coefficients(), &[1.0, 7.0, 12.0]);
    assert!(characteristic_polynomial(&Matrix::zeros(2, 3)).is_err());
}

#[test]
fn eigenvalue_examples() {
    let rot = eigenvalues(&Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]])).unwrap();
    assert_roots(&rot, &[c(0.0, -1.0), c(0.0, 1.0)], 1e-13);
    assert_eq!(rot[0], rot[1].conj());
    let tri = eigenvalues(&Matrix::from_rows(&[[-4.0, 0.0], [1.0, -3.0]])).unwrap();
    assert_roots(&tri, &real(&[-4.0, -3.0]), 1e-13);
    let diag = eigenvalues(&Matrix::from_rows(&[[-1.0, 0.0], [0.0, 3.0]])).unwrap();
    assert_roots(&diag, &real(&[-1.0, 3.0]), 1e-13);
}

#[test]
fn eigenvalues_handle_zero_and_repeated_roots() {
    let p = poly(&[1.0, 0.0, -1.0, 0.0]);
    assert_eq!(p.zero_root_multiplicity(), 1);
    assert_roots(&polynomial_roots(&p).unwrap(), &real(&[-1.0, 0.0, 1.0]), 1e-13);
    let id = eigenvalues(&Matrix::identity(3).scale(-2.0)).unwrap();
    for z in &id {
        assert_eq!(z.im, 0.0);
        assert!((z.re + 2.0).abs() < 1e-4);
    }
    assert_eq!(eigenvalues(&Matrix::zeros(2, 2)).unwrap(), real(&[0.0, 0.0]));
}

#[test]
fn hurwitz_examples() {
    let p = poly(&[1.0, 3.0, 2.0]);
    assert_eq!(hurwitz_determinants(&p), vec![3.0, 6.0]);
    assert!(hurwitz_stable(&p));
    let p = poly(&[1.0, 7.0, 12.0]);
    assert_eq!(hurwitz_determinants(&p), vec![7.0, 84.0]);
    assert!(hurwitz_stable(&p));
    let p = poly(&[1.0, -1.0, 1.0]);
    assert_eq!(hurwitz_determinants(&p)[0], -1.0);
    assert!(!hurwitz_stable(&p));
    // cubic: D2 = a1 a2 - a3
    let p = poly(&[1.0, 2.0, 3.0, 4.0]);
    let d = hurwitz_determinants(&p);
    assert_eq!(d[0], 2.0);
    assert!((d[1] - 2.0).abs() < 1e-12);
    assert!((d[2] - 8.0).abs() < 1e-12);
}

#[test]
fn descartes_examples() {
    assert_eq!(descartes_bound(&poly(&[1.0, 3.0, 2.0])), 0);
    assert_eq!(descartes_bound(&poly(&[1.0, -3.0, 2.0])), 2);
    assert_eq!(descartes_bound(&poly(&[1.0, 0.0, -1.0, 0.0])), 1);
    assert_eq!(sign_changes(&[0.0, 0.0]), Err(StabilityError::ZeroPolynomial));
}

#[test]
fn lyapunov_examples() {
    let tol = 1e-9;
    assert_eq!(lyapunov_classify(&real(&[-4.0, -3.0]), tol), LyapunovClass::StableNode);
    assert_eq!(lyapunov_classify(&real(&[-1.0, 3.0]), tol), LyapunovClass::Saddle);
    assert_eq!(lyapunov_classify(&real(&[1.0, 4.0]), tol), LyapunovClass::UnstableNode);
    assert_eq!(
        lyapunov_classify(&[c(-3.0, 0.0), c(-1.0, -2.0), c(-1.0, 2.0)], tol),
        LyapunovClass::StableFocus
    );
    assert_eq!(
        lyapunov_classify(&[c(-1.0, -2.0), c(-1.0, 2.0), c(0.5, 0.0)], tol),
        LyapunovClass::SaddleFocus
    );
    assert_eq!(lyapunov_classify(&[c(0.0, -1.0), c(0.0, 1.0)], tol), LyapunovClass::Center);
    assert_eq!(lyapunov_classify(&real(&[0.0, -1.0]), tol), LyapunovClass::NonHyperbolic);
}

#[test]
fn jacobi_examples() {
    let tol = 1e-9;
    let a = jacobi_classify(&[c(-1.0, -2.0), c(-1.0, 2.0)], 2, tol);
    assert_eq!(a.verdict, JacobiVerdict::Stable);
    assert!((a.margin + 3.0).abs() < 1e-12);
    let a = jacobi_classify(&real(&[-4.0, -3.0]), 2, tol);
    assert_eq!(a.verdict, JacobiVerdict::Unstable);
    assert_eq!(a.spectrum, real(&[2.25, 4.0]));
    let a = jacobi_classify(&[c(-1.0, -2.0), c(-1.0, 2.0), c(-0.5, 0.0)], 3, tol);
    assert_ne!(a.verdict, JacobiVerdict::Stable);
    assert!(a.saddle_focus);
    // α² = β² on the boundary
    let a = jacobi_classify(&[c(-1.0, -1.0), c(-1.0, 1.0)], 2, tol);
    assert_eq!(a.verdict, JacobiVerdict::Indeterminate);
}

#[test]
fn lcdm_fixed_points() {
    let f = lcdm();
    let tol = Tolerances::default();
    let search = find_fixed_points(
        &f,
        &SeedSpec::Grid {
            bounds: vec![(0.0, 1.0), (0.0, 1.0)],
            per_axis: 5,
        },
        &tol,
    )
    .unwrap();
    assert_eq!(search.points, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
}

#[test]
fn simple_fixed_points() {
    let tol = Tolerances::default();
    let f = VectorField::parse("sq", &["x"], &["x^2 - 1"]).unwrap();
    let s = find_fixed_points(&f, &SeedSpec::Points(vec![vec![-2.0], vec![2.0]]), &tol).unwrap();
    assert_eq!(s.points.len(), 2);
    assert!((s.points[0][0] + 1.0).abs() < 1e-12 && (s.points[1][0] - 1.0).abs() < 1e-12);
    let lin = VectorField::parse("lin", &["x", "y"], &["2*x - y + 0*3", "x + y"]).unwrap();
    let s = find_fixed_points(&lin, &SeedSpec::Points(vec![vec![5.0, -7.0]]), &tol).unwrap();
    assert_eq!(s.points.len(), 1);
    assert!(s.points[0].iter().all(|v| v.abs() < 1e-12));
    // x² + 1 has no real zero; Newton stalls or runs out
    let none = VectorField::parse("none", &["x"], &["x^2 + 1"]).unwrap();
    let s = find_fixed_points(&none, &SeedSpec::Points(vec![vec![0.0], vec![3.0]]), &tol).unwrap();
    assert!(s.points.is_empty());
    assert_eq!(s.failures.len(), 2);
    assert!(matches!(s.failures[0].reason, SeedFailureReason::SingularJacobian));
    assert!(find_fixed_points(&none, &SeedSpec::Points(vec![]), &tol).is_err());
}

#[test]
fn lcdm_reports() {
    let f = lcdm();
    let tol = Tolerances::default();
    let cases = [
        ([0.0, 1.0], LyapunovClass::StableNode, [2.25, 4.0]),
        ([0.0, 0.0], LyapunovClass::Saddle, [0.25, 2.25]),
        ([1.0, 0.0], LyapunovClass::UnstableNode, [0.25, 4.0]),
    ];
    for (x, class, spectrum) in cases {
        let r = analyze_fixed_point(&f, &x, &tol).unwrap();
        assert_eq!(r.lyapunov_class, class);
        assert_eq!(r.jacobi_verdict, JacobiVerdict::Unstable);
        assert_roots(&r.jacobi_spectrum, &real(&spectrum), 1e-12);
    }
    assert!(matches!(
        analyze_fixed_point(&f, &[0.5, 0.5], &tol),
        Err(StabilityError::NotAFixedPoint { .. })
    ));
}

#[test]
fn tolerance_overrides() {
    let mut t = Tolerances::default();
    t.set("hyperbolic", 1e-6).unwrap();
    assert_eq!(t.hyperbolic, 1e-6);
    assert!(t.set("bogus", 1.0).is_err());
    assert!(t.set("merge", -1.0).is_err());
}

#[test]
fn converged_seed_at_singular_point_is_kept() {
    let f = VectorField::parse("dbl", &["x"], &["x^2"]).unwrap();
    let s = find_fixed_points(&f, &SeedSpec::Points(vec![vec![0.0]]), &Tolerances::default()).unwrap();
    assert_eq!(s.points, vec![vec![0.0]]);
    let r = analyze_fixed_point(&f, &[0.0], &Tolerances::default()).unwrap();
    assert_eq!(r.lyapunov_class, LyapunovClass::NonHyperbolic);
    assert_eq!(r.jacobi_verdict, JacobiVerdict::Indeterminate);
}
