use kcc_core::exprdsl::{BinaryOp, Expression, Function, Jet, JetLayout, Node, Scalar};
use kcc_core::kcc::Sode;
use kcc_core::linalg::Matrix;
use kcc_core::models::builtins;
use kcc_core::stability::{descartes_bound, polynomial_roots, CharPoly};
use num_complex::Complex64;
use proptest::prelude::*;

const VARS: [&str; 3] = ["a", "b", "c"];

/// Expression trees that are smooth on the whole sampling box.
fn smooth_node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (-3.0f64..3.0).prop_map(|v| Node::Const((v * 100.0).round() / 100.0)),
        (0usize..3).prop_map(Node::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Node::binary(BinaryOp::Add, l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Node::binary(BinaryOp::Sub, l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Node::binary(BinaryOp::Mul, l, r)),
            (inner.clone(), 0u8..4).prop_map(|(l, p)| Node::binary(BinaryOp::Pow, l, Node::Const(p as f64))),
            inner.clone().prop_map(Node::neg),
            inner.clone().prop_map(|a| Node::call(Function::Sin, a)),
            inner.clone().prop_map(|a| Node::call(Function::Cos, a)),
            inner.prop_map(|a| {
                // exp of a bounded argument keeps values moderate
                Node::call(Function::Exp, Node::call(Function::Sin, a))
            }),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, 3)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn display_round_trips(node in smooth_node(), x in point()) {
        let e = Expression::from_node(node, &VARS).unwrap();
        let reparsed = Expression::parse(&e.to_string(), &VARS).unwrap();
        prop_assert_eq!(e.eval(&x).unwrap().to_bits(), reparsed.eval(&x).unwrap().to_bits());
        prop_assert_eq!(reparsed.to_string(), e.to_string());
    }

    #[test]
    fn jets_agree_with_dual_numbers(node in smooth_node(), x in point()) {
        let e = Expression::from_node(node, &VARS).unwrap();
        let grad = e.gradient(&x).unwrap();
        let hess = e.hessian(&x).unwrap();
        let layout = JetLayout::shared(3, 2);
        let vars: Vec<Jet> = x.iter().enumerate().map(|(i, &v)| Jet::variable(&layout, 2, i, v)).collect();
        let jet = e.eval_scalar(&vars, &(layout.clone(), 2)).unwrap();
        prop_assert!(close(jet.value(), e.eval(&x).unwrap(), 1e-12));
        for i in 0..3 {
            let mut d = [0u8; 3];
            d[i] = 1;
            prop_assert!(close(jet.derivative(&d), grad[i], 1e-10));
            for j in 0..3 {
                let mut d = [0u8; 3];
                d[i] += 1;
                d[j] += 1;
                prop_assert!(close(jet.derivative(&d), hess[(i, j)], 1e-10));
            }
        }
        prop_assert!(hess.is_symmetric());
    }

    #[test]
    fn gradient_matches_finite_differences(node in smooth_node(), x in point()) {
        let e = Expression::from_node(node, &VARS).unwrap();
        let grad = e.gradient(&x).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (e.eval(&xp).unwrap() - e.eval(&xm).unwrap()) / (2.0 * h);
            prop_assert!(close(grad[i], fd, 1e-5), "{} vs {}", grad[i], fd);
        }
    }

    #[test]
    fn descartes_bounds_positive_roots(roots in prop::collection::vec(-4.0f64..4.0, 1..7)) {
        prop_assume!(roots.iter().all(|r| r.abs() > 1e-3));
        let zs: Vec<Complex64> = roots.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        let p = CharPoly::from_roots(&zs);
        let m = descartes_bound(&p);
        let positive = roots.iter().filter(|&&r| r > 0.0).count();
        prop_assert!(positive <= m && (m - positive).is_multiple_of(2), "m = {}, positive = {}", m, positive);
    }

    #[test]
    fn roots_satisfy_the_polynomial(coeffs in prop::collection::vec(-5.0f64..5.0, 1..8)) {
        let mut c = vec![1.0];
        c.extend(coeffs);
        let p = CharPoly::from_coefficients(c).unwrap();
        let roots = polynomial_roots(&p).unwrap();
        prop_assert_eq!(roots.len(), p.degree());
        let n = p.degree() as i32;
        for z in &roots {
            let r = p.eval(*z).norm();
            prop_assert!(r <= 1e-7 * (1.0 + z.norm().powi(n)), "|p({})| = {}", z, r);
        }
    }

    #[test]
    fn lifted_deviation_is_time_independent(t1 in -5.0f64..5.0, t2 in -5.0f64..5.0, x in point(), y in point()) {
        for model in builtins() {
            let n = model.field.dimension();
            let s = Sode::lift(&model.field);
            let a = s.deviation_tensor(&x[..n], &y[..n], t1).unwrap();
            let b = s.deviation_tensor(&x[..n], &y[..n], t2).unwrap();
            prop_assert!(a.max_abs_diff(&b) <= 1e-12);
        }
    }
}

#[test]
fn builtin_jacobians_match_finite_differences() {
    for model in builtins() {
        let f = &model.field;
        let n = f.dimension();
        for k in 0..20 {
            let x: Vec<f64> = model
                .search_box
                .iter()
                .enumerate()
                .map(|(i, &(lo, hi))| lo + (hi - lo) * (((k * 7 + i * 3) % 11) as f64 / 10.0))
                .collect();
            let j = f.jacobian(&x).unwrap().entries;
            let fd = Matrix::from_fn(n, n, |r, c| {
                let h = 1e-6 * x[c].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                (f.eval(&xp).unwrap()[r] - f.eval(&xm).unwrap()[r]) / (2.0 * h)
            });
            let scale = j.max_abs().max(1.0);
            assert!(j.max_abs_diff(&fd) <= 1e-5 * scale, "{} at {x:?}", model.name);
        }
    }
}
