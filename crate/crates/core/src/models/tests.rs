use super::*;
use crate::kcc::{deviation_tensor_lifted, Sode};
use crate::linalg::Matrix;
use crate::stability::{analyze_fixed_point, eigenvalues, JacobiVerdict, LyapunovClass, Tolerances};

#[test]
fn lcdm_evaluations() {
    let f = lcdm_system();
    assert_eq!(f.eval(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    assert_eq!(f.eval(&[0.5, 0.0]).unwrap(), vec![-0.25, 0.0]);
    assert_eq!(f.eval(&[0.5, 0.5]).unwrap(), vec![-1.0, 1.0]);
    for (x, y) in [(0.3, 0.4), (-1.0, 2.0)] {
        let j = f.jacobian(&[x, y]).unwrap().entries;
        let want = Matrix::from_rows(&[[-1.0 + 2.0 * x - 3.0 * y, -3.0 * x], [y, 3.0 + x - 6.0 * y]]);
        assert!(j.max_abs_diff(&want) < 1e-14);
    }
}

#[test]
fn laplacian_examples() {
    let edge = AdjacencyGraph::new(2, [(0, 1)]).unwrap();
    assert_eq!(laplacian(&edge), Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]));
    let e = eigenvalues(&laplacian(&edge)).unwrap();
    assert!((e[0].re).abs() < 1e-14 && (e[1].re - 2.0).abs() < 1e-14);
    assert_eq!(laplacian(&AdjacencyGraph::new(4, []).unwrap()), Matrix::zeros(4, 4));
    let tri = laplacian(&AdjacencyGraph::complete(3));
    assert_eq!(
        tri,
        Matrix::from_rows(&[[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]])
    );
    let e = eigenvalues(&tri).unwrap();
    assert!(e[0].norm() < 1e-6 && (e[1].re - 3.0).abs() < 1e-6 && (e[2].re - 3.0).abs() < 1e-6);
}

#[test]
fn graph_parsing() {
    let g = AdjacencyGraph::parse("4\n0 1\n1 2 # chain\n\n2 3\n").unwrap();
    assert_eq!(g, AdjacencyGraph::path(4));
    assert!(AdjacencyGraph::parse("2\n0 0\n").is_err());
    assert!(AdjacencyGraph::parse("2\n0 5\n").is_err());
    assert!(AdjacencyGraph::parse("x\n").is_err());
    assert!(AdjacencyGraph::parse("3\n0 1 2\n").is_err());
}

#[test]
fn network_examples() {
    let g = AdjacencyGraph::path(3);
    let decoupled = NetworkSpec::parse(g.clone(), &["x1^2", "sin(x2)", "x3*x1"], &["x1", "x2", "x3"], 0.0).unwrap();
    let field = network_system(&decoupled).unwrap();
    for (c, f) in field.components().iter().zip(&decoupled.evolution) {
        assert_eq!(c, f);
    }

    let linear = NetworkSpec::parse(g.clone(), &["0", "0", "0"], &["x1", "x2", "x3"], 0.7).unwrap();
    let field = network_system(&linear).unwrap();
    let want = laplacian(&g).scale(-0.7);
    for x in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5]] {
        assert!(field.jacobian(&x).unwrap().entries.max_abs_diff(&want) < 1e-15);
    }

    let pair = NetworkSpec::parse(AdjacencyGraph::new(2, [(0, 1)]).unwrap(), &["-x1", "-x2"], &["x1", "x2"], 1.0).unwrap();
    let field = network_system(&pair).unwrap();
    assert_eq!(field.jacobian(&[0.0, 0.0]).unwrap().entries, Matrix::from_rows(&[[-2.0, 1.0], [1.0, -2.0]]));
    let r = analyze_fixed_point(&field, &[0.0, 0.0], &Tolerances::default()).unwrap();
    assert!((r.eigenvalues[0].re + 3.0).abs() < 1e-12 && (r.eigenvalues[1].re + 1.0).abs() < 1e-12);
    assert_eq!(r.lyapunov_class, LyapunovClass::StableNode);
    assert_eq!(r.jacobi_verdict, JacobiVerdict::Unstable);

    assert!(NetworkSpec::parse(g, &["x1", "x2"], &["x1", "x2", "x3"], 1.0).is_err());
}

#[test]
fn network_closed_form_matches_generic_path() {
    let spec = path_network_spec();
    let field = network_system(&spec).unwrap();
    let sode = Sode::lift(&field);
    for (x, y) in [([0.3, -0.2, 0.5], [1.0, 0.5, -0.7]), ([1.2, 0.0, -0.9], [0.0, 2.0, 1.0])] {
        let closed = network_deviation_closed_form(&spec, &x, &y).unwrap();
        let generic = sode.deviation_tensor(&x, &y, 0.0).unwrap();
        assert!(closed.max_abs_diff(&generic) < 1e-12);
        assert!(closed.max_abs_diff(&deviation_tensor_lifted(&field, &x, &y).unwrap()) < 1e-12);
    }
}

#[test]
fn translation_examples() {
    let f = lcdm_system();
    let g = translate_to_origin(&f, &[0.0, 1.0]).unwrap();
    assert_eq!(g.eval(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    assert_eq!(g.jacobian(&[0.0, 0.0]).unwrap().entries, Matrix::from_rows(&[[-4.0, 0.0], [1.0, -3.0]]));

    let same = translate_to_origin(&f, &[0.0, 0.0]).unwrap();
    let back = translate_to_origin(&translate_to_origin(&f, &[0.3, -1.7]).unwrap(), &[-0.3, 1.7]).unwrap();
    for p in [[0.1, 0.2], [-3.0, 4.0], [0.9, 0.05]] {
        assert_eq!(same.eval(&p).unwrap(), f.eval(&p).unwrap());
        for (a, b) in back.eval(&p).unwrap().iter().zip(f.eval(&p).unwrap()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
    assert!(translate_to_origin(&f, &[1.0]).is_err());
}

#[test]
fn builtin_registry() {
    let all = builtins();
    assert_eq!(all.len(), BUILTIN_NAMES.len());
    for m in &all {
        assert_eq!(m.search_box.len(), m.field.dimension());
        assert_eq!(m.sample_state.len(), m.field.dimension());
    }
    assert!(builtin("nope").is_none());
}
