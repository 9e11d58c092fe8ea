//! Second-order systems `ẍⁱ + 2Gⁱ(x, y, t) = 0` and their KCC geometry.
//!
//! Expression-backed systems (including every lifted vector field) are
//! differentiated exactly: each `Gⁱ` is expanded as a truncated Taylor jet in
//! the `2n + 1` phase coordinates `(x, y, t)` and all connection and
//! curvature objects are read off or assembled in jet arithmetic. Opaque
//! callables fall back to central finite differences (see [`fd`]).

mod fd;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprdsl::{EvalError, Expression, Jet, JetLayout, ParseError, Scalar};
use crate::linalg::{Matrix, Tensor3, Tensor4};
use crate::odesys::{FieldError, VectorField};

pub use fd::{first_step, second_step};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum KccError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("G component {index}: {source}")]
    Eval {
        index: usize,
        #[source]
        source: EvalError,
    },
    #[error("G component {index}: {source}")]
    Parse {
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("G expressions must be defined over 2n + 1 = {expected} shared variables (x, y, t)")]
    Variables { expected: usize },
    #[error("G returned a non-finite value at the requested point")]
    NonFinite,
}

/// Opaque `G(x, y, t)`.
pub type GFunction = Arc<dyn Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Obtained by differentiating a first-order field in time.
    Lifted,
    UserSupplied,
}

#[derive(Clone)]
enum Backend {
    Lifted(VectorField),
    Expressions(Vec<Expression>),
    Callable(GFunction),
}

/// A system of second-order ODEs given by its `Gⁱ`.
#[derive(Clone)]
pub struct Sode {
    dimension: usize,
    backend: Backend,
}

impl fmt::Debug for Sode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.backend {
            Backend::Lifted(vf) => format!("lifted from '{}'", vf.name()),
            Backend::Expressions(_) => "expressions".to_string(),
            Backend::Callable(_) => "callable".to_string(),
        };
        f.debug_struct("Sode")
            .field("dimension", &self.dimension)
            .field("backend", &kind)
            .finish()
    }
}

/// Raw derivative data of `G` at one phase point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalGeometry {
    pub g: Vec<f64>,
    /// `∂Gⁱ/∂xʲ`
    pub dg_dx: Matrix,
    /// `Nⁱⱼ = ∂Gⁱ/∂yʲ`
    pub connection: Matrix,
    /// `Gⁱⱼₗ = ∂Nⁱⱼ/∂yˡ`
    pub berwald: Tensor3,
    /// `∂Nⁱⱼ/∂xˡ` stored at `[i][j][l]`
    pub dn_dx: Tensor3,
    /// `∂Nⁱⱼ/∂t`
    pub dn_dt: Matrix,
}

/// The five KCC invariants together with both connections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KccInvariants {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    /// First invariant `εⁱ = 2Gⁱ − Nⁱⱼ yʲ`.
    pub epsilon: Vec<f64>,
    pub connection: Matrix,
    pub berwald: Tensor3,
    /// Deviation curvature tensor `Pⁱⱼ` (second invariant).
    pub deviation: Matrix,
    pub trace: f64,
    /// Third invariant `Pⁱⱼₖ`.
    pub torsion: Tensor3,
    /// Fourth invariant `Pⁱⱼₖₗ`.
    pub curvature: Tensor4,
    /// Fifth invariant `Dⁱⱼₖₗ`.
    pub douglas: Tensor4,
}

impl Sode {
    /// Direct lift: differentiating `ẋ = f(x)` in time gives
    /// `ẍ = J(x)·y`, i.e. `G = −½ J(x)·y`.
    pub fn lift(vf: &VectorField) -> Sode {
        Sode {
            dimension: vf.dimension(),
            backend: Backend::Lifted(vf.clone()),
        }
    }

    /// `Gⁱ` given as expressions over the `2n + 1` variables
    /// `(x¹…xⁿ, y¹…yⁿ, t)`, in that order.
    pub fn from_expressions(components: Vec<Expression>) -> Result<Sode, KccError> {
        let n = components.len();
        let first = components.first().ok_or(KccError::Variables { expected: 1 })?;
        let vars = first.variables();
        if vars.len() != 2 * n + 1 || components.iter().any(|c| c.variables() != vars) {
            return Err(KccError::Variables {
                expected: 2 * n + 1,
            });
        }
        Ok(Sode {
            dimension: n,
            backend: Backend::Expressions(components),
        })
    }

    /// Parses `Gⁱ` sources over variables `x1…xn, y1…yn, t`.
    pub fn parse<S: AsRef<str>>(sources: &[S]) -> Result<Sode, KccError> {
        let n = sources.len();
        let vars = phase_variable_names(n);
        let components = sources
            .iter()
            .enumerate()
            .map(|(index, s)| {
                Expression::parse(s.as_ref(), &vars).map_err(|source| KccError::Parse { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_expressions(components)
    }

    pub fn from_fn(
        dimension: usize,
        g: impl Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Sode {
        Sode {
            dimension,
            backend: Backend::Callable(Arc::new(g)),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn provenance(&self) -> Provenance {
        match self.backend {
            Backend::Lifted(_) => Provenance::Lifted,
            _ => Provenance::UserSupplied,
        }
    }

    /// The first-order field a lifted system came from.
    pub fn source_field(&self) -> Option<&VectorField> {
        match &self.backend {
            Backend::Lifted(vf) => Some(vf),
            _ => None,
        }
    }

    /// True when `G` provably has no explicit time dependence.
    pub fn is_autonomous(&self) -> bool {
        match &self.backend {
            Backend::Lifted(_) => true,
            Backend::Expressions(es) => {
                let t = 2 * self.dimension;
                es.iter().all(|e| !references(e.root(), t))
            }
            Backend::Callable(_) => false,
        }
    }

    fn check(&self, x: &[f64], y: &[f64]) -> Result<(), KccError> {
        let n = self.dimension;
        for (what, v) in [("state x", x), ("velocity y", y)] {
            if v.len() != n {
                return Err(KccError::Dimension {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    pub fn g(&self, x: &[f64], y: &[f64], t: f64) -> Result<Vec<f64>, KccError> {
        self.check(x, y)?;
        match &self.backend {
            Backend::Lifted(vf) => {
                let j = vf.jacobian(x)?;
                Ok(j.entries.matvec(y).into_iter().map(|v| -0.5 * v).collect())
            }
            Backend::Expressions(es) => {
                let z = phase_point(x, y, t);
                es.iter()
                    .enumerate()
                    .map(|(index, e)| e.eval(&z).map_err(|source| KccError::Eval { index, source }))
                    .collect()
            }
            Backend::Callable(f) => self.call(f, x, y, t),
        }
    }

    fn call(&self, f: &GFunction, x: &[f64], y: &[f64], t: f64) -> Result<Vec<f64>, KccError> {
        let out = f(x, y, t);
        if out.len() != self.dimension {
            return Err(KccError::Dimension {
                what: "G output",
                expected: self.dimension,
                got: out.len(),
            });
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(KccError::NonFinite);
        }
        Ok(out)
    }

    /// `Gⁱ` as jets of `order` over `(x, y, t)`; `None` for callables.
    fn g_jets(&self, x: &[f64], y: &[f64], t: f64, order: usize) -> Result<Option<Vec<Jet>>, KccError> {
        self.check(x, y)?;
        let n = self.dimension;
        let m = 2 * n + 1;
        match &self.backend {
            Backend::Lifted(vf) => {
                let layout = JetLayout::shared(m, order + 1);
                let f = vf.eval_jets(x, &layout, order + 1)?;
                let ys: Vec<Jet> = (0..n)
                    .map(|k| Jet::variable(&layout, order, n + k, y[k]))
                    .collect();
                let g = f
                    .iter()
                    .map(|fi| {
                        let mut acc = Jet::constant(&layout, order, 0.0);
                        for (k, yk) in ys.iter().enumerate() {
                            acc = acc.add(&fi.partial(k).mul(yk));
                        }
                        acc.scale(-0.5)
                    })
                    .collect();
                Ok(Some(g))
            }
            Backend::Expressions(es) => {
                let layout = JetLayout::shared(m, order);
                let z: Vec<Jet> = phase_point(x, y, t)
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| Jet::variable(&layout, order, i, v))
                    .collect();
                let shape = (layout.clone(), order);
                es.iter()
                    .enumerate()
                    .map(|(index, e)| {
                        e.eval_scalar(&z, &shape)
                            .map_err(|source| KccError::Eval { index, source })
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some)
            }
            Backend::Callable(_) => Ok(None),
        }
    }

    fn callable(&self) -> Option<&GFunction> {
        match &self.backend {
            Backend::Callable(f) => Some(f),
            _ => None,
        }
    }

    /// `G`, `∂G/∂x` and `N`: everything the Jacobi equation needs.
    pub fn first_order(&self, x: &[f64], y: &[f64], t: f64) -> Result<(Vec<f64>, Matrix, Matrix), KccError> {
        let n = self.dimension;
        if let Some(f) = self.callable() {
            let eval = |z: &[f64]| self.call(f, &z[..n], &z[n..2 * n], z[2 * n]);
            let z = phase_point(x, y, t);
            let g = eval(&z)?;
            let (dg_dx, conn) = fd::first_blocks(&eval, &z, n)?;
            return Ok((g, dg_dx, conn));
        }
        let jets = self.g_jets(x, y, t, 1)?.expect("expression-backed");
        let g = jets.iter().map(|j| j.value()).collect();
        let dg_dx = Matrix::from_fn(n, n, |i, j| jets[i].partial(j).value());
        let conn = Matrix::from_fn(n, n, |i, j| jets[i].partial(n + j).value());
        Ok((g, dg_dx, conn))
    }

    pub fn local_geometry(&self, x: &[f64], y: &[f64], t: f64) -> Result<LocalGeometry, KccError> {
        let n = self.dimension;
        if let Some(f) = self.callable() {
            let eval = |z: &[f64]| self.call(f, &z[..n], &z[n..2 * n], z[2 * n]);
            return fd::local_geometry(&eval, &phase_point(x, y, t), n);
        }
        let jets = self.g_jets(x, y, t, 2)?.expect("expression-backed");
        let geo = JetGeometry::new(&jets, y, n);
        Ok(geo.values())
    }

    pub fn nonlinear_connection(&self, x: &[f64], y: &[f64], t: f64) -> Result<Matrix, KccError> {
        Ok(self.first_order(x, y, t)?.2)
    }

    pub fn berwald(&self, x: &[f64], y: &[f64], t: f64) -> Result<Tensor3, KccError> {
        Ok(self.local_geometry(x, y, t)?.berwald)
    }

    pub fn first_invariant(&self, x: &[f64], y: &[f64], t: f64) -> Result<Vec<f64>, KccError> {
        let (g, _, conn) = self.first_order(x, y, t)?;
        Ok(first_invariant_from(&g, &conn, y))
    }

    /// Deviation curvature tensor from the full five-term formula.
    pub fn deviation_tensor(&self, x: &[f64], y: &[f64], t: f64) -> Result<Matrix, KccError> {
        Ok(deviation_from_geometry(&self.local_geometry(x, y, t)?, y))
    }

    /// Third, fourth and fifth invariants.
    pub fn higher_invariants(
        &self,
        x: &[f64],
        y: &[f64],
        t: f64,
    ) -> Result<(Tensor3, Tensor4, Tensor4), KccError> {
        let inv = self.invariants(x, y, t)?;
        Ok((inv.torsion, inv.curvature, inv.douglas))
    }

    /// All KCC objects at `(x, y, t)`.
    pub fn invariants(&self, x: &[f64], y: &[f64], t: f64) -> Result<KccInvariants, KccError> {
        let n = self.dimension;
        let (geometry, deviation, torsion, curvature, douglas) = match self.callable() {
            Some(f) => {
                let eval = |z: &[f64]| self.call(f, &z[..n], &z[n..2 * n], z[2 * n]);
                let z = phase_point(x, y, t);
                let geometry = fd::local_geometry(&eval, &z, n)?;
                let deviation = deviation_from_geometry(&geometry, y);
                let (torsion, curvature, douglas) = fd::higher_invariants(&eval, &z, n)?;
                (geometry, deviation, torsion, curvature, douglas)
            }
            None => {
                let jets = self.g_jets(x, y, t, 4)?.expect("expression-backed");
                let geo = JetGeometry::new(&jets, y, n);
                let p = geo.deviation();
                let mut torsion = Tensor3::zeros(n);
                let mut torsion_jets = Vec::with_capacity(n * n * n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let a = p[i * n + j].partial(n + k);
                            let b = p[i * n + k].partial(n + j);
                            let t3 = a.sub(&b).scale(1.0 / 3.0);
                            torsion.set(i, j, k, t3.value());
                            torsion_jets.push(t3);
                        }
                    }
                }
                let mut curvature = Tensor4::zeros(n);
                let mut douglas = Tensor4::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let t3 = &torsion_jets[(i * n + j) * n + k];
                                curvature.set(i, j, k, l, t3.partial(n + l).value());
                                let b = &geo.berwald[(i * n + j) * n + k];
                                douglas.set(i, j, k, l, b.partial(n + l).value());
                            }
                        }
                    }
                }
                let deviation = Matrix::from_fn(n, n, |i, j| p[i * n + j].value());
                (geo.values(), deviation, torsion, curvature, douglas)
            }
        };
        let epsilon = first_invariant_from(&geometry.g, &geometry.connection, y);
        let trace = deviation.trace();
        Ok(KccInvariants {
            x: x.to_vec(),
            y: y.to_vec(),
            t,
            epsilon,
            connection: geometry.connection,
            berwald: geometry.berwald,
            deviation,
            trace,
            torsion,
            curvature,
            douglas,
        })
    }
}

/// `x1…xn, y1…yn, t`.
pub fn phase_variable_names(n: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("y{i}")))
        .chain(std::iter::once("t".to_string()))
        .collect()
}

fn phase_point(x: &[f64], y: &[f64], t: f64) -> Vec<f64> {
    let mut z = Vec::with_capacity(x.len() * 2 + 1);
    z.extend_from_slice(x);
    z.extend_from_slice(y);
    z.push(t);
    z
}

fn references(node: &crate::exprdsl::Node, var: usize) -> bool {
    use crate::exprdsl::Node;
    match node {
        Node::Const(_) => false,
        Node::Var(i) => *i == var,
        Node::Neg(a) => references(a, var),
        Node::Binary { lhs, rhs, .. } => references(lhs, var) || references(rhs, var),
        Node::Call { arg, .. } => references(arg, var),
    }
}

fn first_invariant_from(g: &[f64], conn: &Matrix, y: &[f64]) -> Vec<f64> {
    let ny = conn.matvec(y);
    g.iter().zip(ny).map(|(gi, nyi)| 2.0 * gi - nyi).collect()
}

/// `Pⁱⱼ = −2∂Gⁱ/∂xʲ − 2GˡGⁱⱼₗ + yˡ∂Nⁱⱼ/∂xˡ + NⁱₗNˡⱼ + ∂Nⁱⱼ/∂t`, flattened
/// row-major. Inputs are flattened the same way as [`LocalGeometry`].
#[allow(clippy::too_many_arguments)]
fn assemble_deviation<S: Scalar>(
    n: usize,
    g: &[S],
    dg_dx: &[S],
    conn: &[S],
    berwald: &[S],
    dn_dx: &[S],
    dn_dt: &[S],
    y: &[S],
) -> Vec<S> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut p = dg_dx[i * n + j].scale(-2.0);
            for l in 0..n {
                let b = &berwald[(i * n + j) * n + l];
                p = p.sub(&g[l].mul(b).scale(2.0));
                p = p.add(&y[l].mul(&dn_dx[(i * n + j) * n + l]));
                p = p.add(&conn[i * n + l].mul(&conn[l * n + j]));
            }
            out.push(p.add(&dn_dt[i * n + j]));
        }
    }
    out
}

fn deviation_from_geometry(geo: &LocalGeometry, y: &[f64]) -> Matrix {
    let n = geo.g.len();
    let p = assemble_deviation(
        n,
        &geo.g,
        geo.dg_dx.as_slice(),
        geo.connection.as_slice(),
        geo.berwald.as_slice(),
        geo.dn_dx.as_slice(),
        geo.dn_dt.as_slice(),
        y,
    );
    Matrix::from_fn(n, n, |i, j| p[i * n + j])
}

/// Connection objects as jets, all derived from the `Gⁱ` jets.
struct JetGeometry {
    n: usize,
    g: Vec<Jet>,
    dg_dx: Vec<Jet>,
    conn: Vec<Jet>,
    berwald: Vec<Jet>,
    dn_dx: Vec<Jet>,
    dn_dt: Vec<Jet>,
    y: Vec<Jet>,
}

impl JetGeometry {
    fn new(g: &[Jet], y: &[f64], n: usize) -> Self {
        let layout = g[0].layout().clone();
        let order = g[0].jet_order();
        let mut dg_dx = Vec::with_capacity(n * n);
        let mut conn = Vec::with_capacity(n * n);
        for gi in g {
            for j in 0..n {
                dg_dx.push(gi.partial(j));
                conn.push(gi.partial(n + j));
            }
        }
        let mut berwald = Vec::with_capacity(n * n * n);
        let mut dn_dx = Vec::with_capacity(n * n * n);
        let mut dn_dt = Vec::with_capacity(n * n);
        for c in &conn {
            for l in 0..n {
                berwald.push(c.partial(n + l));
                dn_dx.push(c.partial(l));
            }
            dn_dt.push(c.partial(2 * n));
        }
        let y = (0..n)
            .map(|l| Jet::variable(&layout, order, n + l, y[l]))
            .collect();
        Self {
            n,
            g: g.to_vec(),
            dg_dx,
            conn,
            berwald,
            dn_dx,
            dn_dt,
            y,
        }
    }

    fn deviation(&self) -> Vec<Jet> {
        assemble_deviation(
            self.n,
            &self.g,
            &self.dg_dx,
            &self.conn,
            &self.berwald,
            &self.dn_dx,
            &self.dn_dt,
            &self.y,
        )
    }

    fn values(&self) -> LocalGeometry {
        let n = self.n;
        let mat = |v: &[Jet]| Matrix::from_fn(n, n, |i, j| v[i * n + j].value());
        let ten = |v: &[Jet]| {
            let mut t = Tensor3::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        t.set(i, j, l, v[(i * n + j) * n + l].value());
                    }
                }
            }
            t
        };
        LocalGeometry {
            g: self.g.iter().map(|j| j.value()).collect(),
            dg_dx: mat(&self.dg_dx),
            connection: mat(&self.conn),
            berwald: ten(&self.berwald),
            dn_dx: ten(&self.dn_dx),
            dn_dt: mat(&self.dn_dt),
        }
    }
}

/// Proposition-style closed form for lifted fields:
/// `Pⁱⱼ = ½ Σₖ fⁱⱼₖ yᵏ + ¼ Σₗ fⁱₗ fˡⱼ`, assembled from the Jacobian and the
/// component Hessians.
pub fn deviation_tensor_lifted(vf: &VectorField, x: &[f64], y: &[f64]) -> Result<Matrix, KccError> {
    let n = vf.dimension();
    if y.len() != n {
        return Err(KccError::Dimension {
            what: "velocity y",
            expected: n,
            got: y.len(),
        });
    }
    let (jac, hessians) = vf.jacobian_and_hessians(x)?;
    let quarter_square = jac.entries.matmul(&jac.entries).scale(0.25);
    let hessian_term = Matrix::from_fn(n, n, |i, j| {
        0.5 * (0..n).map(|k| hessians[i][(j, k)] * y[k]).sum::<f64>()
    });
    Ok(hessian_term.add(&quarter_square))
}

pub fn lift(vf: &VectorField) -> Sode {
    Sode::lift(vf)
}

pub fn nonlinear_connection(s: &Sode, x: &[f64], y: &[f64], t: f64) -> Result<Matrix, KccError> {
    s.nonlinear_connection(x, y, t)
}

pub fn berwald(s: &Sode, x: &[f64], y: &[f64], t: f64) -> Result<Tensor3, KccError> {
    s.berwald(x, y, t)
}

pub fn first_invariant(s: &Sode, x: &[f64], y: &[f64], t: f64) -> Result<Vec<f64>, KccError> {
    s.first_invariant(x, y, t)
}

pub fn deviation_tensor(s: &Sode, x: &[f64], y: &[f64], t: f64) -> Result<Matrix, KccError> {
    s.deviation_tensor(x, y, t)
}

pub fn higher_invariants(
    s: &Sode,
    x: &[f64],
    y: &[f64],
    t: f64,
) -> Result<(Tensor3, Tensor4, Tensor4), KccError> {
    s.higher_invariants(x, y, t)
}
