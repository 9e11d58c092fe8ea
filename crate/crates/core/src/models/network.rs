use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::exprdsl::{BinaryOp, Expression, Node};
use crate::linalg::Matrix;
use crate::odesys::VectorField;

/// Undirected simple graph on nodes `0..nodes`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyGraph {
    nodes: usize,
    /// `(i, j)` with `i < j`
    edges: BTreeSet<(usize, usize)>,
}

impl AdjacencyGraph {
    pub fn new(nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ModelError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(ModelError::Graph(format!("self-loop at node {a}")));
            }
            if a >= nodes || b >= nodes {
                return Err(ModelError::Graph(format!(
                    "edge ({a}, {b}) references a node outside 0..{nodes}"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { nodes, edges: set })
    }

    /// First non-blank line is the node count, then one `i j` pair per line.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, first) = lines
            .next()
            .ok_or_else(|| ModelError::Graph("empty graph file".into()))?;
        let nodes: usize = first
            .parse()
            .map_err(|_| ModelError::Graph(format!("line {line}: expected node count, found '{first}'")))?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let pair = match parts.as_slice() {
                [a, b] => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
                _ => None,
            };
            let (a, b) = pair.ok_or_else(|| ModelError::Graph(format!("line {line}: expected 'i j', found '{l}'")))?;
            edges.push((a, b));
        }
        Self::new(nodes, edges)
    }

    pub fn path(nodes: usize) -> Self {
        Self::new(nodes, (1..nodes).map(|i| (i - 1, i))).expect("valid path")
    }

    pub fn complete(nodes: usize) -> Self {
        Self::new(nodes, (0..nodes).flat_map(|i| (i + 1..nodes).map(move |j| (i, j)))).expect("valid clique")
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }
}

/// `L = D − A`.
pub fn laplacian(g: &AdjacencyGraph) -> Matrix {
    let mut l = Matrix::zeros(g.nodes, g.nodes);
    for (a, b) in g.edges() {
        l[(a, b)] = -1.0;
        l[(b, a)] = -1.0;
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
    }
    l
}

/// `ẋⁱ = Fⁱ(x) − σ Σᵣ Lⁱᵣ Hʳ(x)` with one scalar state per node.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub graph: AdjacencyGraph,
    pub evolution: Vec<Expression>,
    pub coupling: Vec<Expression>,
    pub sigma: f64,
}

impl NetworkSpec {
    /// Parses `F` and `H` sources over `x1…xN`.
    pub fn parse<S: AsRef<str>>(
        graph: AdjacencyGraph,
        evolution: &[S],
        coupling: &[S],
        sigma: f64,
    ) -> Result<Self, ModelError> {
        let vars = node_variables(graph.nodes());
        let parse_all = |sources: &[S], what: &'static str| {
            sources
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    Expression::parse(s.as_ref(), &vars).map_err(|source| ModelError::Expression {
                        what,
                        index: i,
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let spec = Self {
            evolution: parse_all(evolution, "evolution")?,
            coupling: parse_all(coupling, "coupling")?,
            graph,
            sigma,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<(), ModelError> {
        let n = self.graph.nodes();
        if n == 0 {
            return Err(ModelError::Graph("network needs at least one node".into()));
        }
        if self.evolution.len() != n || self.coupling.len() != n {
            return Err(ModelError::Dimension(format!(
                "graph has {n} nodes but {} evolution and {} coupling functions were given",
                self.evolution.len(),
                self.coupling.len()
            )));
        }
        let vars = self.evolution[0].variables();
        if vars.len() != n || self.evolution.iter().chain(&self.coupling).any(|e| e.variables() != vars) {
            return Err(ModelError::Dimension(format!(
                "evolution and coupling functions must share the same {n} node variables"
            )));
        }
        Ok(())
    }
}

pub fn node_variables(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Builds the coupled field symbolically; zero Laplacian entries add no terms,
/// so `σ = 0` reproduces `F` exactly.
pub fn network_system(spec: &NetworkSpec) -> Result<VectorField, ModelError> {
    spec.check()?;
    let l = laplacian(&spec.graph);
    let n = spec.graph.nodes();
    let vars = spec.evolution[0].variables().to_vec();
    let components = (0..n)
        .map(|i| {
            let mut node = spec.evolution[i].root().clone();
            for r in 0..n {
                let weight = spec.sigma * l[(i, r)];
                if weight == 0.0 {
                    continue;
                }
                let term = Node::binary(BinaryOp::Mul, Node::Const(weight), spec.coupling[r].root().clone());
                node = Node::binary(BinaryOp::Sub, node, term);
            }
            Expression::from_node(node, &vars).expect("variables validated")
        })
        .collect();
    Ok(VectorField::new("network", components)?)
}

/// Deviation tensor of the lifted network assembled directly from `F` and
/// `H`: the Hessian term of `F − σLH` plus the quarter square of its Jacobian.
pub fn network_deviation_closed_form(spec: &NetworkSpec, x: &[f64], y: &[f64]) -> Result<Matrix, ModelError> {
    spec.check()?;
    let n = spec.graph.nodes();
    if x.len() != n || y.len() != n {
        return Err(ModelError::Dimension(format!("state and velocity must have {n} entries")));
    }
    let l = laplacian(&spec.graph);
    let duals = |exprs: &[Expression]| -> Result<Vec<_>, ModelError> {
        exprs
            .iter()
            .map(|e| e.eval_dual(x).map_err(ModelError::Eval))
            .collect()
    };
    let f = duals(&spec.evolution)?;
    let h = duals(&spec.coupling)?;
    let jf = Matrix::from_fn(n, n, |i, j| f[i].first()[j]);
    let jh = Matrix::from_fn(n, n, |i, j| h[i].first()[j]);
    let jac = jf.sub(&l.matmul(&jh).scale(spec.sigma));
    let hessian_term = Matrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| {
                let coupled: f64 = (0..n).map(|r| l[(i, r)] * h[r].second_at(j, k)).sum();
                (f[i].second_at(j, k) - spec.sigma * coupled) * y[k]
            })
            .sum::<f64>()
            * 0.5
    });
    Ok(hessian_term.add(&jac.matmul(&jac).scale(0.25)))
}
