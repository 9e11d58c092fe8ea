//! Built-in systems, coupled networks and fixed-point translation.

mod network;

use serde::Serialize;
use thiserror::Error;

use crate::exprdsl::{BinaryOp, EvalError, Node, ParseError};
use crate::odesys::{FieldError, VectorField};

pub use network::{
    laplacian, network_deviation_closed_form, network_system, node_variables, AdjacencyGraph, NetworkSpec,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error("graph: {0}")]
    Graph(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{what} function {index}: {source}")]
    Expression {
        what: &'static str,
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(EvalError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unknown model '{0}'")]
    Unknown(String),
}

/// Flat ΛCDM model in `(x, y)`:
/// `ẋ = −x(1 − x + 3y)`, `ẏ = (3 + x − 3y)y`.
pub fn lcdm_system() -> VectorField {
    VectorField::parse("lcdm", &["x", "y"], &["-x*(1-x+3*y)", "(3+x-3*y)*y"]).expect("valid model")
}

/// `ẋ₁ = x₂`, `ẋ₂ = −x₁`.
pub fn harmonic() -> VectorField {
    VectorField::parse("harmonic", &["x1", "x2"], &["x2", "-x1"]).expect("valid model")
}

/// Lorenz system with the classic parameters `σ = 10`, `ρ = 28`, `β = 8/3`.
pub fn lorenz() -> VectorField {
    VectorField::parse(
        "lorenz",
        &["x", "y", "z"],
        &["10*(y - x)", "x*(28 - z) - y", "x*y - 8/3*z"],
    )
    .expect("valid model")
}

/// Bistable nodes `x − x³` on a 3-node path, coupled through `sin`.
pub fn path_network_spec() -> NetworkSpec {
    NetworkSpec::parse(
        AdjacencyGraph::path(3),
        &["x1 - x1^3", "x2 - x2^3", "x3 - x3^3"],
        &["sin(x1)", "sin(x2)", "sin(x3)"],
        0.5,
    )
    .expect("valid model")
}

/// A named built-in with a default fixed-point search box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuiltinModel {
    pub name: &'static str,
    pub description: &'static str,
    #[serde(skip)]
    pub field: VectorField,
    #[serde(skip)]
    pub network: Option<NetworkSpec>,
    pub search_box: Vec<(f64, f64)>,
    pub grid: usize,
    /// Representative phase point for invariant evaluation and deviation runs.
    pub sample_state: Vec<f64>,
}

pub const BUILTIN_NAMES: [&str; 4] = ["lcdm", "harmonic", "lorenz", "network-path3"];

pub fn builtin(name: &str) -> Option<BuiltinModel> {
    let model = match name {
        "lcdm" => BuiltinModel {
            name: "lcdm",
            description: "flat LCDM cosmology in (x, y) density variables",
            field: lcdm_system(),
            network: None,
            search_box: vec![(0.0, 1.0); 2],
            grid: 5,
            sample_state: vec![0.2, 0.6],
        },
        "harmonic" => BuiltinModel {
            name: "harmonic",
            description: "linear oscillator x1' = x2, x2' = -x1",
            field: harmonic(),
            network: None,
            search_box: vec![(-1.0, 1.0); 2],
            grid: 3,
            sample_state: vec![1.0, 0.0],
        },
        "lorenz" => BuiltinModel {
            name: "lorenz",
            description: "Lorenz system, sigma = 10, rho = 28, beta = 8/3",
            field: lorenz(),
            network: None,
            search_box: vec![(-10.0, 10.0), (-10.0, 10.0), (0.0, 30.0)],
            grid: 5,
            sample_state: vec![1.0, 1.0, 1.0],
        },
        "network-path3" => {
            let spec = path_network_spec();
            BuiltinModel {
                name: "network-path3",
                description: "3-node path of bistable units x - x^3 with sin coupling, sigma = 0.5",
                field: network_system(&spec).expect("valid network").with_name("network-path3"),
                network: Some(spec),
                search_box: vec![(-1.5, 1.5); 3],
                grid: 5,
                sample_state: vec![0.3, -0.2, 0.5],
            }
        }
        _ => return None,
    };
    Some(model)
}

pub fn builtins() -> Vec<BuiltinModel> {
    BUILTIN_NAMES.iter().filter_map(|n| builtin(n)).collect()
}

/// `f̄(x̄) = f(x̄ + shift)`, built by substituting `xᵢ → xᵢ + shiftᵢ`.
/// Fixed points move by `−shift` and Jacobians at corresponding points agree.
pub fn translate_to_origin(vf: &VectorField, shift: &[f64]) -> Result<VectorField, ModelError> {
    let n = vf.dimension();
    if shift.len() != n {
        return Err(ModelError::Dimension(format!("shift has {} entries, field has {n}", shift.len())));
    }
    let vars = vf.variables().to_vec();
    let replace = |i: usize| {
        if shift[i] == 0.0 {
            Node::Var(i)
        } else {
            Node::binary(BinaryOp::Add, Node::Var(i), Node::Const(shift[i]))
        }
    };
    let components = vf
        .components()
        .iter()
        .map(|c| c.substitute(&vars, replace).expect("same variables"))
        .collect();
    Ok(VectorField::new(format!("{}-shifted", vf.name()), components)?)
}

#[cfg(test)]
mod tests;
