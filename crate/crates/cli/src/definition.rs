//! System definition files (TOML).
//!
//! ```toml
//! name = "lcdm"
//! variables = ["x", "y"]
//! components = ["-x*(1-x+3*y)", "(3+x-3*y)*y"]
//!
//! [search]
//! box = [[0, 1], [0, 1]]
//! grid = 5
//! ```
//!
//! Instead of `variables`/`components` a definition may carry a `[model]`
//! table referring to a built-in or describing a network.

use std::path::{Path, PathBuf};

use kcc_core::models::{self, AdjacencyGraph, NetworkSpec};
use kcc_core::odesys::VectorField;
use kcc_core::stability::SeedSpec;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefinition {
    name: Option<String>,
    dimension: Option<usize>,
    variables: Option<Vec<String>>,
    components: Option<Vec<String>>,
    sample_state: Option<Vec<f64>>,
    search: Option<RawSearch>,
    model: Option<RawModel>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    seeds: Option<Vec<Vec<f64>>>,
    #[serde(rename = "box")]
    bounds: Option<Vec<[f64; 2]>>,
    grid: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    graph: Option<PathBuf>,
    evolution: Option<Vec<String>>,
    coupling: Option<Vec<String>>,
    sigma: Option<f64>,
}

/// A loaded system: the field plus search and sampling defaults.
#[derive(Clone, Debug)]
pub struct SystemDefinition {
    pub name: String,
    pub field: VectorField,
    pub network: Option<NetworkSpec>,
    pub seeds: Option<Vec<Vec<f64>>>,
    pub search_box: Option<Vec<(f64, f64)>>,
    pub grid: Option<usize>,
    pub sample: Option<Vec<f64>>,
}

pub const DEFAULT_GRID: usize = 5;
pub const DEFAULT_HALF_WIDTH: f64 = 2.0;

impl SystemDefinition {
    /// Resolves a built-in name first, otherwise reads a file.
    pub fn resolve(target: &str) -> Result<Self, CliError> {
        if let Some(model) = models::builtin(target) {
            return Ok(Self::from_builtin(model));
        }
        let path = Path::new(target);
        if !path.exists() {
            return Err(CliError::Input(format!(
                "'{target}' is neither a built-in model ({}) nor a readable file",
                models::BUILTIN_NAMES.join(", ")
            )));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent()).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn from_builtin(model: models::BuiltinModel) -> Self {
        Self {
            name: model.name.to_string(),
            field: model.field,
            network: model.network,
            seeds: None,
            search_box: Some(model.search_box),
            grid: Some(model.grid),
            sample: Some(model.sample_state),
        }
    }

    /// Parses definition text; relative graph paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::Input("definition is empty".into()));
        }
        let raw: RawDefinition = toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        let search = raw.search.unwrap_or_default();
        let mut def = match (raw.components, raw.model) {
            (Some(_), Some(_)) => {
                return Err(CliError::Input(
                    "give either 'components' or a [model] table, not both".into(),
                ))
            }
            (None, None) => return Err(CliError::Input("missing 'components' or [model] table".into())),
            (Some(components), None) => {
                let variables = raw
                    .variables
                    .ok_or_else(|| CliError::Input("'components' needs a 'variables' list".into()))?;
                let name = raw.name.clone().unwrap_or_else(|| "system".into());
                let field = VectorField::parse(name.clone(), &variables, &components)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                Self {
                    name,
                    field,
                    network: None,
                    seeds: None,
                    search_box: None,
                    grid: None,
                    sample: None,
                }
            }
            (None, Some(model)) => Self::from_model(model, base)?,
        };
        if let Some(name) = raw.name {
            def.name = name;
        }
        let n = def.field.dimension();
        if let Some(d) = raw.dimension {
            if d != n {
                return Err(CliError::Input(format!("dimension = {d} but the system has {n} variables")));
            }
        }
        if let Some(seeds) = search.seeds {
            def.seeds = Some(seeds);
        }
        if let Some(b) = search.bounds {
            def.search_box = Some(b.into_iter().map(|[lo, hi]| (lo, hi)).collect());
        }
        if let Some(g) = search.grid {
            def.grid = Some(g);
        }
        if let Some(s) = raw.sample_state {
            if s.len() != n {
                return Err(CliError::Input(format!("sample_state has {} entries, system has {n}", s.len())));
            }
            def.sample = Some(s);
        }
        Ok(def)
    }

    fn from_model(model: RawModel, base: Option<&Path>) -> Result<Self, CliError> {
        if model.kind != "network" {
            return models::builtin(&model.kind).map(Self::from_builtin).ok_or_else(|| {
                CliError::Input(format!(
                    "unknown model kind '{}' (expected network or one of {})",
                    model.kind,
                    models::BUILTIN_NAMES.join(", ")
                ))
            });
        }
        let missing = |key: &str| CliError::Input(format!("network model needs '{key}'"));
        let graph_path = model.graph.ok_or_else(|| missing("graph"))?;
        let graph_path = match base {
            Some(dir) if graph_path.is_relative() => dir.join(graph_path),
            _ => graph_path,
        };
        let text = std::fs::read_to_string(&graph_path)
            .map_err(|e| CliError::Input(format!("graph file {}: {e}", graph_path.display())))?;
        let graph = AdjacencyGraph::parse(&text).map_err(|e| CliError::Input(e.to_string()))?;
        let evolution = model.evolution.ok_or_else(|| missing("evolution"))?;
        let coupling = model.coupling.ok_or_else(|| missing("coupling"))?;
        let sigma = model.sigma.ok_or_else(|| missing("sigma"))?;
        let spec = NetworkSpec::parse(graph, &evolution, &coupling, sigma).map_err(|e| CliError::Input(e.to_string()))?;
        let field = models::network_system(&spec).map_err(|e| CliError::Input(e.to_string()))?;
        Ok(Self {
            name: "network".into(),
            field,
            network: Some(spec),
            seeds: None,
            search_box: None,
            grid: None,
            sample: None,
        })
    }

    /// Explicit seeds win over a box; without either, a centred default box.
    pub fn seed_spec(&self) -> SeedSpec {
        if let Some(seeds) = &self.seeds {
            return SeedSpec::Points(seeds.clone());
        }
        let n = self.field.dimension();
        SeedSpec::Grid {
            bounds: self
                .search_box
                .clone()
                .unwrap_or_else(|| vec![(-DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH); n]),
            per_axis: self.grid.unwrap_or(DEFAULT_GRID),
        }
    }

    pub fn sample_state(&self) -> Vec<f64> {
        self.sample.clone().unwrap_or_else(|| vec![0.0; self.field.dimension()])
    }
}
