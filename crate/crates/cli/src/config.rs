//! Problem files.
//!
//! A problem is a TOML document:
//!
//! ```toml
//! [[vertices]]
//! id = "c"
//! position = [0.0, 0.0]
//!
//! [[arcs]]
//! id = "ce"
//! tail = "c"
//! head = "e"
//! points = [[0.0, 0.0], [1.0, 0.0]]
//!
//! [hamiltonians]
//! default = "power{p = 2, a = 1, f = 0}"
//! ce = { s = [0.0, 1.0], mu = [-4.0, 0.0, 4.0], values = [[8.0, 0.0, 8.0], [8.0, 0.0, 8.0]] }
//!
//! [flux_limiters]
//! c = -1.0
//! default = "max"
//!
//! [initial_datum]
//! default = "0"
//!
//! [grid]
//! n_s = 201
//! dt = 0.0025
//! horizon = 1.0
//! reach = 8
//!
//! [outputs]
//! table = "u.csv"
//! targets = [{ point = "ce@0.5", t = 1.0 }]
//! ```
//!
//! Keys named `default` apply to every arc or vertex not listed by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use hjnet::solver::{Grid, Scheme};
use hjnet::{
    ArcSpec, FluxLimiter, HamiltonianRef, Network, NetworkPoint, PowerHamiltonian,
    TableHamiltonian, VertexSpec,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;

const DEFAULT_KEY: &str = "default";

/// `Syntax` and `Field` are problems with the file itself; `Model` carries
/// an error raised while building the mathematical objects it describes.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("{field}: {message}")]
    Model { field: String, message: String },
}

fn field_error<T>(field: impl Into<String>, message: impl ToString) -> Result<T, ConfigError> {
    Err(ConfigError::Field {
        field: field.into(),
        message: message.to_string(),
    })
}

fn model_error<T>(field: impl Into<String>, message: impl ToString) -> Result<T, ConfigError> {
    Err(ConfigError::Model {
        field: field.into(),
        message: message.to_string(),
    })
}

#[derive(Debug)]
enum SpecError {
    Syntax(String),
    Model(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexConfig {
    pub id: String,
    pub position: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcConfig {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub s: Vec<f64>,
    pub mu: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianConfig {
    Spec(String),
    Table(TableConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LimiterConfig {
    Value(f64),
    Keyword(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_s: usize,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reach: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub point: String,
    pub t: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<TargetConfig>,
}

impl OutputConfig {
    fn is_empty(&self) -> bool {
        *self == OutputConfig::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub vertices: Vec<VertexConfig>,
    pub arcs: Vec<ArcConfig>,
    pub hamiltonians: BTreeMap<String, HamiltonianConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flux_limiters: BTreeMap<String, LimiterConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial_datum: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "OutputConfig::is_empty")]
    pub outputs: OutputConfig,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    fn entry<'a, T>(map: &'a BTreeMap<String, T>, name: &str) -> Option<(&'a T, String)> {
        map.get(name)
            .map(|v| (v, name.to_string()))
            .or_else(|| map.get(DEFAULT_KEY).map(|v| (v, DEFAULT_KEY.to_string())))
    }

    pub fn network(&self) -> Result<Network, ConfigError> {
        let vertices: Vec<VertexSpec> = self
            .vertices
            .iter()
            .map(|v| VertexSpec {
                id: v.id.clone(),
                position: v.position.clone(),
            })
            .collect();
        let arcs: Vec<ArcSpec> = self
            .arcs
            .iter()
            .map(|a| ArcSpec {
                id: a.id.clone(),
                tail: a.tail.clone(),
                head: a.head.clone(),
                points: a.points.clone(),
            })
            .collect();
        Network::build(&vertices, &arcs).or_else(|e| model_error("network", e))
    }

    pub fn hamiltonians(&self, net: &Network) -> Result<Vec<HamiltonianRef>, ConfigError> {
        let known: Vec<&str> = net.arcs().iter().map(|a| a.id()).collect();
        for key in self.hamiltonians.keys() {
            if key != DEFAULT_KEY && !known.contains(&key.as_str()) {
                return field_error(format!("hamiltonians.{key}"), "no arc with this id");
            }
        }
        net.arcs()
            .iter()
            .map(|arc| {
                let Some((spec, key)) = Self::entry(&self.hamiltonians, arc.id()) else {
                    return field_error(
                        format!("hamiltonians.{}", arc.id()),
                        "missing, and no default given",
                    );
                };
                let field = format!("hamiltonians.{key}");
                build_hamiltonian(spec).or_else(|e| match e {
                    SpecError::Syntax(m) => field_error(field, m),
                    SpecError::Model(m) => model_error(field, m),
                })
            })
            .collect()
    }

    pub fn limiter(
        &self,
        net: &Network,
        hams: &[HamiltonianRef],
    ) -> Result<FluxLimiter, ConfigError> {
        for key in self.flux_limiters.keys() {
            if key != DEFAULT_KEY && net.vertex_by_name(key).is_none() {
                return field_error(format!("flux_limiters.{key}"), "no vertex with this id");
            }
        }
        let maximal =
            FluxLimiter::maximal(net, hams).or_else(|e| model_error("flux_limiters", e))?;
        let mut values = Vec::with_capacity(net.vertices().len());
        for v in net.vertex_ids() {
            let id = &net.vertex(v).id;
            let value = match Self::entry(&self.flux_limiters, id) {
                None => maximal.get(v),
                Some((LimiterConfig::Value(c), _)) => *c,
                Some((LimiterConfig::Keyword(k), _)) if k == "max" => maximal.get(v),
                Some((LimiterConfig::Keyword(k), key)) => {
                    return field_error(
                        format!("flux_limiters.{key}"),
                        format!("expected a number or \"max\", found \"{k}\""),
                    )
                }
            };
            values.push(value);
        }
        Ok(FluxLimiter::new(values))
    }

    /// Parsed initial datum, one expression per arc.
    pub fn datum(&self, net: &Network) -> Result<Vec<Expr>, ConfigError> {
        for key in self.initial_datum.keys() {
            if key != DEFAULT_KEY && net.arc_by_name(key).is_err() {
                return field_error(format!("initial_datum.{key}"), "no arc with this id");
            }
        }
        net.arcs()
            .iter()
            .map(|arc| {
                let Some((src, key)) = Self::entry(&self.initial_datum, arc.id()) else {
                    return field_error(
                        format!("initial_datum.{}", arc.id()),
                        "missing, and no default given",
                    );
                };
                Expr::parse(src).or_else(|e| field_error(format!("initial_datum.{key}"), e))
            })
            .collect()
    }

    pub fn grid_config(&self) -> Result<&GridConfig, ConfigError> {
        self.grid
            .as_ref()
            .map_or_else(|| field_error("grid", "missing section"), Ok)
    }
}

/// `GridConfig` to solver grid, with command-line overrides.
pub fn build_grid(g: &GridConfig) -> Result<(Grid, Scheme), ConfigError> {
    let mut grid = Grid::new(g.n_s, g.dt, g.horizon).or_else(|e| model_error("grid", e))?;
    if let Some(r) = g.reach {
        grid = grid.with_reach(r);
    }
    if let Some(h) = g.span {
        grid = grid.with_span(h);
    }
    let scheme = match &g.scheme {
        None => Scheme::SemiLagrangian,
        Some(s) => s.parse().or_else(|e| field_error("grid.scheme", e))?,
    };
    Ok((grid, scheme))
}

fn build_hamiltonian(spec: &HamiltonianConfig) -> Result<HamiltonianRef, SpecError> {
    match spec {
        HamiltonianConfig::Table(t) => {
            TableHamiltonian::new(t.s.clone(), t.mu.clone(), t.values.clone())
                .map(|h| Arc::new(h) as HamiltonianRef)
                .map_err(|e| SpecError::Model(e.to_string()))
        }
        HamiltonianConfig::Spec(text) => parse_power(text),
    }
}

/// `power{p = .., a = .., f = ..}` with `a` defaulting to 1 and `f` to 0.
fn parse_power(text: &str) -> Result<HamiltonianRef, SpecError> {
    let syntax = |m: String| SpecError::Syntax(m);
    let body = text
        .trim()
        .strip_prefix("power")
        .map(str::trim_start)
        .and_then(|r| r.strip_prefix('{'))
        .and_then(|r| r.trim_end().strip_suffix('}'))
        .ok_or_else(|| {
            syntax(format!(
                "expected `power{{p = .., a = .., f = ..}}`, found `{text}`"
            ))
        })?;
    let mut p = None;
    let mut a = Expr::parse("1").expect("literal");
    let mut f = Expr::parse("0").expect("literal");
    for part in split_top_level(body) {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = expression`, found `{part}`")))?;
        let expr = Expr::parse(value.trim()).map_err(|e| syntax(format!("{}: {e}", key.trim())))?;
        match key.trim() {
            "p" => {
                if !expr.is_constant() {
                    return Err(syntax("p must be a constant".into()));
                }
                p = Some(expr.eval(0.0));
            }
            "a" => a = expr,
            "f" => f = expr,
            other => return Err(syntax(format!("unknown power parameter `{other}`"))),
        }
    }
    let p = p.ok_or_else(|| syntax("power Hamiltonian needs p".into()))?;
    let label = format!("power{{p = {p}, a = {a}, f = {f}}}");
    PowerHamiltonian::new(p, move |s| a.eval(s), move |s| f.eval(s), label)
        .map(|h| Arc::new(h) as HamiltonianRef)
        .map_err(|e| SpecError::Model(e.to_string()))
}

fn split_top_level(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    parts
}

/// `vertex-id` or `arc-id@s`.
pub fn parse_point(net: &Network, text: &str) -> Result<NetworkPoint, String> {
    if let Some((arc, s)) = text.split_once('@') {
        let arc = net.arc_by_name(arc.trim()).map_err(|e| e.to_string())?;
        let s: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("bad parameter in `{text}`"))?;
        net.point(arc, s).map_err(|e| e.to_string())
    } else {
        net.vertex_by_name(text.trim())
            .map(NetworkPoint::Vertex)
            .ok_or_else(|| format!("no vertex `{text}`"))
    }
}
