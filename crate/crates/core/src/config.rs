//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 0
//!
//! [graph]
//! generator = "cycle:4"          # or: file = "graph.txt"
//!
//! [model]
//! type = "cascade"
//! gammas = [1.0, 1.0]
//! stages = [
//!   { a = 9.0, K = 1.0, p = 2.0, direction = "inhibiting" },
//!   { kind = "linear", slope = 1.0 },
//! ]
//! ```
//!
//! Optional sections: `tolerances`, `solver`, `certify`, `sim`, `order`,
//! `simulate`, `orbit` and `sweep`. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::Tolerances;
use crate::error::{Error, Result};
use crate::graph::{ContactGraph, GraphGenerator};
use crate::model::{BuiltinModel, Cascade, Direction, HillParams, NotchMimo, Restriction, SolverConfig, Stage};
use crate::monotone::CertifyConfig;
use crate::sim::{OrderConfig, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSource>,
    pub model: ModelSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub order: OrderConfig,
    #[serde(default)]
    pub simulate: SimulateOptions,
    /// Period-two candidate for multi-input models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// Exactly one of `generator` or `file`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GraphGenerator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl GraphSource {
    pub fn generator(g: GraphGenerator) -> Self {
        Self {
            generator: Some(g),
            file: None,
        }
    }

    pub fn file(p: impl Into<PathBuf>) -> Self {
        Self {
            generator: None,
            file: Some(p.into()),
        }
    }

    /// Builds the graph; relative files are resolved against `base`.
    pub fn build(&self, base: Option<&std::path::Path>) -> Result<ContactGraph> {
        match (&self.generator, &self.file) {
            (Some(g), None) => g.build(),
            (None, Some(f)) => {
                let path = match base {
                    Some(b) if f.is_relative() => b.join(f),
                    _ => f.clone(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                ContactGraph::parse_edge_list(&text)
            }
            _ => Err(Error::Config {
                pointer: "graph".into(),
                message: "exactly one of `generator` or `file` is required".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    #[default]
    Hill,
    Constant,
    Linear,
}

/// One cascade stage; `kind` defaults to `hill`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    #[serde(default)]
    pub kind: StageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HillSpec {
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub p: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Cascade {
        gammas: Vec<f64>,
        stages: Vec<StageSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        restriction: Option<Restriction>,
    },
    NotchMimo {
        beta: f64,
        gamma: f64,
        k: f64,
        g: HillSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        restriction: Option<Restriction>,
    },
}

fn at(pointer: String, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::Config {
            pointer: format!("{pointer}.{name}"),
            message: reason,
        },
        Error::EmptyStages => Error::Config {
            pointer,
            message: "at least one stage is required".into(),
        },
        other => other,
    }
}

impl StageSpec {
    fn build(&self, pointer: &str) -> Result<Stage> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Config {
                pointer: format!("{pointer}.{key}"),
                message: format!("missing field `{key}`"),
            })
        };
        let stray = |present: bool, key: &str| -> Result<()> {
            if present {
                Err(Error::Config {
                    pointer: format!("{pointer}.{key}"),
                    message: format!("not allowed for stage kind {:?}", self.kind).to_lowercase(),
                })
            } else {
                Ok(())
            }
        };
        let stage = match self.kind {
            StageKind::Hill => {
                stray(self.value.is_some(), "value")?;
                stray(self.slope.is_some(), "slope")?;
                let direction = self.direction.ok_or_else(|| Error::Config {
                    pointer: format!("{pointer}.direction"),
                    message: "missing field `direction`".into(),
                })?;
                Stage::Hill(
                    HillParams::new(need(self.a, "a")?, need(self.k, "K")?, need(self.p, "p")?, direction)
                        .map_err(|e| at(pointer.to_string(), e))?,
                )
            }
            StageKind::Constant => {
                for (present, key) in [(self.a.is_some(), "a"), (self.k.is_some(), "K"), (self.p.is_some(), "p"), (self.direction.is_some(), "direction"), (self.slope.is_some(), "slope")] {
                    stray(present, key)?;
                }
                Stage::Constant { value: need(self.value, "value")? }
            }
            StageKind::Linear => {
                for (present, key) in [(self.a.is_some(), "a"), (self.k.is_some(), "K"), (self.p.is_some(), "p"), (self.direction.is_some(), "direction"), (self.value.is_some(), "value")] {
                    stray(present, key)?;
                }
                Stage::Linear { slope: need(self.slope, "slope")? }
            }
        };
        stage.validate().map_err(|e| at(pointer.to_string(), e))?;
        Ok(stage)
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<BuiltinModel> {
        match self {
            ModelSpec::Cascade { gammas, stages, .. } => {
                if gammas.len() != stages.len() {
                    return Err(Error::Config {
                        pointer: "model.gammas".into(),
                        message: format!("{} rates for {} stages", gammas.len(), stages.len()),
                    });
                }
                let stages = stages
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.build(&format!("model.stages[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Cascade::new(gammas.clone(), stages).map_err(|e| at("model".into(), e))?.into())
            }
            ModelSpec::NotchMimo { beta, gamma, k, g, .. } => {
                let g = HillParams::new(g.a, g.k, g.p, g.direction).map_err(|e| at("model.g".into(), e))?;
                Ok(NotchMimo::new(*beta, *gamma, *k, g).map_err(|e| at("model".into(), e))?.into())
            }
        }
    }

    pub fn restriction(&self) -> Option<&Restriction> {
        match self {
            ModelSpec::Cascade { restriction, .. } | ModelSpec::NotchMimo { restriction, .. } => restriction.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateMode {
    /// Homogeneous steady state nudged along the last eigenvector.
    #[default]
    Perturbed,
    /// One random initial state.
    Random,
    /// Many random initial states.
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateOptions {
    pub mode: SimulateMode,
    pub trials: usize,
    pub perturbation: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            mode: SimulateMode::Perturbed,
            trials: 100,
            perturbation: crate::sim::PERTURBATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitCandidate {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

/// A scalar parameter swept over `steps` evenly spaced values in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path into the config, e.g. `model.stages[0].a`.
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.lo],
            s => (0..s).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (s - 1) as f64).collect(),
        }
    }
}

impl std::str::FromStr for SweepSpec {
    type Err = Error;

    /// `KEY=LO:HI:STEPS`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config {
            pointer: "sweep".into(),
            message: format!("{m} (expected KEY=LO:HI:STEPS, got `{s}`)"),
        };
        let (key, range) = s.split_once('=').ok_or_else(|| bad("missing `=`"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range needs three fields"));
        }
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("bad number"));
        Ok(Self {
            key: key.trim().to_string(),
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            steps: parts[2].trim().parse().map_err(|_| bad("bad step count"))?,
        })
    }
}

impl RunConfig {
    /// Parses and validates a TOML document, reporting the offending key
    /// and line on failure.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Deserializes from an already parsed TOML table.
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config {
            pointer: "(root)".into(),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_table(&self) -> Result<toml::Table> {
        match toml::Value::try_from(self) {
            Ok(toml::Value::Table(t)) => Ok(t),
            Ok(_) => Err(Error::Config {
                pointer: "(root)".into(),
                message: "config did not serialize to a table".into(),
            }),
            Err(e) => Err(Error::Config {
                pointer: "(root)".into(),
                message: e.to_string(),
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        self.model.build()?;
        let positive = |v: f64, ptr: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config {
                    pointer: ptr.into(),
                    message: "must be positive".into(),
                })
            }
        };
        positive(self.sim.step, "sim.step")?;
        positive(self.sim.horizon, "sim.horizon")?;
        positive(self.order.step, "order.step")?;
        positive(self.order.horizon, "order.horizon")?;
        if let Some(g) = &self.graph {
            if g.generator.is_some() == g.file.is_some() {
                return Err(Error::Config {
                    pointer: "graph".into(),
                    message: "exactly one of `generator` or `file` is required".into(),
                });
            }
        }
        Ok(())
    }

    /// Sets the numeric value at a dotted path such as `model.stages[0].a`
    /// or `tolerances.fp_tol`, then re-validates.
    pub fn with_value(&self, path: &str, value: f64) -> Result<Self> {
        let mut table = self.to_table()?;
        set_path(&mut table, path, value)?;
        Self::from_table(table)
    }

    /// Applies a `KEY=VAL` tolerance override. Bare keys are looked up in
    /// `tolerances`, `solver`, `sim`, `certify` and `order`.
    pub fn with_tolerance(&self, assignment: &str) -> Result<Self> {
        let bad = |m: String| Error::Config {
            pointer: format!("--tol {assignment}"),
            message: m,
        };
        let (key, val) = assignment.split_once('=').ok_or_else(|| bad("expected KEY=VAL".into()))?;
        let val: f64 = val.trim().parse().map_err(|_| bad("value is not a number".into()))?;
        let key = key.trim();
        if key.contains('.') {
            return self.with_value(key, val);
        }
        let table = self.to_table()?;
        for section in ["tolerances", "solver", "sim", "certify", "order"] {
            let has = table
                .get(section)
                .and_then(|s| s.as_table())
                .is_some_and(|s| s.contains_key(key));
            if has {
                return self.with_value(&format!("{section}.{key}"), val);
            }
        }
        Err(bad(format!("unknown tolerance `{key}`")))
    }
}

fn set_path(table: &mut toml::Table, path: &str, value: f64) -> Result<()> {
    let bad = |m: &str| Error::Config {
        pointer: path.to_string(),
        message: m.to_string(),
    };
    // split `a.b[0].c` into keys and indices
    let mut steps: Vec<std::result::Result<&str, usize>> = Vec::new();
    for part in path.split('.') {
        let mut pieces = part.split('[');
        steps.push(Ok(pieces.next().unwrap_or("")));
        for idx in pieces {
            let i = idx.strip_suffix(']').and_then(|i| i.parse().ok()).ok_or_else(|| bad("bad index"))?;
            steps.push(Err(i));
        }
    }
    let (first, rest) = match steps.split_first() {
        Some((Ok(k), rest)) => (*k, rest),
        _ => return Err(bad("empty path")),
    };
    let mut cur = table.get_mut(first).ok_or_else(|| bad("no such key"))?;
    for step in rest {
        cur = match step {
            Ok(k) => cur.as_table_mut().ok_or_else(|| bad("not a table"))?.get_mut(*k),
            Err(i) => cur.as_array_mut().ok_or_else(|| bad("not an array"))?.get_mut(*i),
        }
        .ok_or_else(|| bad("no such key"))?;
    }
    *cur = match cur {
        toml::Value::Integer(_) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
        toml::Value::Integer(_) | toml::Value::Float(_) => toml::Value::Float(value),
        _ => return Err(bad("target is not numeric")),
    };
    Ok(())
}

/// Converts a TOML error into a `Config` error with a dotted key pointer
/// and the 1-based line.
fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let message = e.message().trim().to_string();
    let Some(span) = e.span() else {
        return Error::Config {
            pointer: "(root)".into(),
            message,
        };
    };
    let offset = span.start.min(text.len());
    let line = text[..offset].matches('\n').count() + 1;
    let line_end = text[offset..].find('\n').map_or(text.len(), |i| offset + i);
    let mut table = String::new();
    for l in text[..line_end].lines() {
        let t = l.trim();
        if let Some(h) = t.strip_prefix("[[").and_then(|h| h.split("]]").next()) {
            table = h.trim().to_string();
        } else if let Some(h) = t.strip_prefix('[').and_then(|h| h.split(']').next()) {
            table = h.trim().to_string();
        }
    }
    let span_line = text[offset..].lines().next().unwrap_or("");
    let line_start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    let full_line = text[line_start..].lines().next().unwrap_or(span_line);
    let mut key = quoted(&message, "field `").or_else(|| {
        full_line
            .split_once('=')
            .map(|(k, _)| k.trim().to_string())
            .filter(|k| !k.is_empty() && !k.starts_with('['))
    });
    if message.contains("missing field") {
        key = quoted(&message, "missing field `");
    }
    let pointer = match (table.is_empty(), key) {
        (true, Some(k)) => k,
        (false, Some(k)) => format!("{table}.{k}"),
        (false, None) => table,
        (true, None) => "(root)".into(),
    };
    Error::Config {
        pointer,
        message: format!("line {line}: {message}"),
    }
}

fn quoted(message: &str, prefix: &str) -> Option<String> {
    let start = message.find(prefix)? + prefix.len();
    let end = message[start..].find('`')?;
    Some(message[start..start + end].to_string())
}
