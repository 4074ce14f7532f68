//! TOML experiment configuration.
//!
//! ```toml
//! seed = 7
//! trials = 200
//! horizon = 10000
//!
//! [env]
//! n = 3
//! q_all = 0.8
//! b = { kind = "constant", c = 0.5 }
//! d = { kind = "power-decay", c = 0.5, gamma = 2.0 }
//!
//! [env.graph]
//! mode = "static"
//! graphs = [["1 2 +", "2 3 +", "3 1 -"]]
//!
//! [params]
//! alpha = 0.15
//! beta = 0.5
//! model = "relative"
//!
//! [initial]
//! kind = "uniform"
//! lo = 0.0
//! hi = 1.0
//! ```
//!
//! Node ids are one-based throughout the file. Dotted overrides such as
//! `env.d.c=0.3` are applied to the parsed document before it is decoded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ClassificationCriteria;
use crate::dynamics::{DynamicsError, DynamicsParams};
use crate::env::{ArcProbabilities, Assumption, AttentionSchedule, EnvError, GraphSchedule, ScheduleMode};
use crate::graph::{GraphError, SignedDigraph};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("bad override {0:?}: expected KEY=VALUE with a dotted key")]
    Override(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{0}")]
    Invalid(String),
}

impl From<GraphError> for ConfigError {
    fn from(e: GraphError) -> Self {
        ConfigError::Env(e.into())
    }
}

/// How the initial state is produced for each trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    Explicit { values: Vec<f64> },
    /// Independent uniform draws, taken from the trial stream before slot 0.
    Uniform { lo: f64, hi: f64 },
    /// `0` on the first positive cluster and `c0` on the second.
    TwoBlock { c0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub mode: ScheduleMode,
    /// Inline graphs, each a list of `"tail head sign"` lines.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub graphs: Vec<Vec<String>>,
    /// Graph files in the plain-text format, relative to the config file.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcProbability {
    pub tail: usize,
    pub head: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub n: usize,
    pub graph: GraphSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_all: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<ArcProbability>,
    pub b: AttentionSchedule,
    pub d: AttentionSchedule,
}

/// Inputs for the assumption checker and the constants report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheorySection {
    /// Window length `K`.
    pub k: usize,
    /// Assumptions `check` requires to hold.
    pub assumptions: Vec<Assumption>,
}

impl Default for TheorySection {
    fn default() -> Self {
        TheorySection { k: 1, assumptions: vec![Assumption::A1, Assumption::A3] }
    }
}

fn one() -> u64 {
    1
}

fn is_one(v: &u64) -> bool {
    *v == 1
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    pub trials: usize,
    pub horizon: u64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub stride: u64,
    /// Run every trial under both negative-recommendation models.
    #[serde(default, skip_serializing_if = "is_false")]
    pub contrast_models: bool,
    pub env: EnvSection,
    pub params: DynamicsParams,
    pub initial: InitialState,
    #[serde(default)]
    pub criteria: ClassificationCriteria,
    #[serde(default)]
    pub theory: TheorySection,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::from_toml_with(text, &[] as &[&str])
    }

    /// Parses `text`, applies `KEY=VALUE` overrides, then decodes.
    pub fn from_toml_with<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self, ConfigError> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o.as_ref())?;
        }
        doc.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is representable in TOML")
    }

    /// Builds the graph schedule; `base` anchors relative graph file paths.
    pub fn schedule(&self, base: &Path) -> Result<GraphSchedule, ConfigError> {
        let env = &self.env;
        let mut graphs = Vec::new();
        for lines in &env.graph.graphs {
            graphs.push(SignedDigraph::from_arc_lines(env.n, lines)?);
        }
        for file in &env.graph.files {
            let path = base.join(file);
            let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
            let g = SignedDigraph::parse(&text)?;
            if g.node_count() != env.n {
                return Err(GraphError::NodeCountMismatch(env.n, g.node_count()).into());
            }
            graphs.push(g);
        }

        let probs = if env.q.is_empty() {
            ArcProbabilities::Uniform(
                env.q_all.ok_or_else(|| ConfigError::Invalid("set env.q_all or list env.q entries".into()))?,
            )
        } else {
            let mut map = BTreeMap::new();
            for a in &env.q {
                if a.tail == 0 || a.head == 0 || a.tail > env.n || a.head > env.n {
                    return Err(ConfigError::Invalid(format!("env.q arc ({}, {}) outside 1..={}", a.tail, a.head, env.n)));
                }
                map.insert((a.tail - 1, a.head - 1), a.p);
            }
            ArcProbabilities::PerArc { default: env.q_all, map }
        };
        Ok(GraphSchedule::build(env.graph.mode, graphs, probs)?)
    }
}

/// Sets `a.b.c = value` in `doc`, creating tables along the way. The value is
/// read as a TOML literal, falling back to a bare string.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::Override(assignment.to_string());
    let (key, raw) = assignment.split_once('=').ok_or_else(bad)?;
    let path: Vec<&str> = key.trim().split('.').map(str::trim).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(bad());
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));

    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = doc;
    for p in parents {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(bad)?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Reads a config file and applies overrides.
pub fn load(path: &Path, overrides: &[String]) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    ConfigFile::from_toml_with(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Model;

    const SAMPLE: &str = r#"
seed = 7
trials = 3
horizon = 10

[env]
n = 3
q_all = 0.8
b = { kind = "constant", c = 0.5 }
d = { kind = "power-decay", c = 0.5, gamma = 2.0 }

[env.graph]
mode = "static"
graphs = [["1 2 +", "2 3 +", "3 1 -"]]

[params]
alpha = 0.15
beta = 0.5

[initial]
kind = "uniform"
lo = 0.0
hi = 1.0
"#;

    #[test]
    fn parses_sample() {
        let c = ConfigFile::from_toml(SAMPLE).unwrap();
        assert_eq!(c.params.model, Model::Relative);
        assert_eq!(c.stride, 1);
        assert_eq!(c.criteria, ClassificationCriteria::default());
        assert_eq!(c.env.d, AttentionSchedule::power_decay(0.5, 2.0));
        let s = c.schedule(Path::new(".")).unwrap();
        assert_eq!(s.graph_at(0).arc_count(), 3);
        assert_eq!(s.p_lower(), Some(0.8));
    }

    #[test]
    fn overrides() {
        let c = ConfigFile::from_toml_with(
            SAMPLE,
            &[
                "env.d.c=0.3",
                "params.model=flip",
                "trials = 9",
                "criteria.eps=1e-8",
                "initial = { kind = \"two-block\", c0 = 2.0 }",
            ],
        )
        .unwrap();
        assert_eq!(c.env.d, AttentionSchedule::power_decay(0.3, 2.0));
        assert_eq!(c.params.model, Model::Flip);
        assert_eq!(c.trials, 9);
        assert_eq!(c.criteria.eps, 1e-8);
        assert_eq!(c.initial, InitialState::TwoBlock { c0: 2.0 });

        assert!(matches!(ConfigFile::from_toml_with(SAMPLE, &["novalue"]), Err(ConfigError::Override(_))));
        assert!(matches!(ConfigFile::from_toml_with(SAMPLE, &["a..b=1"]), Err(ConfigError::Override(_))));
        assert!(matches!(ConfigFile::from_toml_with(SAMPLE, &["seed.x=1"]), Err(ConfigError::Override(_))));
        assert!(matches!(ConfigFile::from_toml_with(SAMPLE, &["bogus=1"]), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn toml_round_trip() {
        let c = ConfigFile::from_toml(SAMPLE).unwrap();
        assert_eq!(ConfigFile::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn graph_files_resolve_relative_to_base() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("g.txt"), "3\n1 2 +\n2 3 -\n").unwrap();
        let mut c = ConfigFile::from_toml(SAMPLE).unwrap();
        c.env.graph.graphs.clear();
        c.env.graph.files = vec!["g.txt".into()];
        assert_eq!(c.schedule(dir.path()).unwrap().graph_at(0).arc_count(), 2);
        assert!(matches!(c.schedule(Path::new("/nonexistent")), Err(ConfigError::Io { .. })));
    }

    #[test]
    fn per_arc_probabilities() {
        let mut c = ConfigFile::from_toml(SAMPLE).unwrap();
        c.env.q_all = None;
        assert!(matches!(c.schedule(Path::new(".")), Err(ConfigError::Invalid(_))));
        c.env.q = vec![
            ArcProbability { tail: 1, head: 2, p: 0.2 },
            ArcProbability { tail: 2, head: 3, p: 0.4 },
            ArcProbability { tail: 3, head: 1, p: 0.6 },
        ];
        let s = c.schedule(Path::new(".")).unwrap();
        assert_eq!((s.p_lower(), s.p_upper()), (Some(0.2), Some(0.6)));
        c.env.q.pop();
        assert!(matches!(c.schedule(Path::new(".")), Err(ConfigError::Env(EnvError::MissingProbability { .. }))));
    }
}
