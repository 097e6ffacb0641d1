//! Problem specification files.

use std::collections::BTreeMap;
use std::path::Path;

use proxpair::{ConvexBody, CyclicMapSpec, NormSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Analyze,
    Structure,
    Solve,
    Falsify,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Analyze => "analyze",
            TaskKind::Structure => "structure",
            TaskKind::Solve => "solve",
            TaskKind::Falsify => "falsify",
        }
    }
}

/// One task of a spec; unset parameters fall back to the spec or the
/// per-task defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub task: TaskKind,
    /// Index into `pairs`.
    pub pair: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Contraction constants for the nested-hull demo (`structure`), or a
    /// fixed solver constant (`solve`, first entry).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
}

impl TaskSpec {
    pub fn new(task: TaskKind, pair: usize) -> Self {
        TaskSpec {
            task,
            pair,
            map: None,
            tol: None,
            seed: None,
            budget: None,
            levels: None,
            max_iter: None,
            c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    pub norm: NormSpec,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub bodies: BTreeMap<String, ConvexBody>,
    pub pairs: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, CyclicMapSpec>,
    pub tasks: Vec<TaskSpec>,
    /// Free-form provenance of generated fixtures.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl ProblemSpec {
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            SpecError::Parse { source, .. } => SpecError::Parse {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let spec: ProblemSpec = serde_json::from_str(text).map_err(|source| SpecError::Parse {
            path: "<spec>".into(),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    /// Checks that all names resolve and all dimensions agree with the norm.
    pub fn validate(&self) -> Result<(), SpecError> {
        let dim = self.norm.dim();
        if let Some(t) = self.tol {
            check_tol("tol", t)?;
        }
        for (name, body) in &self.bodies {
            if body.dim() != dim {
                return Err(invalid(
                    format!("bodies.{name}"),
                    format!("dimension {} does not match norm dimension {dim}", body.dim()),
                ));
            }
        }
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            for n in [a, b] {
                if !self.bodies.contains_key(n) {
                    return Err(invalid(format!("pairs[{i}]"), format!("unknown body `{n}`")));
                }
            }
        }
        for (name, map) in &self.maps {
            if map.dim() != dim {
                return Err(invalid(
                    format!("maps.{name}"),
                    format!("dimension {} does not match norm dimension {dim}", map.dim()),
                ));
            }
        }
        for (i, t) in self.tasks.iter().enumerate() {
            let field = format!("tasks[{i}]");
            if t.pair >= self.pairs.len() {
                return Err(invalid(
                    format!("{field}.pair"),
                    format!("index {} out of range ({} pairs)", t.pair, self.pairs.len()),
                ));
            }
            match (&t.map, t.task) {
                (None, TaskKind::Solve) => return Err(invalid(format!("{field}.map"), "solve needs a map")),
                (Some(m), _) if !self.maps.contains_key(m) => {
                    return Err(invalid(format!("{field}.map"), format!("unknown map `{m}`")))
                }
                _ => {}
            }
            if let Some(tol) = t.tol {
                check_tol(&format!("{field}.tol"), tol)?;
            }
            if let Some(cs) = &t.c {
                if cs.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
                    return Err(invalid(format!("{field}.c"), "constants must lie in (0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn body(&self, name: &str) -> &ConvexBody {
        &self.bodies[name]
    }
}

fn check_tol(field: &str, tol: f64) -> Result<(), SpecError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("tolerance must be positive, got {tol}")))
    }
}
