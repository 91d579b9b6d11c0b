//! Scenario files: a JSON document naming a system, a task, parameters
//! (scalars or lists to sweep) and integration settings.
//!
//! ```json
//! {
//!   "system": { "name": "kepler", "params": { "k": 1 } },
//!   "task": "orbit",
//!   "params": { "E": -0.5, "L": [0.8, 0.9, 1.0] },
//!   "integration": { "rtol": 1e-9, "atol": 1e-12, "periods": 10, "flow": "hamilton" },
//!   "output": { "dir": "out" }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Transform,
    Orbit,
    Compare,
    Curvature,
    Lift,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Transform => "transform",
            Task::Orbit => "orbit",
            Task::Compare => "compare",
            Task::Curvature => "curvature",
            Task::Lift => "lift",
        }
    }

    /// Task parameters accepted besides the system's own.
    pub fn allowed(self) -> &'static [&'static str] {
        match self {
            Task::Transform => &["E", "Erel", "q", "r_min", "r_max", "samples"],
            Task::Orbit | Task::Compare => &["E", "r0", "L", "pr"],
            Task::Curvature => &["E", "L", "r_min", "r_max", "samples"],
            Task::Lift => &["eps", "r0", "L", "pr", "E"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    One(f64),
    Many(Vec<f64>),
}

impl ParamValue {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ParamValue::One(v) => vec![*v],
            ParamValue::Many(v) => v.clone(),
        }
    }

    /// Parses `"1"` or a comma list `"0.1,0.2"`.
    pub fn parse(flag: &str, raw: &str) -> Result<Self, CliError> {
        let values = raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("--{flag}: '{s}' is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Validation(format!("--{flag}: values must be finite")));
        }
        Ok(match values.as_slice() {
            [one] => ParamValue::One(*one),
            _ => ParamValue::Many(values),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    #[default]
    Hamilton,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftChoice {
    #[default]
    Static,
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Unit,
    Sqrt2,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integration {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub span: Option<f64>,
    pub periods: Option<f64>,
    pub flow: Option<FlowKind>,
    pub max_step: Option<f64>,
    /// Step budget per run; exhausting it ends the run with a step failure.
    pub max_steps: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub p0: Option<Vec<f64>>,
    pub lift: Option<LiftChoice>,
    pub normalization: Option<Normalization>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: SystemSpec,
    pub task: Task,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub integration: Integration,
    #[serde(default)]
    pub output: Output,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    /// Every combination of list-valued parameters, in key order.
    pub fn sweep(&self) -> Vec<(BTreeMap<String, f64>, BTreeMap<String, f64>)> {
        let mut keys: Vec<(bool, &String, Vec<f64>)> = Vec::new();
        for (k, v) in &self.system.params {
            keys.push((true, k, v.values()));
        }
        for (k, v) in &self.params {
            keys.push((false, k, v.values()));
        }
        let mut points = vec![(BTreeMap::new(), BTreeMap::new())];
        for (is_system, key, values) in keys {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for (sys, task) in &points {
                for v in &values {
                    let (mut sys, mut task): (BTreeMap<String, f64>, BTreeMap<String, f64>) =
                        (sys.clone(), task.clone());
                    if is_system {
                        sys.insert(key.clone(), *v);
                    } else {
                        task.insert(key.clone(), *v);
                    }
                    next.push((sys, task));
                }
            }
            points = next;
        }
        points
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn rtol(&self) -> f64 {
        self.integration.rtol.unwrap_or(1e-9)
    }

    pub fn atol(&self) -> f64 {
        self.integration.atol.unwrap_or(1e-12)
    }

    /// Checks names and values before any computation.
    pub fn validate(&self, system_params: &[&str]) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        for key in self.system.params.keys() {
            if !system_params.contains(&key.as_str()) {
                return bad(format!("system '{}' has no parameter '{key}'", self.system.name));
            }
        }
        for key in self.params.keys() {
            if !self.task.allowed().contains(&key.as_str()) {
                return bad(format!("task '{}' does not take parameter '{key}'", self.task.name()));
            }
        }
        for (key, v) in self.system.params.iter().chain(&self.params) {
            let values = v.values();
            if values.is_empty() || values.iter().any(|x| !x.is_finite()) {
                return bad(format!("parameter '{key}' must be a finite number or a non-empty list"));
            }
        }
        let i = &self.integration;
        for (name, v) in [
            ("rtol", i.rtol),
            ("atol", i.atol),
            ("span", i.span),
            ("periods", i.periods),
            ("max_step", i.max_step),
        ] {
            if matches!(v, Some(x) if !(x > 0.0 && x.is_finite())) && !(name == "atol" && v == Some(0.0)) {
                return bad(format!("integration.{name} must be positive"));
            }
        }
        if i.max_steps == Some(0) {
            return bad("integration.max_steps must be at least 1".into());
        }
        if i.x0.as_ref().map(Vec::len) != i.p0.as_ref().map(Vec::len) {
            return bad("integration.x0 and integration.p0 must have the same length".into());
        }
        Ok(())
    }
}
