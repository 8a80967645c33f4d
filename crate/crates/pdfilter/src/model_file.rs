//! JSON model files.
//!
//! ```json
//! {
//!   "states": ["1", "2", "3", "4"],
//!   "generator": [[-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1], [1, 0, 0, -1]],
//!   "observation": {"1": 1, "2": 0, "3": 1, "4": 0},
//!   "initial": [0.25, 0.25, 0.25, 0.25],
//!   "g": [2, -1, 0.5, 1], "l": [0.2, 0.1, 0.3, 0.2], "alpha": 0.5,
//!   "grid_resolution": 64, "tol": 1e-6
//! }
//! ```
//!
//! `initial` and the stopping fields are optional. Labels may be strings or
//! numbers; label indices follow numeric order when every label parses as an
//! integer and lexicographic order otherwise.

use std::collections::BTreeMap;
use std::path::Path;

use pdfilter_core::stopping::StoppingProblem;
use pdfilter_core::{Distribution, Model, ObservationModel, RateMatrix};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub generator: Vec<Vec<f64>>,
    pub observation: BTreeMap<String, Value>,
    /// Observation alphabet; defaults to the labels used by `observation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// A validated model with its state and label names.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub file: ModelFile,
    pub model: Model,
    pub state_names: Vec<String>,
    pub label_names: Vec<String>,
}

fn label_name(v: &Value) -> Result<String, Error> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::Format(format!("observation labels must be strings or numbers, got {v}"))),
    }
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_value(v: Value) -> Result<Self, Error> {
        Ok(serde_json::from_value(v)?)
    }

    /// Builds and validates the model.
    pub fn load(self) -> Result<LoadedModel, Error> {
        let n = self.states.len();
        if n == 0 {
            return Err(Error::Format("model needs at least one state".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                return Err(Error::Format(format!("duplicate state name {s:?}")));
            }
        }
        if self.generator.len() != n {
            return Err(Error::Format(format!(
                "generator has {} rows for {n} states",
                self.generator.len()
            )));
        }
        let generator = RateMatrix::from_rows(&self.generator)?;

        for key in self.observation.keys() {
            if !self.states.contains(key) {
                return Err(Error::Format(format!("observation names unknown state {key:?}")));
            }
        }
        let raw: Vec<String> = self
            .states
            .iter()
            .map(|s| {
                self.observation
                    .get(s)
                    .ok_or_else(|| Error::Format(format!("state {s:?} has no observation label")))
                    .and_then(label_name)
            })
            .collect::<Result<_, _>>()?;
        let mut label_names: Vec<String> = match &self.labels {
            Some(v) => v.iter().map(label_name).collect::<Result<_, _>>()?,
            None => raw.clone(),
        };
        label_names.sort();
        label_names.dedup();
        if label_names.iter().all(|s| s.parse::<i64>().is_ok()) {
            label_names.sort_by_key(|s| s.parse::<i64>().expect("checked"));
        }
        let assignment: Vec<usize> = raw
            .iter()
            .map(|r| {
                label_names
                    .iter()
                    .position(|x| x == r)
                    .ok_or_else(|| Error::Format(format!("label {r:?} is not in the declared labels")))
            })
            .collect::<Result<_, _>>()?;
        let observation = ObservationModel::new(assignment, label_names.len())?;
        let model = Model::new(generator, observation)?;

        if let Some(init) = &self.initial {
            if init.len() != n {
                return Err(Error::Format(format!("initial has {} entries for {n} states", init.len())));
            }
            Distribution::new(init.clone())?;
        }
        let loaded = LoadedModel {
            state_names: self.states.clone(),
            label_names,
            model,
            file: self,
        };
        loaded.stopping_problem()?;
        Ok(loaded)
    }
}

impl LoadedModel {
    pub fn read(path: &Path) -> Result<Self, Error> {
        ModelFile::read(path)?.load()
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    /// The `initial` distribution, or uniform.
    pub fn initial(&self) -> Distribution {
        match &self.file.initial {
            Some(w) => Distribution::new(w.clone()).expect("validated on load"),
            None => Distribution::uniform(self.n_states()),
        }
    }

    pub fn state_index(&self, name: &str) -> Result<usize, Error> {
        self.state_names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::Config(format!("unknown state {name:?}")))
    }

    /// The stopping problem, if `g` and `alpha` are present (`l` defaults to
    /// zero).
    pub fn stopping_problem(&self) -> Result<Option<StoppingProblem>, Error> {
        let f = &self.file;
        match (&f.g, f.alpha) {
            (None, None) if f.l.is_none() => Ok(None),
            (Some(g), Some(alpha)) => {
                let n = self.n_states();
                let l = f.l.clone().unwrap_or_else(|| vec![0.0; n]);
                if g.len() != n || l.len() != n {
                    return Err(Error::Format(format!("g and l need {n} entries")));
                }
                Ok(Some(StoppingProblem::new(g.clone(), l, alpha)?))
            }
            _ => Err(Error::Format("stopping problem needs both g and alpha".into())),
        }
    }
}
