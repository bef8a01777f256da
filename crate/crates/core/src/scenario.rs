//! Scenario model and its JSON file format.
//!
//! A scenario file looks like:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "particles": [{"name": "e", "species": "electron", "charge": -1}, ...],
//!   "source": {"label": "O", "t": 0, "x": 0, "y": 0, "z": 0},
//!   "events": [{"label": "A", "t": 1, "x": -0.8, "y": 0, "z": 0}, ...],
//!   "initial_state": "singlet",
//!   "tests": [{"label": "A", "particle": "e", "axis": [0, 0, 1], "event": "A"}, ...],
//!   "queries": [{"given": [{"test": "A", "outcome": "+"}], "target": {"test": "E", "outcome": "+"}}]
//! }
//! ```
//!
//! `initial_state` may instead be `{"amplitudes": [[re, im], ...], "order": [names]}`
//! with `2^n` amplitudes, first listed particle most significant.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduction::Test;
use crate::spacetime::Event;
use crate::spin::{singlet, JointState, Outcome};

pub const SCHEMA_VERSION: u32 = 1;

/// Explicit amplitudes within this distance of unit norm are renormalized.
pub const LOAD_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Particle {
    pub name: String,
    pub species: String,
    pub charge: i32,
}

impl Particle {
    pub fn electron(name: impl Into<String>) -> Self {
        Particle {
            name: name.into(),
            species: "electron".into(),
            charge: -1,
        }
    }

    pub fn positron(name: impl Into<String>) -> Self {
        Particle {
            name: name.into(),
            species: "positron".into(),
            charge: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub test: String,
    pub outcome: Outcome,
}

impl Condition {
    pub fn new(test: impl Into<String>, outcome: Outcome) -> Self {
        Condition {
            test: test.into(),
            outcome,
        }
    }

    pub fn as_pair(&self) -> (String, Outcome) {
        (self.test.clone(), self.outcome)
    }
}

/// `P(target | given)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    #[serde(default)]
    pub given: Vec<Condition>,
    pub target: Condition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateSpec {
    Token(String),
    Explicit {
        amplitudes: Vec<[f64; 2]>,
        order: Vec<String>,
    },
}

/// The on-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub particles: Vec<Particle>,
    pub source: Event,
    pub events: Vec<Event>,
    pub initial_state: InitialStateSpec,
    pub tests: Vec<Test>,
    #[serde(default)]
    pub queries: Vec<Query>,
}

/// A loaded scenario with its initial state resolved.
///
/// Label references (test particles and events, query tests) are not checked
/// here; [`crate::causal::validate`] reports them as violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub note: Option<String>,
    pub particles: Vec<Particle>,
    pub source: Event,
    pub events: Vec<Event>,
    pub tests: Vec<Test>,
    pub initial: InitialStateSpec,
    pub initial_state: JointState,
    pub queries: Vec<Query>,
}

fn schema_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl Scenario {
    /// A scenario whose two particles start in the singlet.
    pub fn with_singlet(
        particles: Vec<Particle>,
        source: Event,
        events: Vec<Event>,
        tests: Vec<Test>,
        queries: Vec<Query>,
    ) -> Result<Self> {
        Scenario::from_file(ScenarioFile {
            schema: SCHEMA_VERSION,
            note: None,
            particles,
            source,
            events,
            initial_state: InitialStateSpec::Token("singlet".into()),
            tests,
            queries,
        })
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        if file.schema != SCHEMA_VERSION {
            return Err(schema_error(
                "schema",
                format!("unsupported schema version {}", file.schema),
            ));
        }
        for (i, p) in file.particles.iter().enumerate() {
            let expected = match p.species.as_str() {
                "electron" => Some(-1),
                "positron" => Some(1),
                _ => None,
            };
            let ok = match expected {
                Some(q) => p.charge == q,
                None => (-1..=1).contains(&p.charge),
            };
            if !ok {
                return Err(schema_error(
                    format!("particles[{i}].charge"),
                    format!("charge {} is not valid for species {}", p.charge, p.species),
                ));
            }
        }
        for (i, e) in file.events.iter().enumerate() {
            if !e.is_finite() {
                return Err(schema_error(
                    format!("events[{i}]"),
                    "non-finite coordinate",
                ));
            }
        }
        if !file.source.is_finite() {
            return Err(schema_error("source", "non-finite coordinate"));
        }
        let initial_state = resolve_state(&file.initial_state, &file.particles)?;
        Ok(Scenario {
            note: file.note,
            particles: file.particles,
            source: file.source,
            events: file.events,
            tests: file.tests,
            initial: file.initial_state,
            initial_state,
            queries: file.queries,
        })
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            schema: SCHEMA_VERSION,
            note: self.note.clone(),
            particles: self.particles.clone(),
            source: self.source.clone(),
            events: self.events.clone(),
            initial_state: self.initial.clone(),
            tests: self.tests.clone(),
            queries: self.queries.clone(),
        }
    }

    /// Looks up an event label, including the source event.
    pub fn event(&self, label: &str) -> Option<&Event> {
        if self.source.label == label {
            return Some(&self.source);
        }
        self.events.iter().find(|e| e.label == label)
    }

    pub fn test(&self, label: &str) -> Option<&Test> {
        self.tests.iter().find(|t| t.label == label)
    }

    pub fn is_singlet(&self) -> bool {
        matches!(&self.initial, InitialStateSpec::Token(t) if t == "singlet")
    }
}

fn resolve_state(spec: &InitialStateSpec, particles: &[Particle]) -> Result<JointState> {
    match spec {
        InitialStateSpec::Token(token) => {
            if token != "singlet" {
                return Err(schema_error(
                    "initial_state",
                    format!("unknown state token `{token}`"),
                ));
            }
            let [e, p] = particles else {
                return Err(schema_error(
                    "initial_state",
                    format!(
                        "singlet needs exactly two particles, found {}",
                        particles.len()
                    ),
                ));
            };
            singlet(&e.name, &p.name).map_err(|err| schema_error("particles", err.to_string()))
        }
        InitialStateSpec::Explicit { amplitudes, order } => {
            let mut names: Vec<&str> = particles.iter().map(|p| p.name.as_str()).collect();
            let mut listed: Vec<&str> = order.iter().map(String::as_str).collect();
            names.sort_unstable();
            listed.sort_unstable();
            if names != listed {
                return Err(schema_error(
                    "initial_state.order",
                    "must list every declared particle exactly once",
                ));
            }
            if order.is_empty() || amplitudes.len() != 1usize << order.len().min(30) {
                return Err(schema_error(
                    "initial_state.amplitudes",
                    format!(
                        "expected {} amplitudes for {} particles, found {}",
                        1usize << order.len().min(30),
                        order.len(),
                        amplitudes.len()
                    ),
                ));
            }
            let amps: Vec<Complex64> = amplitudes
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > LOAD_NORM_TOLERANCE {
                return Err(Error::Norm { norm });
            }
            let amps = amps.into_iter().map(|a| a / norm).collect();
            JointState::new(order.clone(), amps)
        }
    }
}

/// Parses scenario JSON text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let file: ScenarioFile = serde_path_to_error::deserialize(value).map_err(|err| {
        let path = err.path().to_string();
        schema_error(path, err.into_inner().to_string())
    })?;
    Scenario::from_file(file)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}
