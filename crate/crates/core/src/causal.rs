//! Physical admissibility of scenarios.
//!
//! Two hard rules: every test event must be reachable from the source event
//! (closed forward lightcone of O), and all tests on one particle must lie on
//! a single causal chain. Two spacelike-separated tests on the same charged
//! particle would mean two copies of it exist simultaneously in some frame,
//! which charge conservation forbids.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Query, Scenario};
use crate::spacetime::{classify, in_forward_lightcone, IntervalClass};

/// Maximum number of test orderings returned by [`linear_extensions`].
pub const MAX_EXTENSIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    ChargeConservationViolation,
    SourceCausalityViolation,
    UnknownReference,
    DuplicateLabel,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::ChargeConservationViolation => "ChargeConservationViolation",
            ViolationKind::SourceCausalityViolation => "SourceCausalityViolation",
            ViolationKind::UnknownReference => "UnknownReference",
            ViolationKind::DuplicateLabel => "DuplicateLabel",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: String) -> Self {
        Violation { kind, detail }
    }
}

/// Outcome of [`validate`]: violations plus lightlike boundary cases that
/// were admitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub boundary_cases: Vec<String>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

fn duplicates<'a>(labels: impl IntoIterator<Item = &'a str>) -> BTreeSet<&'a str> {
    let mut seen = HashSet::new();
    labels.into_iter().filter(|l| !seen.insert(*l)).collect()
}

pub fn validate(s: &Scenario) -> Validation {
    use ViolationKind::*;
    let mut violations = Vec::new();
    let mut boundary = Vec::new();

    for name in duplicates(s.particles.iter().map(|p| p.name.as_str())) {
        violations.push(Violation::new(DuplicateLabel, format!("particle `{name}`")));
    }
    let event_labels =
        std::iter::once(s.source.label.as_str()).chain(s.events.iter().map(|e| e.label.as_str()));
    for label in duplicates(event_labels) {
        violations.push(Violation::new(DuplicateLabel, format!("event `{label}`")));
    }
    for label in duplicates(s.tests.iter().map(|t| t.label.as_str())) {
        violations.push(Violation::new(DuplicateLabel, format!("test `{label}`")));
    }
    let mut by_site: BTreeMap<(&str, &str), Vec<&str>> = BTreeMap::new();
    for t in &s.tests {
        by_site
            .entry((t.particle.as_str(), t.event.as_str()))
            .or_default()
            .push(t.label.as_str());
    }
    for ((particle, event), mut labels) in by_site {
        if labels.len() > 1 {
            labels.sort_unstable();
            violations.push(Violation::new(
                DuplicateLabel,
                format!(
                    "tests {} all test particle `{particle}` at event `{event}`",
                    labels.join(", ")
                ),
            ));
        }
    }

    let known_particles: HashSet<&str> = s.particles.iter().map(|p| p.name.as_str()).collect();
    for t in &s.tests {
        if !known_particles.contains(t.particle.as_str()) {
            violations.push(Violation::new(
                UnknownReference,
                format!("test `{}` names unknown particle `{}`", t.label, t.particle),
            ));
        }
        if s.event(&t.event).is_none() {
            violations.push(Violation::new(
                UnknownReference,
                format!("test `{}` names unknown event `{}`", t.label, t.event),
            ));
        }
    }
    let known_tests: HashSet<&str> = s.tests.iter().map(|t| t.label.as_str()).collect();
    for (i, q) in s.queries.iter().enumerate() {
        for c in q.given.iter().chain(std::iter::once(&q.target)) {
            if !known_tests.contains(c.test.as_str()) {
                violations.push(Violation::new(
                    UnknownReference,
                    format!("query {i} names unknown test `{}`", c.test),
                ));
            }
        }
    }

    for t in &s.tests {
        let Some(e) = s.event(&t.event) else { continue };
        if !in_forward_lightcone(&s.source, e) {
            violations.push(Violation::new(
                SourceCausalityViolation,
                format!(
                    "test `{}` at event `{}` is outside the forward lightcone of source `{}`",
                    t.label, e.label, s.source.label
                ),
            ));
        } else if e.label != s.source.label && classify(&s.source, e) == IntervalClass::Lightlike {
            boundary.push(format!(
                "test `{}` at event `{}` is lightlike from source `{}`",
                t.label, e.label, s.source.label
            ));
        }
    }

    let mut per_particle: BTreeMap<&str, Vec<(&str, &crate::spacetime::Event)>> = BTreeMap::new();
    for t in &s.tests {
        if let Some(e) = s.event(&t.event) {
            per_particle
                .entry(t.particle.as_str())
                .or_default()
                .push((t.label.as_str(), e));
        }
    }
    for (particle, mut sites) in per_particle {
        sites.sort_by(|a, b| a.0.cmp(b.0));
        for (i, (la, ea)) in sites.iter().enumerate() {
            for (lb, eb) in &sites[i + 1..] {
                if ea.label == eb.label {
                    continue;
                }
                if !in_forward_lightcone(ea, eb) && !in_forward_lightcone(eb, ea) {
                    violations.push(Violation::new(
                        ChargeConservationViolation,
                        format!(
                            "tests `{la}` and `{lb}` on particle `{particle}` are spacelike separated (events `{}`, `{}`)",
                            ea.label, eb.label
                        ),
                    ));
                } else if classify(ea, eb) == IntervalClass::Lightlike {
                    boundary.push(format!(
                        "tests `{la}` and `{lb}` on particle `{particle}` are lightlike separated"
                    ));
                }
            }
        }
    }

    violations.sort();
    boundary.sort();
    Validation {
        violations,
        boundary_cases: boundary,
    }
}

/// Test orderings compatible with the causal order of their events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extensions {
    pub orders: Vec<Vec<String>>,
    pub truncated: bool,
}

/// All total orders of the tests that respect the causal order of their
/// events, generated by choosing the smallest available label first.
pub fn linear_extensions(s: &Scenario) -> Result<Extensions> {
    if !validate(s).is_ok() {
        return Err(Error::NotValidated);
    }
    let mut tests: Vec<(&str, &crate::spacetime::Event)> = s
        .tests
        .iter()
        .map(|t| (t.label.as_str(), s.event(&t.event).expect("validated")))
        .collect();
    tests.sort_by(|a, b| a.0.cmp(b.0));
    let n = tests.len();
    // preds[j] = tests that must come before j
    let preds: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&i| {
                    i != j
                        && in_forward_lightcone(tests[i].1, tests[j].1)
                        && !in_forward_lightcone(tests[j].1, tests[i].1)
                })
                .collect()
        })
        .collect();

    let mut out = Extensions {
        orders: Vec::new(),
        truncated: false,
    };
    let mut placed = vec![false; n];
    let mut current = Vec::with_capacity(n);
    extend(&tests, &preds, &mut placed, &mut current, &mut out);
    Ok(out)
}

fn extend(
    tests: &[(&str, &crate::spacetime::Event)],
    preds: &[Vec<usize>],
    placed: &mut [bool],
    current: &mut Vec<usize>,
    out: &mut Extensions,
) {
    if out.truncated {
        return;
    }
    if current.len() == tests.len() {
        if out.orders.len() == MAX_EXTENSIONS {
            out.truncated = true;
            return;
        }
        out.orders
            .push(current.iter().map(|&i| tests[i].0.to_string()).collect());
        return;
    }
    for j in 0..tests.len() {
        if placed[j] || !preds[j].iter().all(|&i| placed[i]) {
            continue;
        }
        placed[j] = true;
        current.push(j);
        extend(tests, preds, placed, current, out);
        current.pop();
        placed[j] = false;
        if out.truncated {
            return;
        }
    }
}

/// Whether `order` lists every test once and never places a test before one
/// whose event lies strictly in its causal past.
pub fn is_causally_consistent(s: &Scenario, order: &[String]) -> bool {
    let mut labels: Vec<&str> = order.iter().map(String::as_str).collect();
    let mut all: Vec<&str> = s.tests.iter().map(|t| t.label.as_str()).collect();
    labels.sort_unstable();
    all.sort_unstable();
    if labels != all {
        return false;
    }
    let events: Option<Vec<_>> = order
        .iter()
        .map(|l| s.test(l).and_then(|t| s.event(&t.event)))
        .collect();
    let Some(events) = events else { return false };
    for (i, early) in events.iter().enumerate() {
        for late in &events[i + 1..] {
            if in_forward_lightcone(late, early) && !in_forward_lightcone(early, late) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Warning {
    pub kind: String,
    pub condition: String,
    pub target: String,
    pub detail: String,
}

pub const INACCESSIBLE_CONDITION: &str = "CausallyInaccessibleCondition";

/// Conditions of `query` whose test event is not in the closed past
/// lightcone of the target test's event.
pub fn accessibility_warnings(s: &Scenario, query: &Query) -> Result<Vec<Warning>> {
    let resolve = |label: &str| {
        let test = s
            .test(label)
            .ok_or_else(|| Error::UnknownReference(label.to_string()))?;
        s.event(&test.event)
            .ok_or_else(|| Error::UnknownReference(test.event.clone()))
    };
    let target = resolve(&query.target.test)?;
    let mut seen = HashSet::new();
    let mut warnings = Vec::new();
    for c in &query.given {
        let cond = resolve(&c.test)?;
        if !seen.insert(c.test.as_str()) {
            continue;
        }
        if !in_forward_lightcone(cond, target) {
            warnings.push(Warning {
                kind: INACCESSIBLE_CONDITION.into(),
                condition: c.test.clone(),
                target: query.target.test.clone(),
                detail: format!(
                    "outcome of `{}` (event `{}`) is outside the past lightcone of `{}` (event `{}`)",
                    c.test, cond.label, query.target.test, target.label
                ),
            });
        }
    }
    Ok(warnings)
}
