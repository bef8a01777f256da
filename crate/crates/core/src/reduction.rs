//! Projective spin tests with von Neumann (Lüders) state reduction.
//!
//! A chain of tests is evaluated by exact depth-first enumeration of the
//! outcome tree. Between tests the spin state does not evolve. Branches whose
//! probability falls to [`PRUNE_THRESHOLD`] or below are kept in the joint
//! table as explicit zeros but are not expanded.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{
    eigenbasis_with, projector, projector_onto, Axis, JointState, Outcome, PhaseConvention,
    SpinOperator,
};

pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Input states further than this from unit norm are refused.
pub const DEGENERATE_NORM_TOLERANCE: f64 = 1e-8;

/// Maximum deviation for two chains to count as order invariant.
pub const ORDER_INVARIANCE_TOLERANCE: f64 = 1e-12;

/// One projective spin measurement on one particle at one event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Test {
    pub label: String,
    pub particle: String,
    pub axis: Axis,
    pub event: String,
}

impl Test {
    pub fn new(
        label: impl Into<String>,
        particle: impl Into<String>,
        axis: Axis,
        event: impl Into<String>,
    ) -> Self {
        Test {
            label: label.into(),
            particle: particle.into(),
            axis,
            event: event.into(),
        }
    }
}

/// How the two projectors of a test are built.
///
/// Both routes give the same operators; the eigenvector route exists so the
/// independence of every probability from eigenvector phases can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ProjectorSource {
    /// `(I ± σ·n)/2`
    #[default]
    Spectral,
    /// `|n±⟩⟨n±|` from phase-shifted eigenvectors.
    Eigenvectors(PhaseConvention),
}

impl ProjectorSource {
    fn projectors(&self, axis: &Axis) -> [SpinOperator; 2] {
        match self {
            ProjectorSource::Spectral => [
                projector(axis, Outcome::Plus),
                projector(axis, Outcome::Minus),
            ],
            ProjectorSource::Eigenvectors(convention) => {
                let (plus, minus) = eigenbasis_with(axis, *convention);
                [projector_onto(&plus), projector_onto(&minus)]
            }
        }
    }
}

/// Result of one outcome of a single test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestBranch {
    pub outcome: Outcome,
    pub probability: f64,
    /// Reduced state; `None` when the branch was pruned.
    pub state: Option<JointState>,
}

/// A leaf of the outcome tree of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub history: Vec<(String, Outcome)>,
    pub probability: f64,
    pub state: Option<JointState>,
}

pub fn apply_test(state: &JointState, test: &Test) -> Result<[TestBranch; 2]> {
    apply_test_using(state, test, ProjectorSource::Spectral)
}

pub fn apply_test_using(
    state: &JointState,
    test: &Test,
    source: ProjectorSource,
) -> Result<[TestBranch; 2]> {
    let norm = state.norm_sqr().sqrt();
    if (norm - 1.0).abs() > DEGENERATE_NORM_TOLERANCE {
        return Err(Error::DegenerateState { norm });
    }
    state.particle_index(&test.particle)?;
    let projectors = source.projectors(&test.axis);
    let mut out = Vec::with_capacity(2);
    for (outcome, proj) in Outcome::BOTH.into_iter().zip(projectors.iter()) {
        let projected = state.apply_local(proj, &test.particle)?;
        let overlap: Complex64 = state
            .amplitudes()
            .iter()
            .zip(&projected)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let p = overlap.re.clamp(0.0, 1.0);
        if p <= PRUNE_THRESHOLD {
            out.push(TestBranch {
                outcome,
                probability: 0.0,
                state: None,
            });
            continue;
        }
        let scale = 1.0 / p.sqrt();
        let amplitudes = projected.into_iter().map(|a| a * scale).collect();
        out.push(TestBranch {
            outcome,
            probability: p,
            state: Some(JointState::from_parts_unchecked(
                state.particles().to_vec(),
                amplitudes,
            )),
        });
    }
    let minus = out.pop().expect("two branches");
    let plus = out.pop().expect("two branches");
    Ok([plus, minus])
}

/// Joint law of a chain of tests, keyed by outcome tuples in `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    order: Vec<String>,
    table: BTreeMap<Vec<Outcome>, f64>,
}

impl OutcomeDistribution {
    pub fn new(order: Vec<String>, table: BTreeMap<Vec<Outcome>, f64>) -> Self {
        OutcomeDistribution { order, table }
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn table(&self) -> &BTreeMap<Vec<Outcome>, f64> {
        &self.table
    }

    pub fn probability(&self, outcomes: &[Outcome]) -> f64 {
        self.table.get(outcomes).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.table.values().sum()
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.order
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownTest(label.to_string()))
    }

    /// The same law with tuples permuted into `order`.
    pub fn aligned_to(&self, order: &[String]) -> Result<OutcomeDistribution> {
        if order.len() != self.order.len() {
            return Err(Error::OrderMismatch);
        }
        let positions = order
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        let table = self
            .table
            .iter()
            .map(|(tuple, p)| (positions.iter().map(|&i| tuple[i]).collect(), *p))
            .collect();
        Ok(OutcomeDistribution {
            order: order.to_vec(),
            table,
        })
    }

    /// Largest per-tuple difference to `other`, after aligning test labels.
    pub fn max_deviation(&self, other: &OutcomeDistribution) -> Result<f64> {
        let other = other.aligned_to(&self.order)?;
        let keys: BTreeSet<&Vec<Outcome>> = self.table.keys().chain(other.table.keys()).collect();
        Ok(keys
            .into_iter()
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .fold(0.0, f64::max))
    }
}

fn check_chain(tests: &[Test]) -> Result<()> {
    if tests.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut seen = HashSet::new();
    for t in tests {
        if !seen.insert(t.label.as_str()) {
            return Err(Error::DuplicateLabel(t.label.clone()));
        }
    }
    Ok(())
}

/// All leaves of the outcome tree in depth-first order (`+` before `−`).
pub fn enumerate_branches(
    state: &JointState,
    tests: &[Test],
    source: ProjectorSource,
) -> Result<Vec<Branch>> {
    check_chain(tests)?;
    let mut leaves = Vec::with_capacity(1 << tests.len().min(16));
    let mut history = Vec::with_capacity(tests.len());
    descend(Some(state), 1.0, tests, source, &mut history, &mut leaves)?;
    Ok(leaves)
}

fn descend(
    state: Option<&JointState>,
    probability: f64,
    remaining: &[Test],
    source: ProjectorSource,
    history: &mut Vec<(String, Outcome)>,
    leaves: &mut Vec<Branch>,
) -> Result<()> {
    let Some((test, rest)) = remaining.split_first() else {
        leaves.push(Branch {
            history: history.clone(),
            probability,
            state: state.cloned(),
        });
        return Ok(());
    };
    match state {
        Some(state) => {
            for branch in apply_test_using(state, test, source)? {
                history.push((test.label.clone(), branch.outcome));
                descend(
                    branch.state.as_ref(),
                    probability * branch.probability,
                    rest,
                    source,
                    history,
                    leaves,
                )?;
                history.pop();
            }
        }
        // pruned subtree: zeros all the way down
        None => {
            for outcome in Outcome::BOTH {
                history.push((test.label.clone(), outcome));
                descend(None, 0.0, rest, source, history, leaves)?;
                history.pop();
            }
        }
    }
    Ok(())
}

pub fn run_chain(state: &JointState, tests: &[Test]) -> Result<OutcomeDistribution> {
    run_chain_using(state, tests, ProjectorSource::Spectral)
}

pub fn run_chain_using(
    state: &JointState,
    tests: &[Test],
    source: ProjectorSource,
) -> Result<OutcomeDistribution> {
    let leaves = enumerate_branches(state, tests, source)?;
    let order = tests.iter().map(|t| t.label.clone()).collect();
    let table = leaves
        .into_iter()
        .map(|b| {
            (
                b.history.into_iter().map(|(_, o)| o).collect(),
                b.probability,
            )
        })
        .collect();
    Ok(OutcomeDistribution { order, table })
}

/// `P(target ∧ given) / P(given)` by exact summation over the joint table.
pub fn conditional(
    dist: &OutcomeDistribution,
    given: &[(String, Outcome)],
    target: &(String, Outcome),
) -> Result<f64> {
    let given_pos = given
        .iter()
        .map(|(l, o)| Ok((dist.position(l)?, *o)))
        .collect::<Result<Vec<_>>>()?;
    let target_pos = dist.position(&target.0)?;
    let mut p_given = 0.0;
    let mut p_both = 0.0;
    for (tuple, p) in &dist.table {
        if given_pos.iter().all(|&(i, o)| tuple[i] == o) {
            p_given += p;
            if tuple[target_pos] == target.1 {
                p_both += p;
            }
        }
    }
    if p_given <= PRUNE_THRESHOLD {
        return Err(Error::ZeroConditionProbability {
            probability: p_given,
        });
    }
    Ok(p_both / p_given)
}

pub fn marginal(dist: &OutcomeDistribution, label: &str) -> Result<BTreeMap<Outcome, f64>> {
    let i = dist.position(label)?;
    let mut out: BTreeMap<Outcome, f64> = Outcome::BOTH.iter().map(|o| (*o, 0.0)).collect();
    for (tuple, p) in &dist.table {
        *out.get_mut(&tuple[i]).expect("both outcomes present") += p;
    }
    Ok(out)
}

/// Runs every order and reports the largest per-tuple disagreement.
pub fn order_invariance(state: &JointState, orders: &[Vec<Test>]) -> Result<(bool, f64)> {
    let Some(first) = orders.first() else {
        return Ok((true, 0.0));
    };
    let reference_labels: BTreeSet<&str> = first.iter().map(|t| t.label.as_str()).collect();
    for order in orders {
        let labels: BTreeSet<&str> = order.iter().map(|t| t.label.as_str()).collect();
        if labels != reference_labels || order.len() != first.len() {
            return Err(Error::OrderMismatch);
        }
        for t in order {
            let same = first.iter().find(|f| f.label == t.label);
            if same != Some(t) {
                return Err(Error::OrderMismatch);
            }
        }
    }
    let reference = run_chain(state, first)?;
    let mut worst: f64 = 0.0;
    for order in &orders[1..] {
        let dist = run_chain(state, order)?;
        worst = worst.max(reference.max_deviation(&dist)?);
    }
    Ok((worst <= ORDER_INVARIANCE_TOLERANCE, worst))
}

/// `E[a·b]` for tests along `a` on the first particle and `b` on the second.
pub fn correlation(state: &JointState, a: &Axis, b: &Axis) -> Result<f64> {
    let [first, second] = state.particles() else {
        return Err(Error::InvalidState(format!(
            "correlation needs two particles, state has {}",
            state.particles().len()
        )));
    };
    let tests = [
        Test::new("a", first.clone(), *a, ""),
        Test::new("b", second.clone(), *b, ""),
    ];
    let dist = run_chain(state, &tests)?;
    Ok(dist
        .table()
        .iter()
        .map(|(tuple, p)| tuple[0].value() * tuple[1].value() * p)
        .sum())
}
