//! End-to-end runs over a scenario and the report they produce.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::causal::{accessibility_warnings, linear_extensions, validate, Validation, Warning};
use crate::error::{Error, Result};
use crate::montecarlo::{montecarlo_sample, SamplerReport};
use crate::reduction::{conditional, correlation, run_chain, OutcomeDistribution, Test};
use crate::scenario::{Condition, Scenario, ScenarioFile, SCHEMA_VERSION};
use crate::spacetime::{boost, order_reversing_frame, Event, Velocity};
use crate::spin::{singlet, Axis, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Ignored in exact mode.
    pub samples: u64,
    /// Ignored in exact mode.
    pub seed: u64,
    pub frame: Option<Velocity>,
    pub output: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Exact,
            samples: 100_000,
            seed: 0,
            frame: None,
            output: OutputFormat::Table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionRow {
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingReport {
    pub order: Vec<String>,
    pub distribution: Vec<DistributionRow>,
}

impl OrderingReport {
    fn from_distribution(dist: &OutcomeDistribution) -> Self {
        OrderingReport {
            order: dist.order().to_vec(),
            distribution: dist
                .table()
                .iter()
                .map(|(outcomes, p)| DistributionRow {
                    outcomes: outcomes.clone(),
                    probability: *p,
                })
                .collect(),
        }
    }

    pub fn to_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution::new(
            self.order.clone(),
            self.distribution
                .iter()
                .map(|r| (r.outcomes.clone(), r.probability))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryAnswer {
    pub given: Vec<Condition>,
    pub target: Condition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    /// Largest disagreement of the answer across the reported orderings.
    pub spread: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameTest {
    pub label: String,
    pub event: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReversingFrame {
    /// Earlier test in the lab frame.
    pub first: String,
    pub second: String,
    pub velocity: Velocity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameReport {
    pub velocity: Velocity,
    /// Source first, then the scenario events, all boosted.
    pub events: Vec<Event>,
    pub lab_order: Vec<String>,
    pub frame_order: Vec<FrameTest>,
    /// Test pairs `[lab-earlier, lab-later]` whose time order differs in this frame.
    pub reordered: Vec<[String; 2]>,
    /// For each spacelike test pair, a frame that reverses its lab order.
    pub reversing_frames: Vec<ReversingFrame>,
}

impl FrameReport {
    /// Whether test `a` is strictly earlier than test `b` in this frame.
    pub fn precedes(&self, a: &str, b: &str) -> Option<bool> {
        let ta = self.frame_order.iter().find(|f| f.label == a)?.t;
        let tb = self.frame_order.iter().find(|f| f.label == b)?.t;
        Some(ta < tb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: u32,
    pub scenario: ScenarioFile,
    pub mode: Mode,
    pub validation: Validation,
    pub orderings: Vec<OrderingReport>,
    pub truncated: bool,
    pub queries: Vec<QueryAnswer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerReport>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite")
    }
}

fn tests_in_order(s: &Scenario, order: &[String]) -> Vec<Test> {
    order
        .iter()
        .map(|l| s.test(l).cloned().expect("order drawn from scenario tests"))
        .collect()
}

fn compare_time(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("finite coordinates")
}

/// Tests sorted by lab-frame time, ties broken by label.
pub fn lab_order(s: &Scenario) -> Vec<String> {
    let mut tests: Vec<(&str, f64)> = s
        .tests
        .iter()
        .filter_map(|t| s.event(&t.event).map(|e| (t.label.as_str(), e.t)))
        .collect();
    tests.sort_by(|a, b| compare_time(a.1, b.1).then(a.0.cmp(b.0)));
    tests.into_iter().map(|(l, _)| l.to_string()).collect()
}

fn answer(
    s: &Scenario,
    dists: &[OutcomeDistribution],
    given: &[Condition],
    target: &Condition,
) -> Result<QueryAnswer> {
    let query = crate::scenario::Query {
        given: given.to_vec(),
        target: target.clone(),
    };
    let warnings = accessibility_warnings(s, &query)?;
    let given_pairs: Vec<(String, Outcome)> = given.iter().map(Condition::as_pair).collect();
    let mut values = Vec::with_capacity(dists.len());
    let mut error = None;
    for d in dists {
        match conditional(d, &given_pairs, &target.as_pair()) {
            Ok(p) => values.push(p),
            Err(e @ Error::ZeroConditionProbability { .. }) => {
                error = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let (probability, spread) = if error.is_some() || values.is_empty() {
        (None, 0.0)
    } else {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (Some(values[0]), hi - lo)
    };
    Ok(QueryAnswer {
        given: given.to_vec(),
        target: target.clone(),
        probability,
        spread,
        error,
        warnings,
    })
}

/// Validates, evaluates and reports on a scenario.
///
/// An invalid scenario yields a report carrying its violations and no
/// distributions.
pub fn run(s: &Scenario, cfg: &RunConfig) -> Result<Report> {
    let validation = validate(s);
    let mut report = Report {
        schema: SCHEMA_VERSION,
        scenario: s.to_file(),
        mode: cfg.mode,
        validation,
        orderings: Vec::new(),
        truncated: false,
        queries: Vec::new(),
        frame: None,
        sampler: None,
    };
    if !report.validation.is_ok() {
        return Ok(report);
    }
    if let Some(v) = &cfg.frame {
        report.frame = Some(frame_report(s, v));
    }
    if s.tests.is_empty() {
        return Ok(report);
    }

    let dists = match cfg.mode {
        Mode::Exact => {
            let ext = linear_extensions(s)?;
            report.truncated = ext.truncated;
            let dists = ext
                .orders
                .iter()
                .map(|order| run_chain(&s.initial_state, &tests_in_order(s, order)))
                .collect::<Result<Vec<_>>>()?;
            report.orderings = dists
                .iter()
                .map(OrderingReport::from_distribution)
                .collect();
            dists
        }
        Mode::Montecarlo => {
            let sampler = montecarlo_sample(s, &lab_order(s), cfg.samples, cfg.seed)?;
            let empirical = sampler.empirical();
            report.sampler = Some(sampler);
            vec![empirical]
        }
    };

    report.queries = s
        .queries
        .iter()
        .map(|q| answer(s, &dists, &q.given, &q.target))
        .collect::<Result<Vec<_>>>()?;
    Ok(report)
}

/// Boosted coordinates of every event and the time order of the tests in the
/// frame moving with velocity `v`.
pub fn frame_report(s: &Scenario, v: &Velocity) -> FrameReport {
    let events: Vec<Event> = std::iter::once(&s.source)
        .chain(&s.events)
        .map(|e| boost(e, v))
        .collect();
    let boosted_time = |event: &str| events.iter().find(|e| e.label == event).map(|e| e.t);

    let lab = lab_order(s);
    let mut frame_order: Vec<FrameTest> = s
        .tests
        .iter()
        .filter_map(|t| {
            boosted_time(&t.event).map(|time| FrameTest {
                label: t.label.clone(),
                event: t.event.clone(),
                t: time,
            })
        })
        .collect();
    frame_order.sort_by(|a, b| compare_time(a.t, b.t).then(a.label.cmp(&b.label)));

    let lab_events: Vec<&Event> = lab
        .iter()
        .map(|l| {
            s.event(&s.test(l).expect("lab order from tests").event)
                .expect("resolved")
        })
        .collect();
    let frame_time = |label: &str| {
        frame_order
            .iter()
            .find(|f| f.label == label)
            .map(|f| f.t)
            .expect("every lab test has a frame time")
    };
    let mut reordered = Vec::new();
    let mut reversing_frames = Vec::new();
    for i in 0..lab.len() {
        for j in i + 1..lab.len() {
            let lab_cmp = compare_time(lab_events[i].t, lab_events[j].t);
            let frame_cmp = compare_time(frame_time(&lab[i]), frame_time(&lab[j]));
            if lab_cmp != frame_cmp {
                reordered.push([lab[i].clone(), lab[j].clone()]);
            }
            if let Some(velocity) = order_reversing_frame(lab_events[i], lab_events[j]) {
                reversing_frames.push(ReversingFrame {
                    first: lab[i].clone(),
                    second: lab[j].clone(),
                    velocity,
                });
            }
        }
    }

    FrameReport {
        velocity: *v,
        events,
        lab_order: lab,
        frame_order,
        reordered,
        reversing_frames,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub theta: f64,
    pub axis: Axis,
    pub correlation: f64,
    /// `−cos θ`, present only for the singlet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: Axis,
    pub plane_normal_partner: Axis,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

pub const NOT_SINGLET: &str = "NotSinglet";

/// `E(a, b_i)` for `b_i = a` rotated by `θ_i = iπ/(m−1)` towards a fixed
/// vector orthogonal to `a`.
pub fn correlation_sweep(s: &Scenario, a: &Axis, steps: usize) -> Result<Sweep> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    let state = &s.initial_state;
    let is_singlet = match state.particles() {
        [e, p] => {
            let reference = singlet(e, p)?;
            (reference.inner(state).norm() - 1.0).abs() <= 1e-10
        }
        _ => false,
    };
    let mut warnings = Vec::new();
    if !is_singlet {
        warnings.push(format!(
            "{NOT_SINGLET}: initial state is not the singlet; -cos(theta) reference omitted"
        ));
    }
    let towards = a.orthogonal();
    let rows = (0..steps)
        .map(|i| {
            let theta = i as f64 * PI / (steps - 1) as f64;
            let b = a.rotated_towards(&towards, theta);
            Ok(SweepRow {
                theta,
                axis: b,
                correlation: correlation(state, a, &b)?,
                reference: is_singlet.then(|| -theta.cos()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        axis: *a,
        plane_normal_partner: towards,
        rows,
        warnings,
    })
}

fn tuple_string(outcomes: &[Outcome]) -> String {
    outcomes
        .iter()
        .map(|o| o.symbol())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_validation(v: &Validation) -> String {
    let mut out = String::new();
    if v.is_ok() {
        out.push_str("validation: ok\n");
    } else {
        let _ = writeln!(out, "validation: {} violation(s)", v.violations.len());
        for violation in &v.violations {
            let _ = writeln!(out, "  {}: {}", violation.kind, violation.detail);
        }
    }
    for b in &v.boundary_cases {
        let _ = writeln!(out, "  boundary: {b}");
    }
    out
}

pub fn render_frame(f: &FrameReport) -> String {
    let mut out = String::new();
    let [vx, vy, vz] = f.velocity.components();
    let _ = writeln!(out, "frame velocity: ({vx}, {vy}, {vz})");
    let _ = writeln!(
        out,
        "{:<10} {:>12} {:>12} {:>12} {:>12}",
        "event", "t'", "x'", "y'", "z'"
    );
    for e in &f.events {
        let _ = writeln!(
            out,
            "{:<10} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            e.label, e.t, e.x, e.y, e.z
        );
    }
    let _ = writeln!(out, "lab order:   {}", f.lab_order.join(" < "));
    let frame: Vec<&str> = f.frame_order.iter().map(|t| t.label.as_str()).collect();
    let _ = writeln!(out, "frame order: {}", frame.join(" < "));
    for [a, b] in &f.reordered {
        let _ = writeln!(out, "  reordered: {a} before {b} in lab, not in this frame");
    }
    for r in &f.reversing_frames {
        let [x, y, z] = r.velocity.components();
        let _ = writeln!(
            out,
            "  {} / {} reversed by v = ({x:.6}, {y:.6}, {z:.6})",
            r.first, r.second
        );
    }
    out
}

pub fn render_sweep(s: &Sweep) -> String {
    let mut out = String::new();
    for w in &s.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    let _ = writeln!(
        out,
        "{:>10} {:>14} {:>14}",
        "theta", "E(a,b)", "-cos(theta)"
    );
    for r in &s.rows {
        let reference = r
            .reference
            .map(|x| format!("{:>14.10}", x + 0.0))
            .unwrap_or_else(|| format!("{:>14}", "-"));
        // `+ 0.0` keeps `-0.0` from printing with a sign.
        let _ = writeln!(
            out,
            "{:>10.6} {:>14.10} {reference}",
            r.theta,
            r.correlation + 0.0
        );
    }
    out
}

pub fn render_table(r: &Report) -> String {
    let mut out = render_validation(&r.validation);
    for o in &r.orderings {
        let _ = writeln!(out, "\nordering {}", o.order.join(" < "));
        for row in &o.distribution {
            let _ = writeln!(
                out,
                "  {:<12} {:.12}",
                tuple_string(&row.outcomes),
                row.probability
            );
        }
    }
    if r.truncated {
        out.push_str("(orderings truncated)\n");
    }
    if let Some(sampler) = &r.sampler {
        let _ = writeln!(
            out,
            "\nmonte carlo: {} samples, seed {}, order {}",
            sampler.samples,
            sampler.seed,
            sampler.order.join(" < ")
        );
        let _ = writeln!(out, "generator: {}", sampler.generator);
        let _ = writeln!(
            out,
            "  {:<12} {:>10} {:>12} {:>12} {:>12}",
            "outcomes", "count", "frequency", "exact", "std.err"
        );
        for row in &sampler.rows {
            let _ = writeln!(
                out,
                "  {:<12} {:>10} {:>12.6} {:>12.6} {:>12.6}",
                tuple_string(&row.outcomes),
                row.count,
                row.frequency,
                row.exact,
                row.standard_error
            );
        }
        let _ = writeln!(
            out,
            "  max |freq - exact| = {:.6}",
            sampler.max_abs_deviation
        );
    }
    if !r.queries.is_empty() {
        out.push_str("\nqueries\n");
    }
    for q in &r.queries {
        let given: Vec<String> = q
            .given
            .iter()
            .map(|c| format!("{}={}", c.test, c.outcome))
            .collect();
        let value = match (&q.probability, &q.error) {
            (Some(p), _) => format!("{p:.12}"),
            (None, Some(e)) => format!("undefined ({e})"),
            (None, None) => "undefined".to_string(),
        };
        let _ = writeln!(
            out,
            "  P({}={} | {}) = {value}",
            q.target.test,
            q.target.outcome,
            given.join(", ")
        );
        for w in &q.warnings {
            let _ = writeln!(out, "    warning {}: {}", w.kind, w.detail);
        }
    }
    if let Some(f) = &r.frame {
        out.push('\n');
        out.push_str(&render_frame(f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Particle, Query};

    fn fig1(with_b: bool) -> Scenario {
        let mut tests = vec![
            Test::new("A", "e", Axis::K, "A"),
            Test::new("B", "p", Axis::J, "B"),
            Test::new("E", "p", Axis::K, "E"),
        ];
        if !with_b {
            tests.remove(1);
        }
        Scenario::with_singlet(
            vec![Particle::electron("e"), Particle::positron("p")],
            Event::new("O", 0.0, 0.0, 0.0, 0.0),
            vec![
                Event::new("A", 1.0, -0.8, 0.0, 0.0),
                Event::new("B", 0.9, 0.8, 0.0, 0.0),
                Event::new("E", 3.0, 0.0, 0.0, 0.0),
            ],
            tests,
            vec![
                Query {
                    given: vec![Condition::new("A", Outcome::Plus)],
                    target: Condition::new("E", Outcome::Plus),
                },
                Query {
                    given: vec![Condition::new("A", Outcome::Plus)],
                    target: Condition::new("E", Outcome::Minus),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn exact_run_answers_the_headline_query() {
        let r = run(&fig1(true), &RunConfig::default()).unwrap();
        assert_eq!(r.orderings.len(), 2);
        let q = &r.queries[0];
        assert!((q.probability.unwrap() - 0.5).abs() <= 1e-12);
        assert!(q.spread <= 1e-12);
        assert!(q.warnings.is_empty());
    }

    #[test]
    fn without_b_the_answer_is_zero() {
        let r = run(&fig1(false), &RunConfig::default()).unwrap();
        assert!(r.queries[0].probability.unwrap().abs() <= 1e-12);
        assert!((r.queries[1].probability.unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn invalid_scenario_report_has_no_distributions() {
        let mut s = fig1(true);
        s.events.push(Event::new("D", 1.1, -0.5, 0.0, 0.0));
        s.tests[2] = Test::new("D", "p", Axis::K, "D");
        s.queries.clear();
        let r = run(&s, &RunConfig::default()).unwrap();
        assert!(!r.validation.is_ok());
        assert!(r.orderings.is_empty() && r.queries.is_empty() && r.sampler.is_none());
    }

    #[test]
    fn zero_probability_condition_is_reported_not_fatal() {
        let mut s = fig1(false);
        s.queries = vec![Query {
            given: vec![
                Condition::new("A", Outcome::Plus),
                Condition::new("E", Outcome::Plus),
            ],
            target: Condition::new("E", Outcome::Plus),
        }];
        let r = run(&s, &RunConfig::default()).unwrap();
        assert!(r.queries[0].probability.is_none());
        assert!(r.queries[0].error.is_some());
    }

    #[test]
    fn montecarlo_run_attaches_sampler() {
        let cfg = RunConfig {
            mode: Mode::Montecarlo,
            samples: 20_000,
            seed: 5,
            ..RunConfig::default()
        };
        let r = run(&fig1(true), &cfg).unwrap();
        let sampler = r.sampler.as_ref().unwrap();
        assert_eq!(sampler.order, ["B", "A", "E"]);
        assert!(r.orderings.is_empty());
        let p = r.queries[0].probability.unwrap();
        assert!((p - 0.5).abs() < 0.05, "{p}");
    }

    #[test]
    fn lab_frame_report() {
        let f = frame_report(&fig1(true), &Velocity::ZERO);
        assert_eq!(f.lab_order, ["B", "A", "E"]);
        assert_eq!(f.precedes("B", "A"), Some(true));
        assert!(f.reordered.is_empty());
        assert_eq!(f.reversing_frames.len(), 1);
        assert_eq!(f.reversing_frames[0].first, "B");
        assert_eq!(f.reversing_frames[0].second, "A");
    }

    #[test]
    fn reversing_frame_puts_a_first() {
        let s = fig1(true);
        let b = s.event("B").unwrap();
        let a = s.event("A").unwrap();
        let v = order_reversing_frame(b, a).unwrap();
        let f = frame_report(&s, &v);
        assert_eq!(f.precedes("A", "B"), Some(true));
        assert_eq!(f.reordered, vec![["B".to_string(), "A".to_string()]]);
        assert_eq!(f.precedes("B", "E"), Some(true));
    }

    #[test]
    fn sweep_endpoints() {
        let r = correlation_sweep(&fig1(true), &Axis::K, 3).unwrap();
        assert!(r.warnings.is_empty());
        let e: Vec<f64> = r.rows.iter().map(|r| r.correlation).collect();
        assert!((e[0] + 1.0).abs() < 1e-12);
        assert!(e[1].abs() < 1e-12);
        assert!((e[2] - 1.0).abs() < 1e-12);
        assert!(matches!(
            correlation_sweep(&fig1(true), &Axis::K, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sweep_on_product_state_warns() {
        let mut s = fig1(true);
        s.initial_state = crate::spin::JointState::product(&[
            ("e", crate::spin::SpinState::up()),
            ("p", crate::spin::SpinState::down()),
        ])
        .unwrap();
        let r = correlation_sweep(&s, &Axis::K, 4).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].starts_with(NOT_SINGLET));
        assert!(r.rows.iter().all(|row| row.reference.is_none()));
    }

    #[test]
    fn report_json_round_trips() {
        let cfg = RunConfig {
            frame: Some(Velocity::new(0.3, -0.1, 0.2).unwrap()),
            ..RunConfig::default()
        };
        let r = run(&fig1(true), &cfg).unwrap();
        let text = r.to_json();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
        assert!(render_table(&r).contains("P(E=+ | A=+) = 0.500000000000"));
    }
}
