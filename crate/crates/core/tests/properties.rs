use std::f64::consts::PI;

use proptest::prelude::*;

use relspin::causal::{linear_extensions, validate};
use relspin::harness::lab_order;
use relspin::montecarlo::montecarlo_sample;
use relspin::reduction::{marginal, run_chain, Test};
use relspin::scenario::{Particle, Scenario};
use relspin::spacetime::{boost, Event, Velocity};
use relspin::spin::Axis;

fn axis() -> impl Strategy<Value = Axis> {
    (-1.0f64..1.0, 0.0..2.0 * PI).prop_map(|(z, phi)| Axis::from_angles(z.acos(), phi))
}

fn velocity() -> impl Strategy<Value = Velocity> {
    (axis(), 0.0f64..=0.99).prop_map(|(n, speed)| {
        let [x, y, z] = n.components();
        Velocity::new(x * speed, y * speed, z * speed).unwrap()
    })
}

/// Timelike step forward in time: `(dt, spatial offset)` with `|offset| < 0.9 dt`.
fn step() -> impl Strategy<Value = (f64, [f64; 3])> {
    (0.1f64..2.0, axis(), 0.0f64..0.9).prop_map(|(dt, n, frac)| {
        let [x, y, z] = n.components();
        let r = frac * dt;
        (dt, [x * r, y * r, z * r])
    })
}

/// A valid scenario: each particle's tests form a timelike chain out of the
/// source, so they are mutually comparable and inside the source cone.
fn valid_scenario() -> impl Strategy<Value = Scenario> {
    (
        prop::collection::vec((step(), axis()), 1..=3),
        prop::collection::vec((step(), axis()), 1..=3),
    )
        .prop_map(|(electron, positron)| {
            let mut events = Vec::new();
            let mut tests = Vec::new();
            for (particle, chain) in [("e", electron), ("p", positron)] {
                let mut at = [0.0; 4];
                for (i, ((dt, dx), n)) in chain.into_iter().enumerate() {
                    at[0] += dt;
                    for k in 0..3 {
                        at[k + 1] += dx[k];
                    }
                    let label = format!("{particle}{i}");
                    events.push(Event::new(label.clone(), at[0], at[1], at[2], at[3]));
                    tests.push(Test::new(label.clone(), particle, n, label));
                }
            }
            singlet_scenario(events, tests)
        })
}

/// Tests at arbitrary events, valid or not.
fn any_scenario() -> impl Strategy<Value = Scenario> {
    let event = (-1.0f64..4.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0);
    prop::collection::vec((event, any::<bool>(), axis()), 1..=5).prop_map(|items| {
        let mut events = Vec::new();
        let mut tests = Vec::new();
        for (i, ((t, x, y, z), electron, n)) in items.into_iter().enumerate() {
            let label = format!("T{i}");
            events.push(Event::new(label.clone(), t, x, y, z));
            tests.push(Test::new(
                label.clone(),
                if electron { "e" } else { "p" },
                n,
                label,
            ));
        }
        singlet_scenario(events, tests)
    })
}

fn singlet_scenario(events: Vec<Event>, tests: Vec<Test>) -> Scenario {
    Scenario::with_singlet(
        vec![Particle::electron("e"), Particle::positron("p")],
        Event::new("O", 0.0, 0.0, 0.0, 0.0),
        events,
        tests,
        vec![],
    )
    .unwrap()
}

fn boosted(s: &Scenario, v: &Velocity) -> Scenario {
    let mut out = s.clone();
    out.source = boost(&s.source, v);
    for e in &mut out.events {
        *e = boost(e, v);
    }
    out
}

fn tests_for(s: &Scenario, order: &[String]) -> Vec<Test> {
    order.iter().map(|l| s.test(l).unwrap().clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_linear_extension_gives_the_same_law(s in valid_scenario()) {
        prop_assert!(validate(&s).is_ok());
        let ext = linear_extensions(&s).unwrap();
        prop_assert!(!ext.orders.is_empty());
        let first = run_chain(&s.initial_state, &tests_for(&s, &ext.orders[0])).unwrap();
        prop_assert!((first.total() - 1.0).abs() <= 1e-12);
        for order in &ext.orders[1..] {
            let d = run_chain(&s.initial_state, &tests_for(&s, order)).unwrap();
            prop_assert!(first.max_deviation(&d).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn validation_is_boost_covariant(s in any_scenario(), v in velocity()) {
        let lab = validate(&s);
        let moving = validate(&boosted(&s, &v));
        prop_assert_eq!(lab.violations, moving.violations);
    }

    #[test]
    fn valid_scenarios_stay_valid_under_boosts(s in valid_scenario(), v in velocity()) {
        prop_assert!(validate(&boosted(&s, &v)).is_ok());
    }

    #[test]
    fn positron_marginal_ignores_electron_axis(a in axis(), b in axis()) {
        let s = singlet_scenario(
            vec![Event::new("A", 1.0, -0.8, 0.0, 0.0), Event::new("E", 3.0, 0.0, 0.0, 0.0)],
            vec![Test::new("A", "e", a, "A"), Test::new("E", "p", b, "E")],
        );
        let d = run_chain(&s.initial_state, &tests_for(&s, &lab_order(&s))).unwrap();
        for p in marginal(&d, "E").unwrap().values() {
            prop_assert!((p - 0.5).abs() <= 1e-12);
        }
    }
}

#[test]
fn no_signaling_over_36_electron_axes() {
    let towards = Axis::K.orthogonal();
    for positron in [Axis::I, Axis::J, Axis::K] {
        for i in 0..36 {
            let a = Axis::K.rotated_towards(&towards, i as f64 * PI / 35.0);
            let s = singlet_scenario(
                vec![
                    Event::new("A", 1.0, -0.8, 0.0, 0.0),
                    Event::new("E", 3.0, 0.0, 0.0, 0.0),
                ],
                vec![
                    Test::new("A", "e", a, "A"),
                    Test::new("E", "p", positron, "E"),
                ],
            );
            let d = run_chain(&s.initial_state, &tests_for(&s, &lab_order(&s))).unwrap();
            for p in marginal(&d, "E").unwrap().values() {
                assert!((p - 0.5).abs() <= 1e-12);
            }
        }
    }
}

/// Median over seeds 1..=10 of the largest tuple deviation stays under
/// `C / √N`; with eight tuples at p = 1/8 the 4-SE band is about 1.3 / √N.
const MC_CONSTANT: f64 = 1.5;

#[test]
fn sampler_converges_at_root_n() {
    let s = singlet_scenario(
        vec![
            Event::new("A", 1.0, -0.8, 0.0, 0.0),
            Event::new("B", 0.9, 0.8, 0.0, 0.0),
            Event::new("E", 3.0, 0.0, 0.0, 0.0),
        ],
        vec![
            Test::new("A", "e", Axis::K, "A"),
            Test::new("B", "p", Axis::J, "B"),
            Test::new("E", "p", Axis::K, "E"),
        ],
    );
    let order = lab_order(&s);
    let mut medians = Vec::new();
    for n in [1_000u64, 10_000, 100_000] {
        let mut devs: Vec<f64> = (1..=10)
            .map(|seed| {
                montecarlo_sample(&s, &order, n, seed)
                    .unwrap()
                    .max_abs_deviation
            })
            .collect();
        devs.sort_by(f64::total_cmp);
        let median = (devs[4] + devs[5]) / 2.0;
        let bound = MC_CONSTANT / (n as f64).sqrt();
        assert!(median <= bound, "N = {n}: median {median} > {bound}");
        medians.push(median);
    }
    assert!(medians[2] < medians[0]);
}
