//! Seeded sampling of outcome chains, as a statistical cross-check of exact
//! enumeration.
//!
//! Outcomes are drawn test by test from the reduction probabilities, with a
//! ChaCha8 stream seeded from a `u64`. The stream and the `f64` conversion
//! are platform independent, so a seed fixes the frequency table exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::causal::{is_causally_consistent, validate};
use crate::error::{Error, Result};
use crate::reduction::{apply_test, run_chain, OutcomeDistribution, Test};
use crate::scenario::Scenario;
use crate::spin::{JointState, Outcome};

pub const GENERATOR: &str =
    "ChaCha8Rng (rand_chacha 0.3, seed_from_u64); uniform f64 in [0,1) from the top 53 bits";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRow {
    pub outcomes: Vec<Outcome>,
    pub count: u64,
    pub frequency: f64,
    pub exact: f64,
    /// `√(p(1−p)/N)` with `p` the exact probability.
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerReport {
    pub generator: String,
    pub seed: u64,
    pub samples: u64,
    pub order: Vec<String>,
    pub rows: Vec<SampleRow>,
    pub max_abs_deviation: f64,
}

impl SamplerReport {
    /// Empirical joint law, usable with the reduction-engine queries.
    pub fn empirical(&self) -> OutcomeDistribution {
        OutcomeDistribution::new(
            self.order.clone(),
            self.rows
                .iter()
                .map(|r| (r.outcomes.clone(), r.frequency))
                .collect(),
        )
    }
}

/// Node of the precomputed outcome tree: branch probabilities and children.
struct Node {
    probabilities: [f64; 2],
    children: [Option<usize>; 2],
}

fn build_tree(state: &JointState, tests: &[Test], nodes: &mut Vec<Node>) -> Result<usize> {
    let [plus, minus] = apply_test(state, &tests[0])?;
    let index = nodes.len();
    nodes.push(Node {
        probabilities: [plus.probability, minus.probability],
        children: [None, None],
    });
    if tests.len() > 1 {
        for (k, branch) in [plus, minus].into_iter().enumerate() {
            if let Some(next) = branch.state {
                let child = build_tree(&next, &tests[1..], nodes)?;
                nodes[index].children[k] = Some(child);
            }
        }
    }
    Ok(index)
}

fn draw(probabilities: [f64; 2], u: f64) -> usize {
    let [p, m] = probabilities;
    if m == 0.0 {
        0
    } else if p == 0.0 {
        1
    } else if u < p / (p + m) {
        0
    } else {
        1
    }
}

/// Samples `samples` chains along `order`, which must be a causally
/// consistent ordering of a valid scenario's tests.
pub fn montecarlo_sample(
    s: &Scenario,
    order: &[String],
    samples: u64,
    seed: u64,
) -> Result<SamplerReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if !validate(s).is_ok() {
        return Err(Error::NotValidated);
    }
    if !is_causally_consistent(s, order) {
        return Err(Error::InvalidArgument(format!(
            "order [{}] is not a causal ordering of the tests",
            order.join(", ")
        )));
    }
    let tests: Vec<Test> = order
        .iter()
        .map(|l| {
            s.test(l)
                .cloned()
                .expect("checked by is_causally_consistent")
        })
        .collect();
    let exact = run_chain(&s.initial_state, &tests)?;

    let mut nodes = Vec::new();
    build_tree(&s.initial_state, &tests, &mut nodes)?;
    let k = tests.len();
    let mut counts = vec![0u64; 1 << k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut node = 0;
        let mut index = 0usize;
        for depth in 0..k {
            let u: f64 = rng.gen();
            let pick = draw(nodes[node].probabilities, u);
            index = (index << 1) | pick;
            if depth + 1 < k {
                node = nodes[node].children[pick].expect("sampled branch has non-zero probability");
            }
        }
        counts[index] += 1;
    }

    let n = samples as f64;
    let rows: Vec<SampleRow> = exact
        .table()
        .iter()
        .map(|(outcomes, &p)| {
            let index = outcomes.iter().fold(0usize, |acc, o| {
                (acc << 1) | usize::from(*o == Outcome::Minus)
            });
            let count = counts[index];
            SampleRow {
                outcomes: outcomes.clone(),
                count,
                frequency: count as f64 / n,
                exact: p,
                standard_error: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect();
    let max_abs_deviation = rows
        .iter()
        .map(|r| (r.frequency - r.exact).abs())
        .fold(0.0, f64::max);
    Ok(SamplerReport {
        generator: GENERATOR.into(),
        seed,
        samples,
        order: order.to_vec(),
        rows,
        max_abs_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Particle;
    use crate::spacetime::Event;
    use crate::spin::Axis;

    fn fig1() -> Scenario {
        Scenario::with_singlet(
            vec![Particle::electron("e"), Particle::positron("p")],
            Event::new("O", 0.0, 0.0, 0.0, 0.0),
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
            vec![],
        )
        .unwrap()
    }

    fn lab() -> Vec<String> {
        ["B", "A", "E"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_sample_lands_in_one_tuple() {
        let r = montecarlo_sample(&fig1(), &lab(), 1, 7).unwrap();
        assert_eq!(r.rows.len(), 8);
        let hits: Vec<_> = r.rows.iter().filter(|r| r.count == 1).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].frequency, 1.0);
    }

    #[test]
    fn same_seed_same_table() {
        let a = montecarlo_sample(&fig1(), &lab(), 5000, 42).unwrap();
        let b = montecarlo_sample(&fig1(), &lab(), 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = montecarlo_sample(&fig1(), &lab(), 5000, 43).unwrap();
        assert_ne!(a.rows, c.rows);
    }

    #[test]
    fn zero_probability_tuples_are_never_drawn() {
        let mut s = fig1();
        s.tests[2].axis = Axis::J; // E repeats B's axis: tuples with B ≠ E impossible
        let order: Vec<String> = ["B", "A", "E"].iter().map(|s| s.to_string()).collect();
        let r = montecarlo_sample(&s, &order, 20_000, 3).unwrap();
        for row in &r.rows {
            if row.outcomes[0] != row.outcomes[2] {
                assert_eq!(row.exact, 0.0);
                assert_eq!(row.count, 0);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            montecarlo_sample(&fig1(), &lab(), 0, 0),
            Err(Error::InvalidArgument(_))
        ));
        let backwards: Vec<String> = ["E", "B", "A"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            montecarlo_sample(&fig1(), &backwards, 10, 0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
