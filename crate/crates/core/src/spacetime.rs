//! Minkowski geometry in natural units (c = 1), signature (+,−,−,−).
//!
//! Events are labelled points `(t, x, y, z)`. Interval classification and
//! lightcone membership use the absolute tolerance [`LIGHTLIKE_TOLERANCE`];
//! the forward lightcone is closed, so lightlike separations count as causal.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `s²` below which an interval is lightlike.
pub const LIGHTLIKE_TOLERANCE: f64 = 1e-9;

/// Largest admissible speed, as a fraction of `c`.
pub const MAX_SPEED: f64 = 1.0 - 1e-12;

const NEGLIGIBLE_SPEED: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub label: String,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Event {
    pub fn new(label: impl Into<String>, t: f64, x: f64, y: f64, z: f64) -> Self {
        Event {
            label: label.into(),
            t,
            x,
            y,
            z,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.x, self.y, self.z]
            .iter()
            .all(|c| c.is_finite())
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Spatial displacement `other − self`.
    fn displacement_to(&self, other: &Event) -> [f64; 3] {
        [other.x - self.x, other.y - self.y, other.z - self.z]
    }
}

/// A frame velocity with `|v| ≤ MAX_SPEED`, enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Velocity {
    vx: f64,
    vy: f64,
    vz: f64,
}

impl Velocity {
    pub const ZERO: Velocity = Velocity {
        vx: 0.0,
        vy: 0.0,
        vz: 0.0,
    };

    pub fn new(vx: f64, vy: f64, vz: f64) -> Result<Self> {
        let speed = (vx * vx + vy * vy + vz * vz).sqrt();
        if !speed.is_finite() || speed > MAX_SPEED {
            return Err(Error::SpeedLimit { speed });
        }
        Ok(Velocity { vx, vy, vz })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.vx, self.vy, self.vz]
    }

    pub fn speed(&self) -> f64 {
        norm(self.components())
    }

    pub fn reversed(&self) -> Velocity {
        Velocity {
            vx: -self.vx,
            vy: -self.vy,
            vz: -self.vz,
        }
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - dot(self.components(), self.components())).sqrt()
    }
}

impl TryFrom<[f64; 3]> for Velocity {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Velocity::new(v[0], v[1], v[2])
    }
}

impl From<Velocity> for [f64; 3] {
    fn from(v: Velocity) -> Self {
        v.components()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntervalClass {
    Timelike,
    Spacelike,
    Lightlike,
}

impl fmt::Display for IntervalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            IntervalClass::Timelike => "Timelike",
            IntervalClass::Spacelike => "Spacelike",
            IntervalClass::Lightlike => "Lightlike",
        };
        f.write_str(name)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// `s² = Δt² − |Δx|²`.
pub fn interval_squared(a: &Event, b: &Event) -> f64 {
    let dt = b.t - a.t;
    let dx = a.displacement_to(b);
    dt * dt - dot(dx, dx)
}

pub fn classify(a: &Event, b: &Event) -> IntervalClass {
    let s2 = interval_squared(a, b);
    if s2 > LIGHTLIKE_TOLERANCE {
        IntervalClass::Timelike
    } else if s2 < -LIGHTLIKE_TOLERANCE {
        IntervalClass::Spacelike
    } else {
        IntervalClass::Lightlike
    }
}

/// Whether `b` lies in the closed forward lightcone of `a`.
pub fn in_forward_lightcone(a: &Event, b: &Event) -> bool {
    b.t >= a.t && interval_squared(a, b) >= -LIGHTLIKE_TOLERANCE
}

/// Coordinates of `e` in the frame moving with velocity `v` (pure boost).
pub fn boost(e: &Event, v: &Velocity) -> Event {
    let vel = v.components();
    let v2 = dot(vel, vel);
    if v2.sqrt() < NEGLIGIBLE_SPEED {
        return e.clone();
    }
    let gamma = 1.0 / (1.0 - v2).sqrt();
    let pos = e.position();
    let v_dot_x = dot(vel, pos);
    let t = gamma * (e.t - v_dot_x);
    let k = (gamma - 1.0) * v_dot_x / v2 - gamma * e.t;
    Event {
        label: e.label.clone(),
        t,
        x: pos[0] + k * vel[0],
        y: pos[1] + k * vel[1],
        z: pos[2] + k * vel[2],
    }
}

/// A frame in which the time order of two spacelike-separated events is
/// reversed (or, for simultaneous events, made unequal).
///
/// The velocity points along `sign(Δt)·Δx` with speed halfway between
/// `|Δt|/|Δx|` and 1, so that `Δt' = γ(Δt − v·Δx)` has the opposite sign.
/// Returns `None` for timelike and lightlike pairs, whose order is invariant.
pub fn order_reversing_frame(a: &Event, b: &Event) -> Option<Velocity> {
    if classify(a, b) != IntervalClass::Spacelike {
        return None;
    }
    let dt = b.t - a.t;
    let dx = a.displacement_to(b);
    let dist = norm(dx);
    let (speed, sign) = if dt == 0.0 {
        (0.5, 1.0)
    } else {
        ((dt.abs() / dist + 1.0) / 2.0, dt.signum())
    };
    let scale = sign * speed / dist;
    Velocity::new(dx[0] * scale, dx[1] * scale, dx[2] * scale).ok()
}

/// Strict causal order `{(a, b) : a ≠ b, b ∈ J⁺(a)}` as label pairs.
pub fn causal_partial_order(events: &[Event]) -> Result<BTreeSet<(String, String)>> {
    let mut seen = HashSet::new();
    for e in events {
        if !seen.insert(e.label.as_str()) {
            return Err(Error::DuplicateLabel(e.label.clone()));
        }
    }
    let mut relation = BTreeSet::new();
    for a in events {
        for b in events {
            if a.label != b.label && in_forward_lightcone(a, b) {
                relation.insert((a.label.clone(), b.label.clone()));
            }
        }
    }
    Ok(relation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(t: f64, x: f64, y: f64, z: f64) -> Event {
        Event::new("e", t, x, y, z)
    }

    fn assert_event_close(a: &Event, b: &Event, tol: f64) {
        for (p, q) in [(a.t, b.t), (a.x, b.x), (a.y, b.y), (a.z, b.z)] {
            assert!((p - q).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn interval_examples() {
        let o = ev(0.0, 0.0, 0.0, 0.0);
        assert_eq!(interval_squared(&o, &ev(1.0, 0.0, 0.0, 0.0)), 1.0);
        assert_eq!(interval_squared(&o, &ev(0.0, 1.0, 0.0, 0.0)), -1.0);
        assert_eq!(interval_squared(&o, &ev(1.0, 1.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn classify_examples() {
        let o = ev(0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            classify(&o, &ev(2.0, 1.0, 0.0, 0.0)),
            IntervalClass::Timelike
        );
        let a = ev(1.0, 0.0, 0.0, 0.0);
        let b = ev(0.9, 3.0, 0.0, 0.0);
        assert!((interval_squared(&a, &b) - (0.01 - 9.0)).abs() < 1e-12);
        assert_eq!(classify(&a, &b), IntervalClass::Spacelike);
        assert_eq!(
            classify(&o, &ev(1.0, 1.0, 0.0, 0.0)),
            IntervalClass::Lightlike
        );
    }

    #[test]
    fn lightlike_band_is_tolerance_wide() {
        let o = ev(0.0, 0.0, 0.0, 0.0);
        // s² = 1 − (1 + 2δ + δ²) ≈ −2δ
        let inside = ev(1.0, 1.0 + 1e-10, 0.0, 0.0);
        let outside = ev(1.0, 1.0 + 1e-8, 0.0, 0.0);
        assert_eq!(classify(&o, &inside), IntervalClass::Lightlike);
        assert_eq!(classify(&o, &outside), IntervalClass::Spacelike);
        assert!(in_forward_lightcone(&o, &inside));
        assert!(!in_forward_lightcone(&o, &outside));
    }

    #[test]
    fn forward_cone_examples() {
        let o = ev(0.0, 0.0, 0.0, 0.0);
        assert!(in_forward_lightcone(&o, &ev(1.0, 0.0, 0.0, 0.0)));
        assert!(!in_forward_lightcone(&o, &ev(0.0, 1.0, 0.0, 0.0)));
        assert!(!in_forward_lightcone(&o, &ev(-1.0, 0.0, 0.0, 0.0)));
    }

    #[test]
    fn boost_examples() {
        let e = ev(1.3, -0.2, 4.0, 0.5);
        assert_eq!(boost(&e, &Velocity::ZERO), e);

        let v = Velocity::new(0.6, 0.0, 0.0).unwrap();
        assert!((v.gamma() - 1.25).abs() < 1e-15);
        assert_event_close(
            &boost(&ev(1.0, 0.0, 0.0, 0.0), &v),
            &ev(1.25, -0.75, 0.0, 0.0),
            1e-12,
        );
        assert_event_close(
            &boost(&ev(0.0, 1.0, 0.0, 0.0), &v),
            &ev(-0.75, 1.25, 0.0, 0.0),
            1e-12,
        );
    }

    #[test]
    fn boost_keeps_label() {
        let e = Event::new("A", 1.0, 2.0, 3.0, 4.0);
        let v = Velocity::new(0.1, -0.2, 0.3).unwrap();
        assert_eq!(boost(&e, &v).label, "A");
    }

    #[test]
    fn speed_limit_rejected() {
        assert!(matches!(
            Velocity::new(1.0, 0.0, 0.0),
            Err(Error::SpeedLimit { .. })
        ));
        assert!(matches!(
            Velocity::new(0.8, 0.8, 0.0),
            Err(Error::SpeedLimit { .. })
        ));
        assert!(Velocity::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(Velocity::new(0.99, 0.0, 0.0).is_ok());
    }

    #[test]
    fn reversing_frame_examples() {
        let a = ev(0.0, 0.0, 0.0, 0.0);
        let b = ev(0.5, 2.0, 0.0, 0.0);
        let v = order_reversing_frame(&a, &b).unwrap();
        let [vx, vy, vz] = v.components();
        assert!((vx - 0.625).abs() < 1e-15 && vy == 0.0 && vz == 0.0);
        assert!(boost(&b, &v).t < boost(&a, &v).t);

        assert!(order_reversing_frame(&a, &ev(2.0, 1.0, 0.0, 0.0)).is_none());

        let b = ev(0.0, 1.0, 0.0, 0.0);
        let v = order_reversing_frame(&a, &b).unwrap();
        assert_eq!(v.components(), [0.5, 0.0, 0.0]);
        let gap = boost(&b, &v).t - boost(&a, &v).t;
        assert!((gap - (-v.gamma() * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn reversing_frame_handles_negative_time_gap() {
        let a = ev(0.5, 2.0, 0.0, 0.0);
        let b = ev(0.0, 0.0, 0.0, 0.0);
        let v = order_reversing_frame(&a, &b).unwrap();
        assert!(boost(&b, &v).t > boost(&a, &v).t);
    }

    #[test]
    fn partial_order_examples() {
        let a = Event::new("A", 1.0, -1.0, 0.0, 0.0);
        let b = Event::new("B", 1.0, 1.0, 0.0, 0.0);
        assert!((interval_squared(&a, &b) + 4.0).abs() < 1e-15);
        assert!(causal_partial_order(&[a.clone(), b.clone()])
            .unwrap()
            .is_empty());

        let e = Event::new("E", 3.0, 0.0, 0.0, 0.0);
        assert_eq!(interval_squared(&b, &e), 3.0);
        let rel = causal_partial_order(&[b, e]).unwrap();
        assert_eq!(
            rel.into_iter().collect::<Vec<_>>(),
            vec![("B".to_string(), "E".to_string())]
        );

        let o = Event::new("O", 0.0, 0.0, 0.0, 0.0);
        let rel = causal_partial_order(&[o, a]).unwrap();
        assert!(rel.contains(&("O".to_string(), "A".to_string())));
        assert_eq!(rel.len(), 1);
    }

    fn velocity_strategy() -> impl Strategy<Value = Velocity> {
        (0.0f64..0.99, -1.0f64..1.0, 0.0..std::f64::consts::TAU).prop_map(|(speed, z, phi)| {
            let r = (1.0 - z * z).sqrt();
            Velocity::new(speed * r * phi.cos(), speed * r * phi.sin(), speed * z).unwrap()
        })
    }

    fn event_strategy() -> impl Strategy<Value = Event> {
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
            .prop_map(|(t, x, y, z)| Event::new("e", t, x, y, z))
    }

    proptest! {
        #[test]
        fn interval_is_symmetric_and_boost_invariant(
            a in event_strategy(),
            b in event_strategy(),
            v in velocity_strategy(),
        ) {
            let s2 = interval_squared(&a, &b);
            prop_assert_eq!(s2, interval_squared(&b, &a));
            let boosted = interval_squared(&boost(&a, &v), &boost(&b, &v));
            prop_assert!((s2 - boosted).abs() <= 1e-9, "{} vs {}", s2, boosted);
        }

        #[test]
        fn inverse_boost_restores_event(e in event_strategy(), v in velocity_strategy()) {
            let back = boost(&boost(&e, &v), &v.reversed());
            assert_event_close(&back, &e, 1e-9);
        }

        #[test]
        fn classification_is_boost_invariant(
            a in event_strategy(),
            b in event_strategy(),
            v in velocity_strategy(),
        ) {
            // keep away from the lightlike band so rounding cannot cross it
            prop_assume!(interval_squared(&a, &b).abs() > 1e-6);
            prop_assert_eq!(classify(&a, &b), classify(&boost(&a, &v), &boost(&b, &v)));
        }

        #[test]
        fn timelike_order_is_boost_invariant(
            a in event_strategy(),
            dt in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
            frac in 0.0f64..0.95,
            dir in velocity_strategy(),
            v in velocity_strategy(),
        ) {
            let [ux, uy, uz] = if dir.speed() > 1e-6 {
                dir.components().map(|c| c / dir.speed())
            } else {
                [1.0, 0.0, 0.0]
            };
            let r = frac * dt.abs();
            let b = Event::new("b", a.t + dt, a.x + r * ux, a.y + r * uy, a.z + r * uz);
            prop_assert_eq!(classify(&a, &b), IntervalClass::Timelike);
            let before = (b.t - a.t).signum();
            let after = boost(&b, &v).t - boost(&a, &v).t;
            prop_assert_eq!(before, after.signum());
        }

        #[test]
        fn reversing_frame_reverses(a in event_strategy(), b in event_strategy()) {
            prop_assume!(classify(&a, &b) == IntervalClass::Spacelike);
            let v = order_reversing_frame(&a, &b).unwrap();
            prop_assert!(v.speed() < 1.0);
            let dt = b.t - a.t;
            let boosted = boost(&b, &v).t - boost(&a, &v).t;
            if dt == 0.0 {
                prop_assert!(boosted != 0.0);
            } else {
                prop_assert!(boosted * dt < 0.0, "dt {} boosted {}", dt, boosted);
            }
        }

        #[test]
        fn causal_order_is_transitive(
            coords in proptest::collection::vec(
                (-3.0f64..3.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), 1..=6),
        ) {
            let events: Vec<Event> = coords
                .iter()
                .enumerate()
                .map(|(i, (t, x, y, z))| Event::new(format!("E{i}"), *t, *x, *y, *z))
                .collect();
            let rel = causal_partial_order(&events).unwrap();
            for (a, b) in &rel {
                for (b2, c) in &rel {
                    if b == b2 && a != c {
                        prop_assert!(rel.contains(&(a.clone(), c.clone())));
                    }
                }
            }
        }
    }

    #[test]
    fn partial_order_rejects_duplicates() {
        let a = Event::new("A", 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            causal_partial_order(&[a.clone(), a]),
            Err(Error::DuplicateLabel(l)) if l == "A"
        ));
    }
}
