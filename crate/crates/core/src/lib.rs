//! Sequential projective spin tests on an entangled electron-positron pair
//! placed in Minkowski spacetime.
//!
//! - [`spacetime`]: intervals, lightcones, boosts, causal order of events.
//! - [`spin`]: spin-1/2 operators, eigenbases, the singlet, tensor embedding.
//! - [`reduction`]: projective tests with state reduction and exact chain
//!   enumeration.
//! - [`causal`]: admissibility of scenarios and their causal test orderings.
//! - [`scenario`], [`harness`], [`montecarlo`]: file format, runs and reports.

pub mod causal;
pub mod error;
pub mod harness;
pub mod montecarlo;
pub mod reduction;
pub mod scenario;
pub mod spacetime;
pub mod spin;

pub use error::{Error, Result};
