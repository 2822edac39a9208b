//! Cooperative bi-quadratic Boolean networks with long attractors.
//!
//! `netcore` simulates synchronous networks over the gate alphabet
//! {COPY, AND2, OR2}. `circuitkit` builds layered circuits from that alphabet,
//! `coding` provides the balanced chunk codes, `gadgets` holds the increment,
//! normalizer and counter circuits, `mmsys` assembles the full tape
//! system and runs experiments on it, and `suites` bundles the
//! verification checks.

pub mod circuitkit;
pub mod coding;
pub mod error;
pub mod gadgets;
pub mod mmsys;
pub mod netcore;
pub mod rng;
pub mod suites;

pub use error::{Error, Result};
