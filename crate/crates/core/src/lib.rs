//! Exact classical simulation and yield analysis of two-way entanglement
//! purification protocols acting on Bell-diagonal states.
//!
//! Every pair shared by Alice and Bob is tracked by its Bell label `(a, b)`,
//! where `a` flags a phase error and `b` an amplitude error relative to
//! `|Φ⁺⟩`. Bilateral XOR gates permute labels, bilateral measurements reveal
//! parities of them, and universal hashing is modelled by its asymptotic
//! yield `m − S` on a group of `m` pairs with label entropy `S`.
//!
//! The crate is split into four layers:
//!
//! - [`bell`]: probability tables over Bell-label tuples (dense and
//!   permutation-symmetric), BXOR, measurement conditioning and entropies.
//! - [`protocols`]: protocols as decision trees, exact tree evaluation,
//!   the closed-form AEPP yield and the recurrence-type iterations.
//! - [`montecarlo`]: a seeded sampling oracle that runs protocols on
//!   concrete bit tuples.
//! - [`analysis`]: sweeps, hashing crossovers and the asymptotic checks.

pub mod analysis;
pub mod bell;
mod error;
pub mod montecarlo;
pub mod protocols;

pub use error::{Error, Result};
