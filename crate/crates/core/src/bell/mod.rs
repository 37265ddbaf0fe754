//! Probability distributions over Bell-label tuples.
//!
//! Pairs are numbered from zero throughout the API; pair `i` here is pair
//! `i + 1` in the usual one-based protocol descriptions. A dense table over
//! `k` pairs stores `4^k` probabilities indexed by the tuple
//! `(a_0, b_0, a_1, b_1, ..., a_{k-1}, b_{k-1})` read as a binary number,
//! so pair 0 occupies the two most significant bits.

mod dense;
mod entropy;
mod exchangeable;
mod label;
mod pair;

pub use dense::{DenseJointDistribution, K_DENSE_MAX};
pub use entropy::{binary_entropy, parity_prob, parity_prob_from_infidelity, parity_prob_of_flips, shannon_entropy};
pub use exchangeable::{s_entropy, ExchangeableDistribution};
pub use label::{Axis, BellLabel};
pub use pair::{werner, PairDistribution};
