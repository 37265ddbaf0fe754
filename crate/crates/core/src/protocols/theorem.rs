use crate::bell::{parity_prob, s_entropy, PairDistribution};
use crate::error::{Error, Result};

/// Largest exponent accepted by [`theorem_yield`]; the entropy sum for a
/// block of `2^n` pairs costs `O(4^n)` terms.
pub const THEOREM_MAX_EXPONENT: u32 = 12;

/// Closed-form yield of AEPP(a, N = 2^n) on Werner pairs of fidelity `F`:
///
/// `1 − p/N·(1 + S_{N−1}) − (1 − p)/N·(n + 1 + S_{N/2−1} + … + S_3 + S_1)`
///
/// with `p` the even-parity probability of the block and `S_{K−1}` the
/// entropy of a `K`-block's survivors given even parity. No flooring is
/// applied, so the value is negative where hashing would not pay.
pub fn theorem_yield(exponent: u32, fidelity: f64) -> Result<f64> {
    if !(1..=THEOREM_MAX_EXPONENT).contains(&exponent) {
        return Err(Error::Domain(format!(
            "exponent {exponent} outside 1..={THEOREM_MAX_EXPONENT}"
        )));
    }
    let block = 1usize << exponent;
    let n = block as f64;
    let p = parity_prob(fidelity, block as u64)?;
    let agree_cost = 1.0 + s_entropy(block, fidelity, false)?;
    let mut disagree_cost = f64::from(exponent) + 1.0;
    for k in 1..exponent {
        disagree_cost += s_entropy(1 << k, fidelity, false)?;
    }
    Ok(1.0 - p / n * agree_cost - (1.0 - p) / n * disagree_cost)
}

/// Asymptotic yield of universal hashing, `max(0, 1 − H(ρ))`.
pub fn hashing_yield(dist: &PairDistribution) -> f64 {
    hashing_yield_raw(dist).max(0.0)
}

/// `1 − H(ρ)` without the floor.
pub fn hashing_yield_raw(dist: &PairDistribution) -> f64 {
    1.0 - dist.entropy()
}
