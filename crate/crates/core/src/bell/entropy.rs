use crate::error::{check_fidelity, Error, Result};

/// Shannon entropy in bits, with `0 · log 0 = 0`.
pub fn shannon_entropy<I>(probs: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let h: f64 = probs.into_iter().filter(|&p| p > 0.0).map(|p| p * p.log2()).sum();
    -h
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy([p, 1.0 - p])
}

/// Probability that `k` independent bits, each set with probability `q`,
/// have XOR equal to `parity`.
pub fn parity_prob_of_flips(q: f64, k: u64, parity: bool) -> f64 {
    let bias = signed_power(1.0 - 2.0 * q, k);
    if parity {
        0.5 * (1.0 - bias)
    } else {
        0.5 * (1.0 + bias)
    }
}

/// Probability that the amplitude bits of `k` Werner pairs of fidelity `F`
/// have even parity: `(1 + (1 − 4G)^k)/2` with `G = (1 − F)/3`.
pub fn parity_prob(fidelity: f64, k: u64) -> Result<f64> {
    check_fidelity(fidelity)?;
    if k == 0 {
        return Err(Error::Domain("parity over zero pairs".into()));
    }
    let g = (1.0 - fidelity) / 3.0;
    Ok(parity_prob_of_flips(2.0 * g, k, false))
}

/// Same as [`parity_prob`] but parameterised by the infidelity `1 − F`, which
/// stays representable for `F` within one ulp of 1.
pub fn parity_prob_from_infidelity(infidelity: f64, k: u64) -> Result<f64> {
    if !(infidelity.is_finite() && (0.0..=1.0).contains(&infidelity)) {
        return Err(Error::Domain(format!("infidelity {infidelity} is outside [0, 1]")));
    }
    if k == 0 {
        return Err(Error::Domain("parity over zero pairs".into()));
    }
    let x = -4.0 * infidelity / 3.0;
    // (1 + x)^k for x ∈ [-4/3, 0]
    let bias = if x > -1.0 {
        (k as f64 * x.ln_1p()).exp()
    } else {
        signed_power(1.0 + x, k)
    };
    Ok(0.5 * (1.0 + bias))
}

fn signed_power(base: f64, k: u64) -> f64 {
    match i32::try_from(k) {
        Ok(e) => base.powi(e),
        Err(_) => {
            let mag = base.abs().powf(k as f64);
            if base < 0.0 && k % 2 == 1 {
                -mag
            } else {
                mag
            }
        }
    }
}
