use serde::{Deserialize, Serialize};

use super::entropy::shannon_entropy;
use super::label::BellLabel;
use crate::error::{check_fidelity, Error, Result};

pub(crate) const NORMALIZATION_TOL: f64 = 1e-12;

/// Probability vector over the four Bell labels of a single pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    probs: [f64; 4],
}

impl PairDistribution {
    pub fn new(probs: [f64; 4]) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain(format!(
                "pair probabilities must be finite and non-negative, got {probs:?}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!("pair probabilities sum to {total}, expected 1")));
        }
        Ok(PairDistribution { probs })
    }

    /// Renormalises a non-negative vector with positive total.
    pub(crate) fn from_unnormalized(probs: [f64; 4]) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        Ok(PairDistribution {
            probs: probs.map(|p| p / total),
        })
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    pub fn prob(&self, label: BellLabel) -> f64 {
        self.probs[label.code()]
    }

    /// Probability of `Φ⁺`.
    pub fn fidelity(&self) -> f64 {
        self.probs[0]
    }

    /// Probability that `b = 1`.
    pub fn amplitude_error_prob(&self) -> f64 {
        self.probs[1] + self.probs[3]
    }

    /// Probability that `a = 1`.
    pub fn phase_error_prob(&self) -> f64 {
        self.probs[2] + self.probs[3]
    }

    /// Exchanges the roles of `a` and `b` (swaps `Ψ⁺` and `Φ⁻`).
    pub fn swap_roles(&self) -> Self {
        let [p00, p01, p10, p11] = self.probs;
        PairDistribution {
            probs: [p00, p10, p01, p11],
        }
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(self.probs)
    }
}

/// Werner state `(F, G, G, G)` with `G = (1 − F)/3`.
pub fn werner(fidelity: f64) -> Result<PairDistribution> {
    check_fidelity(fidelity)?;
    let g = (1.0 - fidelity) / 3.0;
    Ok(PairDistribution {
        probs: [fidelity, g, g, g],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn werner_examples() {
        assert_eq!(werner(1.0).unwrap().probs(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(werner(0.25).unwrap().probs(), [0.25; 4]);
        let w = werner(0.85).unwrap().probs();
        assert!((w[0] - 0.85).abs() < 1e-15);
        for g in &w[1..] {
            assert!((g - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn werner_rejects_out_of_range() {
        assert!(matches!(werner(1.01), Err(Error::Domain(_))));
        assert!(matches!(werner(-0.1), Err(Error::Domain(_))));
        assert!(matches!(werner(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn new_validates() {
        assert!(PairDistribution::new([0.5, 0.5, 0.0, 0.0]).is_ok());
        assert!(PairDistribution::new([0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(PairDistribution::new([1.5, -0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn swap_exchanges_error_kinds() {
        let d = PairDistribution::new([0.7, 0.2, 0.06, 0.04]).unwrap();
        let s = d.swap_roles();
        assert_eq!(s.amplitude_error_prob(), d.phase_error_prob());
        assert_eq!(s.phase_error_prob(), d.amplitude_error_prob());
    }
}
