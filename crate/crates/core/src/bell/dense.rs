use serde::{Deserialize, Serialize};

use super::entropy::shannon_entropy;
use super::label::{Axis, BellLabel};
use super::pair::{PairDistribution, NORMALIZATION_TOL};
use crate::error::{Error, Result};

/// Largest number of pairs a dense table may cover (`4^10` entries).
pub const K_DENSE_MAX: usize = 10;

/// Exact probability table over all `4^k` Bell-label tuples of `k` pairs.
///
/// A table over zero pairs is the trivial distribution with one entry; it is
/// what remains after the last pair of a table has been measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseJointDistribution {
    pairs: usize,
    probs: Vec<f64>,
}

impl DenseJointDistribution {
    pub fn from_probs(pairs: usize, probs: Vec<f64>) -> Result<Self> {
        check_size(pairs)?;
        if probs.len() != 1 << (2 * pairs) {
            return Err(Error::Domain(format!(
                "{} probabilities supplied for {pairs} pairs",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(DenseJointDistribution { pairs, probs })
    }

    /// Product distribution of `pairs` independent copies of `base`.
    pub fn iid(base: &PairDistribution, pairs: usize) -> Result<Self> {
        check_size(pairs)?;
        let p = base.probs();
        let mut probs = vec![1.0];
        for _ in 0..pairs {
            probs = probs.iter().flat_map(|&q| p.iter().map(move |&r| q * r)).collect();
        }
        Ok(DenseJointDistribution { pairs, probs })
    }

    pub fn uniform(pairs: usize) -> Result<Self> {
        check_size(pairs)?;
        let len = 1usize << (2 * pairs);
        Ok(DenseJointDistribution {
            pairs,
            probs: vec![1.0 / len as f64; len],
        })
    }

    pub fn point_mass(labels: &[BellLabel]) -> Result<Self> {
        let pairs = labels.len();
        check_size(pairs)?;
        let mut probs = vec![0.0; 1 << (2 * pairs)];
        probs[index_of(labels)] = 1.0;
        Ok(DenseJointDistribution { pairs, probs })
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, labels: &[BellLabel]) -> Result<f64> {
        if labels.len() != self.pairs {
            return Err(Error::Domain(format!(
                "{} labels given for a {}-pair table",
                labels.len(),
                self.pairs
            )));
        }
        Ok(self.probs[index_of(labels)])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Labels of every pair for table entry `index`.
    pub fn labels_at(&self, index: usize) -> Vec<BellLabel> {
        (0..self.pairs)
            .map(|i| BellLabel::from_code((index >> self.shift(i)) & 3))
            .collect()
    }

    /// Bilateral XOR with pair `source` as control and `target` as target:
    /// `a_source ^= a_target` and `b_target ^= b_source`.
    pub fn bxor(&self, source: usize, target: usize) -> Result<Self> {
        self.check_index(source)?;
        self.check_index(target)?;
        if source == target {
            return Err(Error::SamePair(source));
        }
        let s = self.shift(source);
        let t = self.shift(target);
        let mut probs = vec![0.0; self.probs.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            let a_t = (idx >> (t + 1)) & 1;
            let b_s = (idx >> s) & 1;
            probs[idx ^ (a_t << (s + 1)) ^ (b_s << t)] = p;
        }
        Ok(DenseJointDistribution {
            pairs: self.pairs,
            probs,
        })
    }

    /// Applies `bxor(t, common)` for every `t` in `targets`, in order.
    ///
    /// Afterwards `b_common` holds the XOR of all amplitude bits involved and
    /// every `a_t` has been XORed with `a_common`.
    pub fn bxor_fanout(&self, targets: &[usize], common: usize) -> Result<Self> {
        if targets.contains(&common) {
            return Err(Error::SamePair(common));
        }
        let mut out = self.clone();
        for &t in targets {
            out = out.bxor(t, common)?;
        }
        Ok(out)
    }

    /// Bilateral measurement of `pair` along `axis`, conditioned on the
    /// compared result being `outcome`.
    ///
    /// Returns the outcome probability and the renormalised table over the
    /// remaining `k − 1` pairs (the measured pair's other bit is summed out).
    /// A zero-probability outcome yields `(0.0, None)`.
    pub fn measure(&self, pair: usize, axis: Axis, outcome: bool) -> Result<(f64, Option<Self>)> {
        self.check_index(pair)?;
        let s = self.shift(pair);
        let bit = match axis {
            Axis::Z => s,
            Axis::X => s + 1,
        };
        let low_mask = (1usize << s) - 1;
        let mut probs = vec![0.0; self.probs.len() >> 2];
        for (idx, &p) in self.probs.iter().enumerate() {
            if ((idx >> bit) & 1 == 1) == outcome {
                probs[((idx >> (s + 2)) << s) | (idx & low_mask)] += p;
            }
        }
        let probability: f64 = probs.iter().sum();
        if probability <= 0.0 {
            return Ok((0.0, None));
        }
        probs.iter_mut().for_each(|p| *p /= probability);
        Ok((
            probability,
            Some(DenseJointDistribution {
                pairs: self.pairs - 1,
                probs,
            }),
        ))
    }

    /// Marginal over `keep`, with the kept pairs in ascending order.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Domain("marginal over an empty pair set".into()));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &i in &keep {
            self.check_index(i)?;
        }
        let shifts: Vec<usize> = keep.iter().map(|&i| self.shift(i)).collect();
        let m = keep.len();
        let mut probs = vec![0.0; 1 << (2 * m)];
        for (idx, &p) in self.probs.iter().enumerate() {
            let mut out = 0;
            for &s in &shifts {
                out = (out << 2) | ((idx >> s) & 3);
            }
            probs[out] += p;
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(DenseJointDistribution { pairs: m, probs })
    }

    /// Single-pair marginal.
    pub fn pair_marginal(&self, pair: usize) -> Result<PairDistribution> {
        let m = self.marginal(&[pair])?;
        PairDistribution::from_unnormalized([m.probs[0], m.probs[1], m.probs[2], m.probs[3]])
    }

    /// Shannon entropy in bits of the whole label tuple.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(self.probs.iter().copied())
    }

    fn shift(&self, pair: usize) -> usize {
        2 * (self.pairs - 1 - pair)
    }

    fn check_index(&self, pair: usize) -> Result<()> {
        if pair < self.pairs {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: pair,
                pairs: self.pairs,
            })
        }
    }
}

fn check_size(pairs: usize) -> Result<()> {
    if pairs > K_DENSE_MAX {
        Err(Error::TooManyPairs {
            pairs,
            limit: K_DENSE_MAX,
        })
    } else {
        Ok(())
    }
}

fn index_of(labels: &[BellLabel]) -> usize {
    labels.iter().fold(0, |acc, l| (acc << 2) | l.code())
}
