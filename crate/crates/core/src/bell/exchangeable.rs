use serde::{Deserialize, Serialize};

use super::dense::{DenseJointDistribution, K_DENSE_MAX};
use super::entropy::parity_prob_of_flips;
use super::label::Axis;
use super::pair::{werner, PairDistribution};
use crate::error::{Error, Result};

/// Law of the pairs left over after a fan-out block has been measured.
///
/// A block of `block` i.i.d. pairs drawn from `base` has one common pair.
/// With [`Axis::Z`] every other pair is BXORed into the common pair, which
/// is then measured along Z; the survivors carry labels
/// `(a_i ⊕ a_common, b_i)` conditioned on `⊕ b = parity` over the whole
/// block. [`Axis::X`] is the dual: the common pair is the BXOR source, the
/// survivors carry `(a_i, b_i ⊕ b_common)` conditioned on `⊕ a = parity`.
///
/// The joint law of the `block − 1` survivors is invariant under permuting
/// them, so its entropy only needs one term per type (count vector of the
/// four survivor labels) rather than one per tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeableDistribution {
    block: usize,
    base: PairDistribution,
    parity: bool,
    axis: Axis,
}

impl ExchangeableDistribution {
    pub fn new(block: usize, base: PairDistribution, parity: bool, axis: Axis) -> Result<Self> {
        if block < 2 {
            return Err(Error::Domain(format!(
                "a fan-out block needs at least 2 pairs, got {block}"
            )));
        }
        let d = ExchangeableDistribution {
            block,
            base,
            parity,
            axis,
        };
        if d.conditioning_probability() <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        Ok(d)
    }

    /// Block size including the measured common pair.
    pub fn block(&self) -> usize {
        self.block
    }

    /// Number of surviving pairs, `block − 1`.
    pub fn group_size(&self) -> usize {
        self.block - 1
    }

    pub fn base(&self) -> &PairDistribution {
        &self.base
    }

    pub fn parity(&self) -> bool {
        self.parity
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Probability of the conditioning parity event.
    pub fn conditioning_probability(&self) -> f64 {
        let q = match self.axis {
            Axis::Z => self.base.amplitude_error_prob(),
            Axis::X => self.base.phase_error_prob(),
        };
        parity_prob_of_flips(q, self.block as u64, self.parity)
    }

    /// Shannon entropy in bits of the survivors' joint label.
    pub fn entropy(&self) -> f64 {
        self.type_sum().entropy
    }

    /// Total probability over all types; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.type_sum().mass
    }

    /// Builds the implied dense table by explicit fan-out and measurement.
    pub fn to_dense(&self) -> Result<DenseJointDistribution> {
        if self.block > K_DENSE_MAX {
            return Err(Error::TooManyPairs {
                pairs: self.block,
                limit: K_DENSE_MAX,
            });
        }
        let common = self.block - 1;
        let others: Vec<usize> = (0..common).collect();
        let mut d = DenseJointDistribution::iid(&self.base, self.block)?;
        match self.axis {
            Axis::Z => d = d.bxor_fanout(&others, common)?,
            Axis::X => {
                for &t in &others {
                    d = d.bxor(common, t)?;
                }
            }
        }
        let (_, rest) = d.measure(common, self.axis, self.parity)?;
        rest.ok_or(Error::ZeroProbability)
    }

    fn type_sum(&self) -> TypeSum {
        // The X case is the Z case with a and b exchanged.
        let base = match self.axis {
            Axis::Z => self.base,
            Axis::X => self.base.swap_roles(),
        };
        TypeSum::compute(&base, self.block - 1, self.parity)
    }
}

/// `S_{K−1}`: entropy of the `K − 1` survivors of an amplitude fan-out block
/// of `K` Werner pairs, conditioned on block parity `parity`.
pub fn s_entropy(block: usize, fidelity: f64, parity: bool) -> Result<f64> {
    let d = ExchangeableDistribution::new(block, werner(fidelity)?, parity, Axis::Z)?;
    Ok(d.entropy())
}

/// Survivor labels `s = (c, b)` that behave identically in every type term.
///
/// Under the hidden common phase bit `α`, a survivor with label `(c, b)`
/// came from a block pair with label `(c ⊕ α, b)`.
struct SymbolClass {
    size: u32,
    ln_weight: [f64; 2],
    amplitude: bool,
}

struct TypeSum {
    entropy: f64,
    mass: f64,
}

impl TypeSum {
    fn compute(base: &PairDistribution, survivors: usize, parity: bool) -> TypeSum {
        let p = base.probs();
        let mut classes: Vec<(f64, f64, bool, u32)> = Vec::with_capacity(4);
        for code in 0..4usize {
            let (c, b) = (code >> 1, code & 1);
            let key = (p[(c << 1) | b], p[((c ^ 1) << 1) | b], b == 1);
            match classes
                .iter_mut()
                .find(|k| k.0 == key.0 && k.1 == key.1 && k.2 == key.2)
            {
                Some(k) => k.3 += 1,
                None => classes.push((key.0, key.1, key.2, 1)),
            }
        }
        let classes: Vec<SymbolClass> = classes
            .into_iter()
            .map(|(w0, w1, amplitude, size)| SymbolClass {
                size,
                ln_weight: [w0.ln(), w1.ln()],
                amplitude,
            })
            .collect();

        let q = base.amplitude_error_prob();
        let ln_cond = parity_prob_of_flips(q, survivors as u64 + 1, parity).ln();
        // ln P(common pair = (α, β))
        let ln_common = |alpha: usize, beta: usize| p[(alpha << 1) | beta].ln();
        let ln_fact = ln_factorials(survivors);

        let mut acc = TypeSum {
            entropy: 0.0,
            mass: 0.0,
        };
        let mut counts = vec![0usize; classes.len()];
        let mut visit = |counts: &[usize]| {
            let mut ln_mult = ln_fact[survivors];
            let mut flips = 0usize;
            let mut ln_terms = [0.0f64; 2];
            for (class, &n) in classes.iter().zip(counts) {
                if n == 0 {
                    continue;
                }
                ln_mult += n as f64 * f64::from(class.size).ln() - ln_fact[n];
                if class.amplitude {
                    flips += n;
                }
                for (t, w) in ln_terms.iter_mut().zip(class.ln_weight) {
                    *t += n as f64 * w;
                }
            }
            let beta = usize::from(parity) ^ (flips & 1);
            for (alpha, t) in ln_terms.iter_mut().enumerate() {
                *t += ln_common(alpha, beta);
            }
            let ln_joint = log_add_exp(ln_terms[0], ln_terms[1]);
            if ln_joint == f64::NEG_INFINITY {
                return;
            }
            // probability of one tuple of this type, given the conditioning
            let ln_tuple = ln_joint - ln_cond;
            let type_mass = (ln_mult + ln_tuple).exp();
            acc.mass += type_mass;
            acc.entropy -= type_mass * ln_tuple;
        };
        compositions(survivors, 0, &mut counts, &mut visit);
        acc.entropy /= std::f64::consts::LN_2;
        acc
    }
}

/// Calls `visit` once for every way of writing `remaining` as an ordered sum
/// over the slots `counts[slot..]`.
fn compositions<F: FnMut(&[usize])>(remaining: usize, slot: usize, counts: &mut [usize], visit: &mut F) {
    if slot + 1 == counts.len() {
        counts[slot] = remaining;
        visit(counts);
        return;
    }
    for n in 0..=remaining {
        counts[slot] = n;
        compositions(remaining - n, slot + 1, counts, visit);
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0f64;
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    let hi = x.max(y);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((x - hi).exp() + (y - hi).exp()).ln()
}
