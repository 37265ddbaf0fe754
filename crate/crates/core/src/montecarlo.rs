//! Monte-Carlo oracle: samples concrete label tuples, runs the protocols on
//! the bits and compares leaf frequencies with the exact tree.
//!
//! Shots are split into fixed batches. Batch `i` draws from a ChaCha8 stream
//! seeded with `seed` on stream `i`, so a report only depends on the seed
//! and the shot count, not on the number of worker threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{werner, Axis, BellLabel, PairDistribution};
use crate::error::{check_fidelity, Error, Result};
use crate::protocols::{
    exact_outcomes, hashing_yield, path_key, protocol_at, run_recurrence, Accounting, Family, MeasurementRecord, Node,
    Protocol, ProtocolOutcome, ProtocolSpec,
};

/// Shots per independently seeded batch.
pub const BATCH: u64 = 10_000;

/// Band, in standard deviations, inside which a frequency is accepted.
pub const DEFAULT_SIGMA: f64 = 4.0;

pub fn sample_label<R: Rng + ?Sized>(dist: &PairDistribution, rng: &mut R) -> BellLabel {
    let u: f64 = rng.random();
    let p = dist.probs();
    let mut acc = 0.0;
    for (code, q) in p.iter().enumerate().take(3) {
        acc += q;
        if u < acc {
            return BellLabel::from_code(code);
        }
    }
    // u landed in the last bin, or past the rounding gap below 1
    BellLabel::from_code(3)
}

pub fn sample_labels<R: Rng + ?Sized>(dist: &PairDistribution, n: usize, rng: &mut R) -> Vec<BellLabel> {
    (0..n).map(|_| sample_label(dist, rng)).collect()
}

/// `N` i.i.d. Werner labels of fidelity `F`.
pub fn sample_block<R: Rng + ?Sized>(fidelity: f64, n: usize, rng: &mut R) -> Result<Vec<BellLabel>> {
    Ok(sample_labels(&werner(fidelity)?, n, rng))
}

/// One run of a protocol on concrete labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub labels: Vec<BellLabel>,
    pub record: Vec<MeasurementRecord>,
    /// Leaf key in the format of [`ProtocolOutcome::key`].
    pub leaf: String,
}

/// Pair labels as two bit masks, pair `i` at bit `i`.
#[derive(Debug, Clone, Copy)]
struct Bits {
    a: u64,
    b: u64,
}

impl Bits {
    fn from_labels(labels: &[BellLabel]) -> Bits {
        let mut bits = Bits { a: 0, b: 0 };
        for (i, l) in labels.iter().enumerate() {
            bits.a |= u64::from(l.a) << i;
            bits.b |= u64::from(l.b) << i;
        }
        bits
    }

    fn bxor(&mut self, source: usize, target: usize) {
        self.a ^= ((self.a >> target) & 1) << source;
        self.b ^= ((self.b >> source) & 1) << target;
    }

    fn revealed(&self, pair: usize, axis: Axis) -> bool {
        let word = match axis {
            Axis::Z => self.b,
            Axis::X => self.a,
        };
        (word >> pair) & 1 == 1
    }
}

/// Leaf reached by `bits`, as (outcome bits, depth).
fn walk(root: &Node, mut bits: Bits, mut on_measure: impl FnMut(usize, Axis, bool)) -> (u64, u32) {
    let mut node = root;
    let (mut path, mut depth) = (0u64, 0u32);
    loop {
        match node {
            Node::Leaf { .. } => return (path, depth),
            Node::Measure {
                gates,
                pair,
                axis,
                agree,
                disagree,
            } => {
                for g in gates {
                    bits.bxor(g.source, g.target);
                }
                let outcome = bits.revealed(*pair, *axis);
                on_measure(*pair, *axis, outcome);
                path |= u64::from(outcome) << depth;
                depth += 1;
                node = if outcome { disagree } else { agree };
            }
        }
    }
}

fn leaf_key(path: u64, depth: u32) -> String {
    path_key((0..depth).map(|i| (path >> i) & 1 == 1))
}

/// Runs `protocol` on `labels`, one label per pair.
pub fn run_trajectory(protocol: &Protocol, labels: &[BellLabel]) -> Result<Trajectory> {
    if labels.len() != protocol.pairs() {
        return Err(Error::Domain(format!(
            "protocol acts on {} pairs, got {} labels",
            protocol.pairs(),
            labels.len()
        )));
    }
    if labels.len() > 64 {
        return Err(Error::TooManyPairs {
            pairs: labels.len(),
            limit: 64,
        });
    }
    let mut record = Vec::new();
    let (path, depth) = walk(protocol.root(), Bits::from_labels(labels), |pair, axis, outcome| {
        record.push(MeasurementRecord { pair, axis, outcome })
    });
    Ok(Trajectory {
        labels: labels.to_vec(),
        record,
        leaf: leaf_key(path, depth),
    })
}

/// Empirical count of one branch next to its exact probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFrequency {
    pub key: String,
    pub count: u64,
    /// Number of draws the count is out of.
    pub trials: u64,
    pub frequency: f64,
    pub exact: f64,
    /// Standardized deviation `(count − trials·p) / √(trials·p(1−p))`;
    /// 0 when both agree exactly, infinite when `p ∈ {0, 1}` and they differ.
    pub z: f64,
}

impl BranchFrequency {
    fn new(key: String, count: u64, trials: u64, exact: f64) -> Self {
        let n = trials as f64;
        let dev = count as f64 - n * exact;
        let var = n * exact * (1.0 - exact);
        let z = if dev == 0.0 {
            0.0
        } else if var > 0.0 {
            dev / var.sqrt()
        } else if dev.abs() < 1e-9 * n.max(1.0) {
            0.0
        } else {
            f64::INFINITY
        };
        BranchFrequency {
            key,
            count,
            trials,
            frequency: if trials == 0 { 0.0 } else { count as f64 / n },
            exact,
            z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub protocol: ProtocolSpec,
    pub fidelity: f64,
    pub shots: u64,
    pub seed: u64,
    /// Leaves for block protocols; per-round pass rates and final labels
    /// for the recurrences.
    pub branches: Vec<BranchFrequency>,
    /// Yield with the sampled leaf (or survival) frequencies and exact
    /// residual entropies.
    pub empirical_yield: f64,
}

impl McReport {
    /// Largest |z| over all branches.
    pub fn max_abs_z(&self) -> f64 {
        self.branches.iter().map(|b| b.z.abs()).fold(0.0, f64::max)
    }

    pub fn within(&self, sigma: f64) -> bool {
        self.max_abs_z() <= sigma
    }

    /// Branches outside the band.
    pub fn outliers(&self, sigma: f64) -> Vec<&BranchFrequency> {
        self.branches.iter().filter(|b| b.z.abs() > sigma).collect()
    }
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn batches(shots: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let count = usize::try_from(shots.div_ceil(BATCH)).expect("batch count fits in usize");
    (0..count).into_par_iter().map(move |i| {
        let i = i as u64;
        (i, BATCH.min(shots - i * BATCH))
    })
}

/// Samples `shots` blocks (or, for the recurrences, `shots` initial pairs)
/// at fidelity `F` and compares with the exact evaluation.
pub fn estimate(spec: &ProtocolSpec, fidelity: f64, shots: u64, seed: u64) -> Result<McReport> {
    check_fidelity(fidelity)?;
    if shots == 0 {
        return Err(Error::Domain("at least one shot is needed".into()));
    }
    match spec.family {
        Family::Recurrence | Family::ModifiedRecurrence => estimate_recurrence(spec, fidelity, shots, seed),
        Family::Hashing => Err(Error::Domain(
            "hashing is modelled by its asymptotic yield and has no trajectories".into(),
        )),
        _ => estimate_block(spec, fidelity, shots, seed),
    }
}

fn estimate_block(spec: &ProtocolSpec, fidelity: f64, shots: u64, seed: u64) -> Result<McReport> {
    let base = werner(fidelity)?;
    let protocol = protocol_at(spec, fidelity)?.expect("block family has a tree");
    let outcomes = exact_outcomes(spec, fidelity)?.expect("block family has a tree");
    let n = protocol.pairs();
    if n > 64 {
        return Err(Error::TooManyPairs { pairs: n, limit: 64 });
    }

    let counts = batches(shots)
        .map(|(batch, size)| {
            let mut rng = batch_rng(seed, batch);
            let mut counts: BTreeMap<(u32, u64), u64> = BTreeMap::new();
            let mut labels = Vec::with_capacity(n);
            for _ in 0..size {
                labels.clear();
                labels.extend((0..n).map(|_| sample_label(&base, &mut rng)));
                let (path, depth) = walk(protocol.root(), Bits::from_labels(&labels), |_, _, _| {});
                *counts.entry((depth, path)).or_default() += 1;
            }
            counts
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });

    let mut seen: BTreeMap<String, u64> = counts
        .into_iter()
        .map(|((depth, path), c)| (leaf_key(path, depth), c))
        .collect();
    let mut branches = Vec::with_capacity(outcomes.len());
    let mut ebits = 0.0;
    for o in &outcomes {
        let key = o.key();
        let count = seen.remove(&key).unwrap_or(0);
        ebits += count as f64 / shots as f64 * o.hashed_ebits(Accounting::Floored);
        branches.push(BranchFrequency::new(key, count, shots, o.branch_probability));
    }
    // leaves the exact evaluation considers impossible
    for (key, count) in seen {
        branches.push(BranchFrequency::new(key, count, shots, 0.0));
    }
    Ok(McReport {
        protocol: *spec,
        fidelity,
        shots,
        seed,
        branches,
        empirical_yield: ebits / n as f64,
    })
}

/// Counts gathered by one batch of the recurrence population run.
#[derive(Default)]
struct PopulationCounts {
    passed: Vec<u64>,
    trials: Vec<u64>,
    final_labels: [u64; 4],
}

fn estimate_recurrence(spec: &ProtocolSpec, fidelity: f64, shots: u64, seed: u64) -> Result<McReport> {
    let initial = werner(fidelity)?;
    let trace = run_recurrence(&initial, spec.family == Family::ModifiedRecurrence, spec.switch_rule)?;
    let axes: Vec<Axis> = trace.rounds.iter().map(|r| r.axis).collect();
    let rounds = axes.len();

    // Each batch pairs up its own population, so batches stay independent.
    let totals = batches(shots)
        .map(|(batch, size)| {
            let mut rng = batch_rng(seed, batch);
            let mut pop: Vec<BellLabel> = sample_labels(&initial, size as usize, &mut rng);
            let mut c = PopulationCounts {
                passed: vec![0; rounds],
                trials: vec![0; rounds],
                final_labels: [0; 4],
            };
            for (r, &axis) in axes.iter().enumerate() {
                let mut next = Vec::with_capacity(pop.len() / 2);
                for chunk in pop.chunks_exact(2) {
                    let mut bits = Bits::from_labels(chunk);
                    match axis {
                        Axis::Z => bits.bxor(0, 1),
                        Axis::X => bits.bxor(1, 0),
                    }
                    c.trials[r] += 1;
                    if !bits.revealed(1, axis) {
                        c.passed[r] += 1;
                        next.push(BellLabel::new(bits.a & 1 == 1, bits.b & 1 == 1));
                    }
                }
                pop = next;
            }
            for l in &pop {
                c.final_labels[l.code()] += 1;
            }
            c
        })
        .reduce(
            || PopulationCounts {
                passed: vec![0; rounds],
                trials: vec![0; rounds],
                final_labels: [0; 4],
            },
            |mut a, b| {
                for r in 0..rounds {
                    a.passed[r] += b.passed[r];
                    a.trials[r] += b.trials[r];
                }
                for (x, y) in a.final_labels.iter_mut().zip(b.final_labels) {
                    *x += y;
                }
                a
            },
        );

    let mut branches = Vec::with_capacity(rounds + 4);
    for (r, round) in trace.rounds.iter().enumerate() {
        branches.push(BranchFrequency::new(
            format!("round{}:{}", r + 1, round.axis),
            totals.passed[r],
            totals.trials[r],
            round.pass_probability,
        ));
    }
    let final_state = trace.final_state();
    let survivors: u64 = totals.final_labels.iter().sum();
    for label in BellLabel::ALL {
        branches.push(BranchFrequency::new(
            format!("final:{label}"),
            totals.final_labels[label.code()],
            survivors,
            final_state.prob(label),
        ));
    }
    Ok(McReport {
        protocol: *spec,
        fidelity,
        shots,
        seed,
        branches,
        empirical_yield: survivors as f64 / shots as f64 * hashing_yield(&final_state),
    })
}

/// Leaf of the exact tree reached with certainty from a point-mass input.
pub fn exact_leaf(protocol: &Protocol, labels: &[BellLabel]) -> Result<ProtocolOutcome> {
    let start = crate::bell::DenseJointDistribution::point_mass(labels)?;
    let mut leaves = crate::protocols::evaluate_dense_from(protocol, start)?;
    match leaves.len() {
        1 => Ok(leaves.remove(0)),
        k => Err(Error::Structure(format!("point mass reached {k} leaves"))),
    }
}
