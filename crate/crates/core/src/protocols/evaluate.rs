use serde::{Deserialize, Serialize};

use super::program::{BlockAnnotation, HashGroup, Node, Protocol};
use crate::bell::{Axis, DenseJointDistribution, ExchangeableDistribution, PairDistribution};
use crate::error::{Error, Result};

/// One bilateral measurement on a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub pair: usize,
    pub axis: Axis,
    pub outcome: bool,
}

/// Exact conditional law of a residual group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GroupState {
    Dense(DenseJointDistribution),
    Exchangeable(ExchangeableDistribution),
}

impl GroupState {
    pub fn entropy(&self) -> f64 {
        match self {
            GroupState::Dense(d) => d.entropy(),
            GroupState::Exchangeable(e) => e.entropy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualGroup {
    pub pairs: Vec<usize>,
    pub state: GroupState,
}

impl ResidualGroup {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }
}

/// A reachable leaf of an evaluated protocol tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub record: Vec<MeasurementRecord>,
    pub branch_probability: f64,
    pub measured: usize,
    pub discarded: usize,
    pub groups: Vec<ResidualGroup>,
}

impl ProtocolOutcome {
    /// Outcome bits along the branch as a `0`/`1` string; identifies the leaf.
    pub fn key(&self) -> String {
        path_key(self.record.iter().map(|r| r.outcome))
    }

    pub fn hashed(&self) -> usize {
        self.groups.iter().map(ResidualGroup::size).sum()
    }

    /// Ebits obtained from this leaf's groups (not divided by block size).
    pub fn hashed_ebits(&self, accounting: Accounting) -> f64 {
        self.groups
            .iter()
            .map(|g| accounting.contribution(g.size(), g.state.entropy()))
            .sum()
    }
}

pub fn path_key(bits: impl IntoIterator<Item = bool>) -> String {
    bits.into_iter().map(|b| if b { '1' } else { '0' }).collect()
}

/// How a hashed group of `m` pairs with entropy `S` is credited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Accounting {
    /// `max(0, m − S)`: a group is only hashed when that is profitable.
    Floored,
    /// `m − S`, which can go negative; the accounting of the closed form.
    Raw,
}

impl Accounting {
    pub fn contribution(self, size: usize, entropy: f64) -> f64 {
        let v = size as f64 - entropy;
        match self {
            Accounting::Floored => v.max(0.0),
            Accounting::Raw => v,
        }
    }
}

/// Yield per input pair of an evaluated tree.
pub fn evaluate_yield(outcomes: &[ProtocolOutcome], block: usize, accounting: Accounting) -> Result<f64> {
    check_tree(outcomes, block)?;
    let total: f64 = outcomes
        .iter()
        .map(|o| o.branch_probability * o.hashed_ebits(accounting))
        .sum();
    Ok(total / block as f64)
}

/// Leaf probabilities must sum to one and every leaf must account for all
/// `block` pairs.
pub fn check_tree(outcomes: &[ProtocolOutcome], block: usize) -> Result<()> {
    if outcomes.is_empty() {
        return Err(Error::Structure("tree has no reachable leaf".into()));
    }
    let total: f64 = outcomes.iter().map(|o| o.branch_probability).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Structure(format!("leaf probabilities sum to {total}")));
    }
    for o in outcomes {
        let used = o.measured + o.discarded + o.hashed();
        if used != block {
            return Err(Error::Structure(format!(
                "leaf {} accounts for {used} of {block} pairs",
                o.key()
            )));
        }
    }
    Ok(())
}

/// Evaluates `protocol` on i.i.d. pairs drawn from `base` with dense tables.
pub fn evaluate_dense(protocol: &Protocol, base: &PairDistribution) -> Result<Vec<ProtocolOutcome>> {
    let initial = DenseJointDistribution::iid(base, protocol.pairs())?;
    evaluate_dense_from(protocol, initial)
}

/// Evaluates `protocol` starting from an arbitrary joint table over its pairs.
pub fn evaluate_dense_from(protocol: &Protocol, initial: DenseJointDistribution) -> Result<Vec<ProtocolOutcome>> {
    if initial.pairs() != protocol.pairs() {
        return Err(Error::Domain(format!(
            "{}-pair table given to a {}-pair protocol",
            initial.pairs(),
            protocol.pairs()
        )));
    }
    let mut out = Vec::new();
    let live: Vec<usize> = (0..protocol.pairs()).collect();
    dense_walk(protocol.root(), initial, live, 1.0, Vec::new(), &mut out)?;
    Ok(out)
}

fn slot(live: &[usize], pair: usize) -> Result<usize> {
    live.iter()
        .position(|&p| p == pair)
        .ok_or_else(|| Error::Structure(format!("pair {pair} is no longer live")))
}

fn dense_walk(
    node: &Node,
    state: DenseJointDistribution,
    live: Vec<usize>,
    probability: f64,
    record: Vec<MeasurementRecord>,
    out: &mut Vec<ProtocolOutcome>,
) -> Result<()> {
    match node {
        Node::Measure {
            gates,
            pair,
            axis,
            agree,
            disagree,
        } => {
            let mut state = state;
            for g in gates {
                state = state.bxor(slot(&live, g.source)?, slot(&live, g.target)?)?;
            }
            let at = slot(&live, *pair)?;
            let mut rest = live.clone();
            rest.remove(at);
            for (outcome, child) in [(false, agree), (true, disagree)] {
                let (p, next) = state.measure(at, *axis, outcome)?;
                if let Some(next) = next {
                    let mut rec = record.clone();
                    rec.push(MeasurementRecord {
                        pair: *pair,
                        axis: *axis,
                        outcome,
                    });
                    dense_walk(child, next, rest.clone(), probability * p, rec, out)?;
                }
            }
            Ok(())
        }
        Node::Leaf { groups, discard } => {
            let groups = groups
                .iter()
                .map(|g| {
                    let slots = g.pairs.iter().map(|&p| slot(&live, p)).collect::<Result<Vec<_>>>()?;
                    Ok(ResidualGroup {
                        pairs: g.pairs.clone(),
                        state: GroupState::Dense(state.marginal(&slots)?),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(ProtocolOutcome {
                measured: record.len(),
                record,
                branch_probability: probability,
                discarded: discard.len(),
                groups,
            });
            Ok(())
        }
    }
}

/// Evaluates a single-axis protocol whose hashed groups all carry block
/// annotations, without any table over the whole block.
///
/// Every label bit of the block stays an XOR of original bits, tracked as a
/// 64-bit mask. Measurements along one axis reveal parities of i.i.d. bits,
/// whose joint probability follows from a character sum; each hashed group
/// is an [`ExchangeableDistribution`] once its annotation has been checked
/// against the tracked masks.
pub fn evaluate_structural(protocol: &Protocol, base: &PairDistribution) -> Result<Vec<ProtocolOutcome>> {
    if protocol.pairs() > 64 {
        return Err(Error::Domain(format!(
            "structural evaluation supports at most 64 pairs, got {}",
            protocol.pairs()
        )));
    }
    let masks: Vec<(u64, u64)> = (0..protocol.pairs()).map(|i| (1u64 << i, 1u64 << i)).collect();
    let mut out = Vec::new();
    let mut walker = StructuralWalk {
        base,
        axis: None,
        out: &mut out,
    };
    walker.walk(protocol.root(), masks, Vec::new(), Vec::new())?;
    Ok(out)
}

struct StructuralWalk<'a> {
    base: &'a PairDistribution,
    axis: Option<Axis>,
    out: &'a mut Vec<ProtocolOutcome>,
}

impl StructuralWalk<'_> {
    fn walk(
        &mut self,
        node: &Node,
        mut masks: Vec<(u64, u64)>,
        constraints: Vec<(u64, bool)>,
        record: Vec<MeasurementRecord>,
    ) -> Result<()> {
        match node {
            Node::Measure {
                gates,
                pair,
                axis,
                agree,
                disagree,
            } => {
                match self.axis {
                    None => self.axis = Some(*axis),
                    Some(a) if a != *axis => {
                        return Err(Error::Structure(
                            "structural evaluation needs a single measurement axis".into(),
                        ))
                    }
                    _ => {}
                }
                for g in gates {
                    let a_target = masks[g.target].0;
                    masks[g.source].0 ^= a_target;
                    let b_source = masks[g.source].1;
                    masks[g.target].1 ^= b_source;
                }
                let revealed = match axis {
                    Axis::Z => masks[*pair].1,
                    Axis::X => masks[*pair].0,
                };
                for (outcome, child) in [(false, agree), (true, disagree)] {
                    let mut c = constraints.clone();
                    c.push((revealed, outcome));
                    let mut rec = record.clone();
                    rec.push(MeasurementRecord {
                        pair: *pair,
                        axis: *axis,
                        outcome,
                    });
                    self.walk(child, masks.clone(), c, rec)?;
                }
                Ok(())
            }
            Node::Leaf { groups, discard } => {
                let flip = match self.axis.unwrap_or(Axis::Z) {
                    Axis::Z => self.base.amplitude_error_prob(),
                    Axis::X => self.base.phase_error_prob(),
                };
                let probability = constraint_probability(&constraints, 1.0 - 2.0 * flip);
                if probability <= 0.0 {
                    return Ok(());
                }
                let span = Gf2Span::new(&constraints);
                let groups = groups
                    .iter()
                    .map(|g| self.group_state(g, &masks, &span))
                    .collect::<Result<Vec<_>>>()?;
                self.out.push(ProtocolOutcome {
                    measured: record.len(),
                    record,
                    branch_probability: probability,
                    discarded: discard.len(),
                    groups,
                });
                Ok(())
            }
        }
    }

    fn group_state(&self, group: &HashGroup, masks: &[(u64, u64)], span: &Gf2Span) -> Result<ResidualGroup> {
        let block = group.block.as_ref().ok_or_else(|| {
            Error::Structure(format!(
                "group {:?} has no block annotation; use dense evaluation",
                group.pairs
            ))
        })?;
        check_annotation(group, block, masks, span)?;
        Ok(ResidualGroup {
            pairs: group.pairs.clone(),
            state: GroupState::Exchangeable(ExchangeableDistribution::new(
                block.members.len(),
                *self.base,
                block.parity,
                block.axis,
            )?),
        })
    }
}

fn check_annotation(group: &HashGroup, block: &BlockAnnotation, masks: &[(u64, u64)], span: &Gf2Span) -> Result<()> {
    let bad = |why: &str| Err(Error::Structure(format!("group {:?}: {why}", group.pairs)));
    let expected: Vec<usize> = block.members.iter().copied().filter(|&m| m != block.common).collect();
    if expected != group.pairs {
        return bad("pairs differ from the annotated block");
    }
    let common = 1u64 << block.common;
    for &p in &group.pairs {
        let own = 1u64 << p;
        let (a, b) = masks[p];
        let (mixed, plain) = match block.axis {
            Axis::Z => (a, b),
            Axis::X => (b, a),
        };
        if plain != own || mixed != own | common {
            return bad("labels are not in fan-out form");
        }
    }
    let block_mask = block.members.iter().fold(0u64, |m, &i| m | (1 << i));
    match span.implied_parity(block_mask) {
        Some(p) if p == block.parity => Ok(()),
        Some(_) => bad("annotated parity contradicts the measurement record"),
        None => bad("block parity is not determined by the measurement record"),
    }
}

/// `P(⊕_{i∈mask_j} x_i = o_j for all j)` for i.i.d. bits with
/// `E[(−1)^x] = bias`.
fn constraint_probability(constraints: &[(u64, bool)], bias: f64) -> f64 {
    let r = constraints.len();
    let mut total = 0.0;
    for subset in 0u64..(1 << r) {
        let mut mask = 0u64;
        let mut sign = 1.0;
        for (j, &(m, o)) in constraints.iter().enumerate() {
            if subset >> j & 1 == 1 {
                mask ^= m;
                if o {
                    sign = -sign;
                }
            }
        }
        total += sign * bias.powi(mask.count_ones() as i32);
    }
    total / (1u64 << r) as f64
}

/// Row-reduced span of revealed parity constraints over GF(2).
struct Gf2Span {
    rows: Vec<(u64, bool)>,
}

impl Gf2Span {
    fn new(constraints: &[(u64, bool)]) -> Self {
        let mut span = Gf2Span { rows: Vec::new() };
        for &(m, o) in constraints {
            let (m, o) = span.reduce(m, o);
            if m != 0 {
                span.rows.push((m, o));
                // keep pivots (highest set bits) in descending order
                span.rows.sort_by_key(|r| r.0.leading_zeros());
            }
        }
        span
    }

    fn reduce(&self, mut mask: u64, mut parity: bool) -> (u64, bool) {
        for &(m, o) in &self.rows {
            let pivot = 63 - m.leading_zeros();
            if mask >> pivot & 1 == 1 {
                mask ^= m;
                parity ^= o;
            }
        }
        (mask, parity)
    }

    fn implied_parity(&self, mask: u64) -> Option<bool> {
        match self.reduce(mask, false) {
            (0, p) => Some(p),
            _ => None,
        }
    }
}
