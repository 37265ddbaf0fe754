//! AEPP*(a,4): AEPP(a,4) where each residual group is either hashed or
//! first put through an adaptive phase step, whichever pays more.

use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate_dense, evaluate_dense_from, path_key, Accounting, GroupState, ProtocolOutcome};
use super::program::{adaptive_block, aepp, graft, Node, Protocol};
use crate::bell::{werner, Axis};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupTreatment {
    Hash,
    PhaseStep,
}

/// Decision taken for one residual group of AEPP(a,4).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarChoice {
    /// Leaf key in the AEPP(a,4) tree.
    pub leaf: String,
    pub pairs: Vec<usize>,
    pub treatment: GroupTreatment,
    /// Expected ebits from this group if hashed directly.
    pub hash_ebits: f64,
    /// Expected ebits from this group after a phase step.
    pub phase_ebits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarPlan {
    pub choices: Vec<StarChoice>,
    pub protocol: Protocol,
}

/// Leaves of AEPP(a,4) in depth-first order, each with its single group.
/// Branch path of a leaf and the pairs of its single group.
type Slot = (Vec<bool>, Vec<usize>);

fn base_slots() -> Result<(Protocol, Vec<Slot>)> {
    let base = aepp(2, Axis::Z)?;
    let mut slots = Vec::new();
    collect_slots(base.root(), Vec::new(), &mut slots)?;
    Ok((base, slots))
}

fn collect_slots(node: &Node, path: Vec<bool>, out: &mut Vec<(Vec<bool>, Vec<usize>)>) -> Result<()> {
    match node {
        Node::Measure { agree, disagree, .. } => {
            let mut a = path.clone();
            a.push(false);
            collect_slots(agree, a, out)?;
            let mut d = path;
            d.push(true);
            collect_slots(disagree, d, out)
        }
        Node::Leaf { groups, .. } => {
            if groups.len() != 1 {
                return Err(Error::Structure("expected one group per AEPP(a,4) leaf".into()));
            }
            out.push((path, groups[0].pairs.clone()));
            Ok(())
        }
    }
}

/// AEPP(a,4) with the given treatment for each leaf group, leaves taken in
/// depth-first order (agree first).
pub fn compose_star(treatments: &[GroupTreatment]) -> Result<Protocol> {
    let (base, slots) = base_slots()?;
    if treatments.len() != slots.len() {
        return Err(Error::Domain(format!(
            "{} treatments for {} groups",
            treatments.len(),
            slots.len()
        )));
    }
    let mut root = base.root().clone();
    for ((path, pairs), t) in slots.iter().zip(treatments) {
        if *t == GroupTreatment::PhaseStep {
            root = graft(&root, path, 0, &adaptive_block(pairs, Axis::X))?;
        }
    }
    Protocol::new(4, root)
}

/// Expected floored ebits from a group of `m` pairs put through an adaptive
/// phase step.
fn phase_step_ebits(state: &GroupState, m: usize) -> Result<f64> {
    let GroupState::Dense(d) = state else {
        return Err(Error::Structure("phase step needs a dense group state".into()));
    };
    let members: Vec<usize> = (0..m).collect();
    let sub = Protocol::new(m, adaptive_block(&members, Axis::X))?;
    let outs = evaluate_dense_from(&sub, d.clone())?;
    Ok(outs
        .iter()
        .map(|o| o.branch_probability * o.hashed_ebits(Accounting::Floored))
        .sum())
}

/// Picks the better treatment for each group independently.
pub fn aepp_star_4_plan(fidelity: f64) -> Result<StarPlan> {
    let w = werner(fidelity)?;
    let (base, slots) = base_slots()?;
    let outcomes = evaluate_dense(&base, &w)?;
    let mut choices = Vec::with_capacity(slots.len());
    let mut treatments = Vec::with_capacity(slots.len());
    for (path, pairs) in &slots {
        let key = path_key(path.iter().copied());
        let reached: Option<&ProtocolOutcome> = outcomes.iter().find(|o| o.key() == key);
        let (hash_ebits, phase_ebits) = match reached {
            Some(o) => {
                let g = &o.groups[0];
                let hash = Accounting::Floored.contribution(g.size(), g.state.entropy());
                (hash, phase_step_ebits(&g.state, g.size())?)
            }
            None => (0.0, 0.0),
        };
        let treatment = if phase_ebits > hash_ebits {
            GroupTreatment::PhaseStep
        } else {
            GroupTreatment::Hash
        };
        treatments.push(treatment);
        choices.push(StarChoice {
            leaf: key,
            pairs: pairs.clone(),
            treatment,
            hash_ebits,
            phase_ebits,
        });
    }
    Ok(StarPlan {
        choices,
        protocol: compose_star(&treatments)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::evaluate::evaluate_yield;

    #[test]
    fn pure_pairs_are_hashed() {
        let plan = aepp_star_4_plan(1.0).unwrap();
        assert!(plan.choices.iter().all(|c| c.treatment == GroupTreatment::Hash));
        assert_eq!(plan.protocol, aepp(2, Axis::Z).unwrap());
    }

    #[test]
    fn composed_yield_is_sum_of_choices() {
        let f = 0.8;
        let plan = aepp_star_4_plan(f).unwrap();
        let outs = evaluate_dense(&plan.protocol, &werner(f).unwrap()).unwrap();
        let y = evaluate_yield(&outs, 4, Accounting::Floored).unwrap();
        let base = evaluate_dense(&aepp(2, Axis::Z).unwrap(), &werner(f).unwrap()).unwrap();
        let mut expected = 0.0;
        for c in &plan.choices {
            let p = base
                .iter()
                .find(|o| o.key() == c.leaf)
                .map_or(0.0, |o| o.branch_probability);
            expected += p * c.hash_ebits.max(c.phase_ebits);
        }
        assert!((y - expected / 4.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_treatment_count() {
        assert!(compose_star(&[GroupTreatment::Hash]).is_err());
    }
}
