//! Protocols as F-independent decision trees.
//!
//! A [`Protocol`] acts on a block of pairs that keep their original indices
//! for the whole run. Each [`Node::Measure`] applies a list of BXOR gates and
//! then measures one pair bilaterally; the two children are the branches for
//! agreeing (`false`) and disagreeing (`true`) results. Leaves say which
//! pairs are handed to universal hashing, in which groups, and which pairs
//! are thrown away.

use serde::{Deserialize, Serialize};

use crate::bell::Axis;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bxor {
    pub source: usize,
    pub target: usize,
}

/// The fan-out block a hashed group was cut from.
///
/// Says that the group consists of `members \ {common}`, that every pair of
/// the block started i.i.d., that the block was fanned into `common` along
/// `axis`, and that the revealed parity of the whole block is `parity`.
/// This is what lets large groups be described by an
/// [`ExchangeableDistribution`](crate::bell::ExchangeableDistribution).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockAnnotation {
    pub members: Vec<usize>,
    pub common: usize,
    pub parity: bool,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashGroup {
    pub pairs: Vec<usize>,
    pub block: Option<BlockAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Measure {
        gates: Vec<Bxor>,
        pair: usize,
        axis: Axis,
        agree: Box<Node>,
        disagree: Box<Node>,
    },
    Leaf {
        groups: Vec<HashGroup>,
        discard: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pairs: usize,
    root: Node,
}

impl Protocol {
    pub fn new(pairs: usize, root: Node) -> Result<Self> {
        let p = Protocol { pairs, root };
        p.validate()?;
        Ok(p)
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Number of leaves.
    pub fn leaf_count(&self) -> usize {
        fn count(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Measure { agree, disagree, .. } => count(agree) + count(disagree),
            }
        }
        count(&self.root)
    }

    /// Checks that along every root-to-leaf path each pair is measured,
    /// discarded or hashed exactly once, and that gates only touch live pairs.
    pub fn validate(&self) -> Result<()> {
        let live = vec![true; self.pairs];
        validate_node(&self.root, live)
    }
}

fn validate_node(node: &Node, mut live: Vec<bool>) -> Result<()> {
    let check_live = |live: &[bool], i: usize, what: &str| -> Result<()> {
        match live.get(i) {
            Some(true) => Ok(()),
            Some(false) => Err(Error::Structure(format!("{what} uses consumed pair {i}"))),
            None => Err(Error::Structure(format!("{what} uses unknown pair {i}"))),
        }
    };
    match node {
        Node::Measure {
            gates,
            pair,
            agree,
            disagree,
            ..
        } => {
            for g in gates {
                check_live(&live, g.source, "gate")?;
                check_live(&live, g.target, "gate")?;
                if g.source == g.target {
                    return Err(Error::Structure(format!("gate on pair {} twice", g.source)));
                }
            }
            check_live(&live, *pair, "measurement")?;
            live[*pair] = false;
            validate_node(agree, live.clone())?;
            validate_node(disagree, live)
        }
        Node::Leaf { groups, discard } => {
            let used = groups.iter().flat_map(|g| g.pairs.iter()).chain(discard.iter());
            for &i in used {
                check_live(&live, i, "leaf")?;
                live[i] = false;
            }
            if let Some(i) = live.iter().position(|&l| l) {
                return Err(Error::Structure(format!("pair {i} is never consumed")));
            }
            if groups.iter().any(|g| g.pairs.is_empty()) {
                return Err(Error::Structure("empty hash group".into()));
            }
            Ok(())
        }
    }
}

/// Gates that fan `others` into `collector` for a measurement along `axis`.
///
/// Along Z the collector is the BXOR target (it accumulates amplitude
/// parity); along X source and target are switched so that it accumulates
/// phase parity.
pub fn fanout_gates(others: &[usize], collector: usize, axis: Axis) -> Vec<Bxor> {
    others
        .iter()
        .map(|&o| match axis {
            Axis::Z => Bxor {
                source: o,
                target: collector,
            },
            Axis::X => Bxor {
                source: collector,
                target: o,
            },
        })
        .collect()
}

#[derive(Clone, Default)]
struct LeafAcc {
    groups: Vec<HashGroup>,
    discard: Vec<usize>,
}

impl LeafAcc {
    fn with_group(mut self, members: &[usize], common: usize, axis: Axis) -> Self {
        let pairs: Vec<usize> = members.iter().copied().filter(|&m| m != common).collect();
        if !pairs.is_empty() {
            self.groups.push(HashGroup {
                pairs,
                block: Some(BlockAnnotation {
                    members: members.to_vec(),
                    common,
                    parity: false,
                    axis,
                }),
            });
        }
        self
    }

    fn with_discard(mut self, pairs: impl IntoIterator<Item = usize>) -> Self {
        self.discard.extend(pairs);
        self
    }

    fn leaf(self) -> Node {
        Node::Leaf {
            groups: self.groups,
            discard: self.discard,
        }
    }
}

/// One adaptive step on `members`: fan everything into the last member,
/// measure it, hash the rest on agreement and localise the error otherwise.
pub fn adaptive_block(members: &[usize], axis: Axis) -> Node {
    adaptive_with(members, axis, LeafAcc::default(), true)
}

/// Same fan-out as [`adaptive_block`] but the block is thrown away on
/// disagreement.
pub fn first_step_only(members: &[usize], axis: Axis) -> Node {
    adaptive_with(members, axis, LeafAcc::default(), false)
}

fn adaptive_with(members: &[usize], axis: Axis, acc: LeafAcc, localize_errors: bool) -> Node {
    let (&collector, others) = members.split_last().expect("adaptive step on an empty block");
    let disagree = if localize_errors {
        localize(members, collector, axis, acc.clone())
    } else {
        acc.clone().with_discard(others.iter().copied()).leaf()
    };
    Node::Measure {
        gates: fanout_gates(others, collector, axis),
        pair: collector,
        axis,
        agree: Box::new(acc.with_group(members, collector, axis).leaf()),
        disagree: Box::new(disagree),
    }
}

/// `members` is a block whose `common` pair has been measured and found to
/// carry odd parity. Halve the block, measure the parity of the half that
/// does not contain `common`, hash whichever half has even parity and
/// recurse into the odd one until a single pair is left to discard.
fn localize(members: &[usize], common: usize, axis: Axis, acc: LeafAcc) -> Node {
    match members.len() {
        0 | 1 => return acc.leaf(),
        2 => {
            let rest = members.iter().copied().filter(|&m| m != common);
            return acc.with_discard(rest).leaf();
        }
        _ => {}
    }
    let (first, second) = members.split_at(members.len() / 2);
    let (probe, home) = if first.contains(&common) {
        (second, first)
    } else {
        (first, second)
    };
    let (&r, probe_rest) = probe.split_first().expect("non-empty half");
    // odd parity in the probed half leaves the home half even, and vice versa
    let agree = localize(home, common, axis, acc.clone().with_group(probe, r, axis));
    let disagree = localize(probe, r, axis, acc.with_group(home, common, axis));
    Node::Measure {
        gates: fanout_gates(probe_rest, r, axis),
        pair: r,
        axis,
        agree: Box::new(agree),
        disagree: Box::new(disagree),
    }
}

/// Replaces hash group `group` of every leaf reached by `path` with
/// `subtree`, carrying the leaf's other groups and discards into every leaf
/// of the subtree. Annotations inside the subtree are dropped: its input is
/// no longer an i.i.d. block.
pub fn graft(node: &Node, path: &[bool], group: usize, subtree: &Node) -> Result<Node> {
    match (node, path.split_first()) {
        (
            Node::Measure {
                gates,
                pair,
                axis,
                agree,
                disagree,
            },
            Some((&bit, rest)),
        ) => {
            let (agree, disagree) = if bit {
                (agree.as_ref().clone(), graft(disagree, rest, group, subtree)?)
            } else {
                (graft(agree, rest, group, subtree)?, disagree.as_ref().clone())
            };
            Ok(Node::Measure {
                gates: gates.clone(),
                pair: *pair,
                axis: *axis,
                agree: Box::new(agree),
                disagree: Box::new(disagree),
            })
        }
        (Node::Leaf { groups, discard }, None) => {
            if group >= groups.len() {
                return Err(Error::Structure(format!("leaf has no group {group}")));
            }
            let mut kept = groups.clone();
            kept.remove(group);
            Ok(extend_leaves(subtree, &kept, discard))
        }
        _ => Err(Error::Structure("graft path does not end at a leaf".into())),
    }
}

fn extend_leaves(node: &Node, groups: &[HashGroup], discard: &[usize]) -> Node {
    match node {
        Node::Measure {
            gates,
            pair,
            axis,
            agree,
            disagree,
        } => Node::Measure {
            gates: gates.clone(),
            pair: *pair,
            axis: *axis,
            agree: Box::new(extend_leaves(agree, groups, discard)),
            disagree: Box::new(extend_leaves(disagree, groups, discard)),
        },
        Node::Leaf {
            groups: own,
            discard: own_discard,
        } => Node::Leaf {
            groups: groups
                .iter()
                .cloned()
                .chain(own.iter().map(|g| HashGroup {
                    pairs: g.pairs.clone(),
                    block: None,
                }))
                .collect(),
            discard: discard.iter().chain(own_discard).copied().collect(),
        },
    }
}

/// AEPP on `2^exponent` pairs detecting errors along `axis`
/// (Z: amplitude family, X: phase family).
pub fn aepp(exponent: u32, axis: Axis) -> Result<Protocol> {
    let n = block_size(exponent)?;
    let members: Vec<usize> = (0..n).collect();
    Protocol::new(n, adaptive_block(&members, axis))
}

/// First step of AEPP(a, 2^exponent) only: hash on agreement, discard all
/// otherwise.
pub fn maneva_smolin(exponent: u32) -> Result<Protocol> {
    let n = block_size(exponent)?;
    let members: Vec<usize> = (0..n).collect();
    Protocol::new(n, first_step_only(&members, Axis::Z))
}

/// Amplitude check on four pairs; the three survivors of an agreeing check
/// get a phase check into the third of them, and the remaining two are
/// hashed if that agrees. Any disagreement discards everything left.
pub fn leung_shor() -> Protocol {
    let phase = Node::Measure {
        gates: fanout_gates(&[0, 1], 2, Axis::X),
        pair: 2,
        axis: Axis::X,
        agree: Box::new(Node::Leaf {
            groups: vec![HashGroup {
                pairs: vec![0, 1],
                block: None,
            }],
            discard: vec![],
        }),
        disagree: Box::new(Node::Leaf {
            groups: vec![],
            discard: vec![0, 1],
        }),
    };
    let root = Node::Measure {
        gates: fanout_gates(&[0, 1, 2], 3, Axis::Z),
        pair: 3,
        axis: Axis::Z,
        agree: Box::new(phase),
        disagree: Box::new(Node::Leaf {
            groups: vec![],
            discard: vec![0, 1, 2],
        }),
    };
    Protocol::new(4, root).expect("fixed Leung-Shor tree is well formed")
}

/// Largest supported block exponent; block masks are 64-bit.
pub const MAX_EXPONENT: u32 = 6;

fn block_size(exponent: u32) -> Result<usize> {
    if (1..=MAX_EXPONENT).contains(&exponent) {
        Ok(1 << exponent)
    } else {
        Err(Error::Domain(format!(
            "block exponent {exponent} outside 1..={MAX_EXPONENT}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// (path, measured, hashed sizes, discarded) per leaf
    type LeafInfo = (Vec<bool>, usize, Vec<usize>, Vec<usize>);

    fn leaves(node: &Node, out: &mut Vec<LeafInfo>, path: Vec<bool>, measured: usize) {
        match node {
            Node::Measure { agree, disagree, .. } => {
                let mut a = path.clone();
                a.push(false);
                leaves(agree, out, a, measured + 1);
                let mut d = path;
                d.push(true);
                leaves(disagree, out, d, measured + 1);
            }
            Node::Leaf { groups, discard } => out.push((
                path,
                measured,
                groups.iter().map(|g| g.pairs.len()).collect(),
                discard.clone(),
            )),
        }
    }

    #[test]
    fn aepp_two_discards_on_disagreement() {
        let p = aepp(1, Axis::Z).unwrap();
        let mut out = vec![];
        leaves(p.root(), &mut out, vec![], 0);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].2, vec![1]);
        assert_eq!(out[1].3, vec![0]);
    }

    #[test]
    fn aepp_four_matches_recovery_step() {
        let p = aepp(2, Axis::Z).unwrap();
        let Node::Measure {
            gates, pair, disagree, ..
        } = p.root()
        else {
            panic!("root must measure")
        };
        assert_eq!(*pair, 3);
        assert_eq!(gates.len(), 3);
        let Node::Measure {
            gates,
            pair,
            agree,
            disagree,
            ..
        } = disagree.as_ref()
        else {
            panic!("disagreement must localise")
        };
        // BXOR(2,1) in one-based numbering, then measure pair 1
        assert_eq!(gates, &vec![Bxor { source: 1, target: 0 }]);
        assert_eq!(*pair, 0);
        assert_eq!(
            agree.as_ref(),
            &Node::Leaf {
                groups: vec![HashGroup {
                    pairs: vec![1],
                    block: Some(BlockAnnotation {
                        members: vec![0, 1],
                        common: 0,
                        parity: false,
                        axis: Axis::Z
                    })
                }],
                discard: vec![2]
            }
        );
        let Node::Leaf { groups, discard } = disagree.as_ref() else {
            panic!()
        };
        assert_eq!(groups[0].pairs, vec![2]);
        assert_eq!(discard, &vec![1]);
    }

    #[test]
    fn aepp_group_sizes_on_disagreement() {
        for n in 1..=MAX_EXPONENT {
            let p = aepp(n, Axis::Z).unwrap();
            let big = 1usize << n;
            let mut out = vec![];
            leaves(p.root(), &mut out, vec![], 0);
            assert_eq!(out.len(), 1 + (1 << (n - 1)));
            assert_eq!(out[0].2, vec![big - 1]);
            for (_, measured, groups, discard) in &out[1..] {
                assert_eq!(*measured, n as usize);
                assert_eq!(discard.len(), 1);
                let mut sizes = groups.clone();
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                let expected: Vec<usize> = (1..n).rev().map(|k| (1 << k) - 1).collect();
                assert_eq!(sizes, expected);
            }
        }
    }

    #[test]
    fn eight_pair_disagreement_uses_three_gates() {
        let p = aepp(3, Axis::Z).unwrap();
        let Node::Measure { disagree, .. } = p.root() else {
            panic!()
        };
        let Node::Measure { gates, pair, .. } = disagree.as_ref() else {
            panic!()
        };
        assert_eq!(*pair, 0);
        assert_eq!(
            gates,
            &vec![
                Bxor { source: 1, target: 0 },
                Bxor { source: 2, target: 0 },
                Bxor { source: 3, target: 0 }
            ]
        );
    }

    #[test]
    fn phase_family_switches_roles() {
        let p = aepp(2, Axis::X).unwrap();
        let Node::Measure { gates, axis, .. } = p.root() else {
            panic!()
        };
        assert_eq!(*axis, Axis::X);
        assert!(gates.iter().all(|g| g.source == 3));
    }

    #[test]
    fn validation_catches_double_use() {
        let bad = Node::Measure {
            gates: vec![],
            pair: 0,
            axis: Axis::Z,
            agree: Box::new(Node::Leaf {
                groups: vec![HashGroup {
                    pairs: vec![0],
                    block: None,
                }],
                discard: vec![1],
            }),
            disagree: Box::new(Node::Leaf {
                groups: vec![],
                discard: vec![1],
            }),
        };
        assert!(Protocol::new(2, bad).is_err());
        let unused = Node::Leaf {
            groups: vec![],
            discard: vec![0],
        };
        assert!(Protocol::new(2, unused).is_err());
    }

    #[test]
    fn exponent_range() {
        assert!(aepp(0, Axis::Z).is_err());
        assert!(aepp(7, Axis::Z).is_err());
        assert!(maneva_smolin(6).is_ok());
    }

    #[test]
    fn graft_keeps_accounting() {
        let base = aepp(2, Axis::Z).unwrap();
        let sub = adaptive_block(&[0, 1, 2], Axis::X);
        let root = graft(base.root(), &[false], 0, &sub).unwrap();
        let p = Protocol::new(4, root).unwrap();
        assert_eq!(p.leaf_count(), 2 + base.leaf_count() - 1 + 1);
    }
}
