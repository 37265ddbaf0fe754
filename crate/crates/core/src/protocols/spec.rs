use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate_dense, evaluate_structural, evaluate_yield, Accounting, ProtocolOutcome};
use super::program::{aepp, leung_shor, maneva_smolin, Protocol};
use super::recurrence::{run_recurrence, SwitchRule};
use super::star::aepp_star_4_plan;
use super::theorem::hashing_yield;
use crate::bell::{werner, Axis, PairDistribution};
use crate::error::{check_fidelity, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    AeppA,
    AeppP,
    Recurrence,
    ModifiedRecurrence,
    ManevaSmolin,
    LeungShor,
    AeppStar4,
    Hashing,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::AeppA,
        Family::AeppP,
        Family::Recurrence,
        Family::ModifiedRecurrence,
        Family::ManevaSmolin,
        Family::LeungShor,
        Family::AeppStar4,
        Family::Hashing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::AeppA => "aepp-a",
            Family::AeppP => "aepp-p",
            Family::Recurrence => "recurrence",
            Family::ModifiedRecurrence => "modified-recurrence",
            Family::ManevaSmolin => "maneva-smolin",
            Family::LeungShor => "leung-shor",
            Family::AeppStar4 => "aepp-star-4",
            Family::Hashing => "hashing",
        }
    }

    /// Whether the block size is chosen by an exponent.
    pub fn takes_exponent(self) -> bool {
        matches!(self, Family::AeppA | Family::AeppP | Family::ManevaSmolin)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
            Error::Domain(format!("unknown protocol {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// A protocol together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub family: Family,
    /// Block size `N = 2^exponent` for the families that take one; fixed
    /// otherwise (4 for Leung-Shor and AEPP*(a,4), 2 for the recurrences).
    pub exponent: u32,
    pub switch_rule: SwitchRule,
}

impl ProtocolSpec {
    pub fn new(family: Family, exponent: u32) -> Result<Self> {
        let exponent = match family {
            Family::AeppA | Family::AeppP | Family::ManevaSmolin => {
                if !(1..=super::program::MAX_EXPONENT).contains(&exponent) {
                    return Err(Error::Domain(format!(
                        "{} needs an exponent in 1..={}, got {exponent}",
                        family.name(),
                        super::program::MAX_EXPONENT
                    )));
                }
                exponent
            }
            Family::LeungShor | Family::AeppStar4 => 2,
            Family::Recurrence | Family::ModifiedRecurrence => 1,
            Family::Hashing => 0,
        };
        Ok(ProtocolSpec {
            family,
            exponent,
            switch_rule: SwitchRule::default(),
        })
    }

    pub fn aepp_a(exponent: u32) -> Result<Self> {
        Self::new(Family::AeppA, exponent)
    }

    pub fn aepp_p(exponent: u32) -> Result<Self> {
        Self::new(Family::AeppP, exponent)
    }

    pub fn maneva_smolin(exponent: u32) -> Result<Self> {
        Self::new(Family::ManevaSmolin, exponent)
    }

    pub fn of(family: Family) -> Self {
        Self::new(family, 1).expect("families without an exponent always construct")
    }

    pub fn with_switch_rule(mut self, rule: SwitchRule) -> Self {
        self.switch_rule = rule;
        self
    }

    pub fn block_size(&self) -> usize {
        1 << self.exponent
    }

    /// The F-independent decision tree, for block families other than
    /// AEPP*(a,4) (whose tree depends on F, see [`protocol_at`]).
    pub fn protocol(&self) -> Result<Option<Protocol>> {
        Ok(match self.family {
            Family::AeppA => Some(aepp(self.exponent, Axis::Z)?),
            Family::AeppP => Some(aepp(self.exponent, Axis::X)?),
            Family::ManevaSmolin => Some(maneva_smolin(self.exponent)?),
            Family::LeungShor => Some(leung_shor()),
            Family::AeppStar4 | Family::Recurrence | Family::ModifiedRecurrence | Family::Hashing => None,
        })
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.family.takes_exponent() {
            write!(f, "{}-n{}", self.family.name(), self.exponent)
        } else {
            f.write_str(self.family.name())
        }
    }
}

impl FromStr for ProtocolSpec {
    type Err = Error;

    /// Parses the names produced by `Display`, e.g. `aepp-a-n3`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some((head, tail)) = s.rsplit_once("-n") {
            if let (Ok(family), Ok(exponent)) = (head.parse::<Family>(), tail.parse::<u32>()) {
                if family.takes_exponent() {
                    return Self::new(family, exponent);
                }
            }
        }
        let family: Family = s.parse()?;
        if family.takes_exponent() {
            return Err(Error::Domain(format!("{s} needs a block exponent, e.g. {s}-n2")));
        }
        Ok(Self::of(family))
    }
}

/// Decision tree to run at fidelity `F` for block families.
pub fn protocol_at(spec: &ProtocolSpec, fidelity: f64) -> Result<Option<Protocol>> {
    match spec.family {
        Family::AeppStar4 => Ok(Some(aepp_star_4_plan(fidelity)?.protocol)),
        _ => spec.protocol(),
    }
}

/// Exact leaves of a block protocol on Werner pairs of fidelity `F`.
///
/// Blocks of up to 8 pairs are evaluated with dense tables; larger single
/// axis blocks use the structural evaluator.
pub fn exact_outcomes(spec: &ProtocolSpec, fidelity: f64) -> Result<Option<Vec<ProtocolOutcome>>> {
    let base = werner(fidelity)?;
    let Some(protocol) = protocol_at(spec, fidelity)? else {
        return Ok(None);
    };
    Ok(Some(evaluate_tree(&protocol, &base)?))
}

/// Dense evaluation for small blocks, structural otherwise.
pub fn evaluate_tree(protocol: &Protocol, base: &PairDistribution) -> Result<Vec<ProtocolOutcome>> {
    if protocol.pairs() <= 8 {
        evaluate_dense(protocol, base)
    } else {
        evaluate_structural(protocol, base)
    }
}

/// Per-leaf (or per-round) detail attached to a [`YieldResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub key: String,
    pub probability: f64,
    pub measured: usize,
    pub discarded: usize,
    pub group_sizes: Vec<usize>,
    pub group_entropies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldResult {
    pub fidelity: f64,
    pub protocol: ProtocolSpec,
    #[serde(rename = "yield")]
    pub yield_value: f64,
    pub branches: Vec<BranchSummary>,
}

/// Exact yield of `spec` on Werner pairs of fidelity `F`, with hashing
/// applied only to groups where it pays.
pub fn yield_at(spec: &ProtocolSpec, fidelity: f64) -> Result<YieldResult> {
    check_fidelity(fidelity)?;
    let base = werner(fidelity)?;
    let (yield_value, branches) = match spec.family {
        Family::Hashing => (hashing_yield(&base), Vec::new()),
        Family::Recurrence | Family::ModifiedRecurrence => {
            let alternate = spec.family == Family::ModifiedRecurrence;
            let trace = run_recurrence(&base, alternate, spec.switch_rule)?;
            let branches = trace
                .rounds
                .iter()
                .enumerate()
                .map(|(i, r)| BranchSummary {
                    key: format!("round{}:{}", i + 1, r.axis),
                    probability: r.pass_probability,
                    measured: 1,
                    discarded: 0,
                    group_sizes: vec![1],
                    group_entropies: vec![r.state.entropy()],
                })
                .collect();
            (trace.yield_value, branches)
        }
        _ => {
            let outcomes = exact_outcomes(spec, fidelity)?.expect("block family has a tree");
            let block = outcomes
                .first()
                .map(|o| o.measured + o.discarded + o.hashed())
                .unwrap_or(spec.block_size());
            let y = evaluate_yield(&outcomes, block, Accounting::Floored)?;
            (y, summarize(&outcomes))
        }
    };
    Ok(YieldResult {
        fidelity,
        protocol: *spec,
        yield_value,
        branches,
    })
}

pub fn summarize(outcomes: &[ProtocolOutcome]) -> Vec<BranchSummary> {
    outcomes
        .iter()
        .map(|o| BranchSummary {
            key: o.key(),
            probability: o.branch_probability,
            measured: o.measured,
            discarded: o.discarded,
            group_sizes: o.groups.iter().map(|g| g.size()).collect(),
            group_entropies: o.groups.iter().map(|g| g.state.entropy()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for family in Family::ALL {
            let spec = if family.takes_exponent() {
                ProtocolSpec::new(family, 3).unwrap()
            } else {
                ProtocolSpec::of(family)
            };
            let text = spec.to_string();
            assert_eq!(text.parse::<ProtocolSpec>().unwrap(), spec, "{text}");
        }
        assert_eq!(ProtocolSpec::aepp_a(2).unwrap().to_string(), "aepp-a-n2");
        assert!("aepp-a".parse::<ProtocolSpec>().is_err());
        assert!("aepp-q-n2".parse::<ProtocolSpec>().is_err());
        assert!("aepp-a-n9".parse::<ProtocolSpec>().is_err());
    }

    #[test]
    fn fixed_block_sizes() {
        assert_eq!(ProtocolSpec::of(Family::LeungShor).block_size(), 4);
        assert_eq!(ProtocolSpec::of(Family::AeppStar4).block_size(), 4);
        assert_eq!(ProtocolSpec::of(Family::Recurrence).block_size(), 2);
    }

    #[test]
    fn pure_state_yields() {
        let cases = [
            (ProtocolSpec::aepp_a(1).unwrap(), 0.5),
            (ProtocolSpec::aepp_a(2).unwrap(), 0.75),
            (ProtocolSpec::aepp_p(1).unwrap(), 0.5),
            (ProtocolSpec::aepp_a(5).unwrap(), 31.0 / 32.0),
            (ProtocolSpec::maneva_smolin(3).unwrap(), 7.0 / 8.0),
            (ProtocolSpec::of(Family::LeungShor), 0.5),
            (ProtocolSpec::of(Family::AeppStar4), 0.75),
            (ProtocolSpec::of(Family::Recurrence), 0.5),
            (ProtocolSpec::of(Family::ModifiedRecurrence), 0.5),
            (ProtocolSpec::of(Family::Hashing), 1.0),
        ];
        for (spec, expected) in cases {
            let y = yield_at(&spec, 1.0).unwrap().yield_value;
            assert!((y - expected).abs() < 1e-15, "{spec}: {y}");
        }
    }

    #[test]
    fn maximally_mixed_yields_nothing() {
        for family in Family::ALL {
            let spec = if family.takes_exponent() {
                ProtocolSpec::new(family, 2).unwrap()
            } else {
                ProtocolSpec::of(family)
            };
            assert_eq!(yield_at(&spec, 0.25).unwrap().yield_value, 0.0, "{spec}");
        }
    }
}
