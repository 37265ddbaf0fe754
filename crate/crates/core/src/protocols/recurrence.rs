//! Recurrence and modified recurrence: AEPP(a,2) (and AEPP(p,2)) applied
//! round after round to the pairs that survived the previous round.
//!
//! Survivors of a round are i.i.d. again, so one [`PairDistribution`] per
//! round describes the whole population. It is tracked exactly, without
//! twirling back to Werner form.

use serde::{Deserialize, Serialize};

use super::theorem::hashing_yield;
use crate::bell::{Axis, DenseJointDistribution, PairDistribution};
use crate::error::{Error, Result};

/// When to stop iterating and hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchRule {
    /// Keep going while one more round followed by hashing beats hashing
    /// now, up to `max_rounds` rounds in total.
    Greedy { max_rounds: usize },
    /// Exactly this many rounds.
    Fixed(usize),
}

impl Default for SwitchRule {
    fn default() -> Self {
        SwitchRule::Greedy { max_rounds: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceRound {
    pub axis: Axis,
    pub pass_probability: f64,
    /// Fraction of input pairs still alive after this round.
    pub survival: f64,
    pub state: PairDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceTrace {
    pub initial: PairDistribution,
    pub rounds: Vec<RecurrenceRound>,
    pub yield_value: f64,
}

impl RecurrenceTrace {
    pub fn final_state(&self) -> PairDistribution {
        self.rounds.last().map_or(self.initial, |r| r.state)
    }

    pub fn survival(&self) -> f64 {
        self.rounds.last().map_or(1.0, |r| r.survival)
    }
}

/// One two-pair round along `axis`: returns the pass probability and the
/// law of the surviving pair.
///
/// Along Z pair 0 is the BXOR source and pair 1 is measured; along X the
/// roles in the gate are switched.
pub fn recurrence_step(state: &PairDistribution, axis: Axis) -> Result<(f64, PairDistribution)> {
    let joint = DenseJointDistribution::iid(state, 2)?;
    let joint = match axis {
        Axis::Z => joint.bxor(0, 1)?,
        Axis::X => joint.bxor(1, 0)?,
    };
    let (p, rest) = joint.measure(1, axis, false)?;
    let rest = rest.ok_or(Error::ZeroProbability)?;
    Ok((p, rest.pair_marginal(0)?))
}

/// Runs the recurrence starting from `initial`.
///
/// The first round is always an amplitude round. With `alternate` the
/// following rounds alternate phase, amplitude, phase, ...
pub fn run_recurrence(initial: &PairDistribution, alternate: bool, rule: SwitchRule) -> Result<RecurrenceTrace> {
    let axis_of = |round: usize| {
        if alternate && round % 2 == 1 {
            Axis::X
        } else {
            Axis::Z
        }
    };
    let (limit, greedy) = match rule {
        SwitchRule::Greedy { max_rounds } => (max_rounds.max(1), true),
        SwitchRule::Fixed(r) => (r, false),
    };
    let mut rounds: Vec<RecurrenceRound> = Vec::new();
    let mut state = *initial;
    let mut survival = 1.0;
    while rounds.len() < limit {
        let axis = axis_of(rounds.len());
        let (p, next) = match recurrence_step(&state, axis) {
            Ok(v) => v,
            // no pair survives this round: stop before it
            Err(Error::ZeroProbability) if greedy && !rounds.is_empty() => break,
            Err(e) => return Err(e),
        };
        let next_survival = survival * p / 2.0;
        if greedy && !rounds.is_empty() && next_survival * hashing_yield(&next) <= survival * hashing_yield(&state) {
            break;
        }
        state = next;
        survival = next_survival;
        rounds.push(RecurrenceRound {
            axis,
            pass_probability: p,
            survival,
            state,
        });
    }
    Ok(RecurrenceTrace {
        initial: *initial,
        yield_value: survival * hashing_yield(&state),
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::werner;

    #[test]
    fn pure_state_stops_after_the_first_round() {
        for alternate in [false, true] {
            let t = run_recurrence(&werner(1.0).unwrap(), alternate, SwitchRule::default()).unwrap();
            assert_eq!(t.rounds.len(), 1);
            assert_eq!(t.yield_value, 0.5);
        }
    }

    #[test]
    fn fixed_rounds_are_honoured() {
        let t = run_recurrence(&werner(0.7).unwrap(), true, SwitchRule::Fixed(3)).unwrap();
        let axes: Vec<Axis> = t.rounds.iter().map(|r| r.axis).collect();
        assert_eq!(axes, vec![Axis::Z, Axis::X, Axis::Z]);
        let zero = run_recurrence(&werner(0.9).unwrap(), false, SwitchRule::Fixed(0)).unwrap();
        assert!(zero.rounds.is_empty());
        assert_eq!(zero.yield_value, hashing_yield(&werner(0.9).unwrap()));
    }

    #[test]
    fn one_round_by_hand() {
        // F = 0.75, G = 1/12: pass when b1 = b2
        let f = 0.75;
        let g = 1.0 / 12.0;
        let (p, s) = recurrence_step(&werner(f).unwrap(), Axis::Z).unwrap();
        let expected_p = (f + g) * (f + g) + 4.0 * g * g;
        assert!((p - expected_p).abs() < 1e-15);
        // surviving label (a1^a2, b1)
        let e00 = (f * f + g * g) / expected_p;
        let e01 = (2.0 * g * g) / expected_p;
        let e10 = (2.0 * f * g) / expected_p;
        let e11 = (2.0 * g * g) / expected_p;
        for (x, y) in s.probs().iter().zip([e00, e01, e10, e11]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn greedy_never_loses_to_one_round() {
        for i in 0..=40 {
            let f = 0.5 + 0.5 * i as f64 / 40.0;
            let w = werner(f).unwrap();
            let one = run_recurrence(&w, false, SwitchRule::Fixed(1)).unwrap().yield_value;
            for alternate in [false, true] {
                let g = run_recurrence(&w, alternate, SwitchRule::default()).unwrap();
                assert!(g.yield_value >= one - 1e-15);
            }
        }
    }
}
