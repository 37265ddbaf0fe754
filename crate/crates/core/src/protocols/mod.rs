//! Purification protocols, their exact evaluation and the closed-form
//! AEPP yield.

mod evaluate;
mod program;
mod recurrence;
mod spec;
mod star;
mod theorem;

pub use evaluate::{
    check_tree, evaluate_dense, evaluate_dense_from, evaluate_structural, evaluate_yield, path_key, Accounting,
    GroupState, MeasurementRecord, ProtocolOutcome, ResidualGroup,
};
pub use program::{
    adaptive_block, aepp, fanout_gates, first_step_only, graft, leung_shor, maneva_smolin, BlockAnnotation, Bxor,
    HashGroup, Node, Protocol, MAX_EXPONENT,
};
pub use recurrence::{recurrence_step, run_recurrence, RecurrenceRound, RecurrenceTrace, SwitchRule};
pub use spec::{
    evaluate_tree, exact_outcomes, protocol_at, summarize, yield_at, BranchSummary, Family, ProtocolSpec, YieldResult,
};
pub use star::{aepp_star_4_plan, compose_star, GroupTreatment, StarChoice, StarPlan};
pub use theorem::{hashing_yield, hashing_yield_raw, theorem_yield, THEOREM_MAX_EXPONENT};

use crate::bell::{werner, Axis};
use crate::error::Result;

/// Exact AEPP(a, 2^n) tree on Werner pairs of fidelity `F`.
pub fn aepp_a_tree(exponent: u32, fidelity: f64) -> Result<Vec<ProtocolOutcome>> {
    evaluate_tree(&aepp(exponent, Axis::Z)?, &werner(fidelity)?)
}

/// Exact AEPP(p, 2^n) tree on Werner pairs of fidelity `F`.
pub fn aepp_p_tree(exponent: u32, fidelity: f64) -> Result<Vec<ProtocolOutcome>> {
    evaluate_tree(&aepp(exponent, Axis::X)?, &werner(fidelity)?)
}

pub fn maneva_smolin_yield(exponent: u32, fidelity: f64) -> Result<YieldResult> {
    yield_at(&ProtocolSpec::maneva_smolin(exponent)?, fidelity)
}

pub fn leung_shor_yield(fidelity: f64) -> Result<YieldResult> {
    yield_at(&ProtocolSpec::of(Family::LeungShor), fidelity)
}

pub fn recurrence_yield(fidelity: f64, rule: SwitchRule) -> Result<YieldResult> {
    yield_at(&ProtocolSpec::of(Family::Recurrence).with_switch_rule(rule), fidelity)
}

pub fn modified_recurrence_yield(fidelity: f64, rule: SwitchRule) -> Result<YieldResult> {
    yield_at(
        &ProtocolSpec::of(Family::ModifiedRecurrence).with_switch_rule(rule),
        fidelity,
    )
}

pub fn aepp_star_4(fidelity: f64) -> Result<YieldResult> {
    yield_at(&ProtocolSpec::of(Family::AeppStar4), fidelity)
}
