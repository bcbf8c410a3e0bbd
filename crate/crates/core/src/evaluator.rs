//! Expected utility of a bid sequence and of single-bid insertions.
//!
//! For a sequence `x_1..x_k` offered in order, with the reservation value
//! `rv` received when every offer is rejected, the expected utility is the
//! value `V_1` of the backward recurrence
//!
//! ```text
//! V_{k+1} = rv
//! V_i     = a_i * u_i + (1 - a_i) * V_{i+1}
//! ```
//!
//! Inserting a candidate `c` at position `p` changes the value by
//! `S_p * a_c * (u_c - V_p)`, where `S_p` is the probability that all bids
//! before `p` are rejected. [`EvaluationReport`] caches `S` and `V` so that
//! each insertion is scored in constant time.

use thiserror::Error;

use crate::domain::{Bid, BidId};

/// Tolerance used where results are compared "within" a bound.
pub const EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("bid {0} is already part of the plan")]
    CandidateAlreadyInPlan(BidId),
}

/// Expected utility of offering `plan` in the given order.
///
/// The order is used as given; nothing is sorted.
pub fn expected_utility(plan: &[Bid], rv: f64) -> f64 {
    plan.iter().rev().fold(rv, |tail, bid| {
        continue_value(bid.utility, bid.acceptance_probability, tail)
    })
}

#[inline]
pub(crate) fn continue_value(utility: f64, acceptance: f64, tail: f64) -> f64 {
    acceptance * utility + (1.0 - acceptance) * tail
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub expected_utility: f64,
    /// Entry `i` is the probability that bids `0..=i` are all rejected.
    pub survival_prefix: Vec<f64>,
    /// Entry `i` is the expected utility of the plan from position `i` on;
    /// the extra last entry is the reservation value.
    pub suffix_value: Vec<f64>,
}

impl EvaluationReport {
    /// Probability of reaching position `position` (all earlier bids rejected).
    pub fn survival_before(&self, position: usize) -> f64 {
        if position == 0 {
            1.0
        } else {
            self.survival_prefix[position - 1]
        }
    }

    pub fn reservation_value(&self) -> f64 {
        *self
            .suffix_value
            .last()
            .expect("suffix_value always holds the reservation value")
    }
}

pub fn evaluate_with_report(plan: &[Bid], rv: f64) -> EvaluationReport {
    let mut survival_prefix = Vec::with_capacity(plan.len());
    let mut survival = 1.0;
    for bid in plan {
        survival *= 1.0 - bid.acceptance_probability;
        survival_prefix.push(survival);
    }

    let mut suffix_value = vec![rv; plan.len() + 1];
    for (i, bid) in plan.iter().enumerate().rev() {
        suffix_value[i] = continue_value(bid.utility, bid.acceptance_probability, suffix_value[i + 1]);
    }

    EvaluationReport {
        expected_utility: suffix_value[0],
        survival_prefix,
        suffix_value,
    }
}

/// Gain from inserting a candidate, and where it goes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub delta: f64,
    pub position: usize,
}

/// Index at which a bid of `utility` enters a plan sorted by non-increasing
/// utility. Equal-utility bids already in the plan stay in front.
pub fn insertion_position(plan: &[Bid], utility: f64) -> usize {
    plan.partition_point(|b| b.utility >= utility)
}

#[inline]
pub(crate) fn insertion_gain(survival: f64, utility: f64, acceptance: f64, tail: f64) -> f64 {
    survival * acceptance * (utility - tail)
}

/// Change in expected utility from inserting `candidate` into the sorted
/// `plan` at its sorted position. `report` must describe `plan`.
pub fn marginal_improvement(
    plan: &[Bid],
    candidate: &Bid,
    report: &EvaluationReport,
) -> Result<Insertion, EvalError> {
    debug_assert_eq!(report.suffix_value.len(), plan.len() + 1);
    if plan.iter().any(|b| b.id == candidate.id) {
        return Err(EvalError::CandidateAlreadyInPlan(candidate.id));
    }
    let position = insertion_position(plan, candidate.utility);
    let delta = insertion_gain(
        report.survival_before(position),
        candidate.utility,
        candidate.acceptance_probability,
        report.suffix_value[position],
    );
    Ok(Insertion { delta, position })
}
