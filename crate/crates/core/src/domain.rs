//! Bids, negotiation domains and planning problems.
//!
//! Every type here is immutable once validated. A [`NegotiationDomain`] can
//! only be obtained through [`validate_domain`], so downstream code may rely
//! on distinct ids and on utilities and acceptance probabilities in `[0, 1]`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a bid, unique within its domain.
pub type BidId = u32;

/// One outcome of the negotiation, seen from the planning agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub id: BidId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Own utility of the outcome.
    pub utility: f64,
    /// Modelled probability that the opponent accepts the outcome.
    pub acceptance_probability: f64,
}

impl Bid {
    pub fn new(id: BidId, utility: f64, acceptance_probability: f64) -> Self {
        Self {
            id,
            label: None,
            utility,
            acceptance_probability,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Label if present, otherwise the numeric id.
    pub fn display_name(&self) -> String {
        match &self.label {
            Some(label) => label.clone(),
            None => self.id.to_string(),
        }
    }
}

/// Field that failed a range check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Utility,
    AcceptanceProbability,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Utility => f.write_str("utility"),
            Field::AcceptanceProbability => f.write_str("acceptance_probability"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("duplicate bid id {0}")]
    DuplicateId(BidId),
    #[error("{field} of bid {id} is {value}, expected a value in [0, 1]")]
    OutOfRange { field: Field, id: BidId, value: f64 },
    #[error("negotiation domain has no bids")]
    EmptyDomain,
    #[error("reservation value {0} is outside [0, 1]")]
    ReservationValueOutOfRange(f64),
    #[error("deadline must be at least 1 bidding round")]
    ZeroDeadline,
}

fn in_unit_interval(value: f64) -> bool {
    (0.0..=1.0).contains(&value)
}

/// The finite set of outcomes, in canonical (input) order.
#[derive(Debug, Clone, PartialEq)]
pub struct NegotiationDomain {
    bids: Vec<Bid>,
    index: HashMap<BidId, usize>,
}

/// Checks the domain invariants and returns the validated domain.
///
/// Bid order is preserved. Bids whose utility lies below some reservation
/// value are legal here; dropping them is the planner's job.
pub fn validate_domain(raw: Vec<Bid>) -> Result<NegotiationDomain, DomainError> {
    if raw.is_empty() {
        return Err(DomainError::EmptyDomain);
    }
    let mut index = HashMap::with_capacity(raw.len());
    for (pos, bid) in raw.iter().enumerate() {
        if !in_unit_interval(bid.utility) {
            return Err(DomainError::OutOfRange {
                field: Field::Utility,
                id: bid.id,
                value: bid.utility,
            });
        }
        if !in_unit_interval(bid.acceptance_probability) {
            return Err(DomainError::OutOfRange {
                field: Field::AcceptanceProbability,
                id: bid.id,
                value: bid.acceptance_probability,
            });
        }
        if index.insert(bid.id, pos).is_some() {
            return Err(DomainError::DuplicateId(bid.id));
        }
    }
    Ok(NegotiationDomain { bids: raw, index })
}

impl NegotiationDomain {
    pub fn new(bids: Vec<Bid>) -> Result<Self, DomainError> {
        validate_domain(bids)
    }

    pub fn bids(&self) -> &[Bid] {
        &self.bids
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    /// Always false for a validated domain; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn get(&self, id: BidId) -> Option<&Bid> {
        self.index.get(&id).map(|&pos| &self.bids[pos])
    }

    pub fn into_bids(self) -> Vec<Bid> {
        self.bids
    }
}

/// A domain together with the reservation value and the number of own
/// bidding rounds before the deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningProblem {
    domain: NegotiationDomain,
    reservation_value: f64,
    deadline: usize,
}

impl PlanningProblem {
    pub fn new(
        domain: NegotiationDomain,
        reservation_value: f64,
        deadline: usize,
    ) -> Result<Self, DomainError> {
        if !in_unit_interval(reservation_value) {
            return Err(DomainError::ReservationValueOutOfRange(reservation_value));
        }
        if deadline == 0 {
            return Err(DomainError::ZeroDeadline);
        }
        Ok(Self {
            domain,
            reservation_value,
            deadline,
        })
    }

    pub fn domain(&self) -> &NegotiationDomain {
        &self.domain
    }

    pub fn reservation_value(&self) -> f64 {
        self.reservation_value
    }

    pub fn deadline(&self) -> usize {
        self.deadline
    }

    /// Same domain and deadline, different reservation value.
    pub fn with_reservation_value(&self, reservation_value: f64) -> Result<Self, DomainError> {
        Self::new(self.domain.clone(), reservation_value, self.deadline)
    }

    pub fn with_deadline(&self, deadline: usize) -> Result<Self, DomainError> {
        Self::new(self.domain.clone(), self.reservation_value, deadline)
    }
}

/// An ordered bid sequence with its expected utility.
///
/// Plans produced by the planner are duplicate-free, sorted by non-increasing
/// utility, no longer than the deadline and contain only bids whose utility
/// exceeds the reservation value.
#[derive(Debug, Clone, PartialEq)]
pub struct BidPlan {
    pub sequence: Vec<Bid>,
    pub expected_utility: f64,
}

impl BidPlan {
    pub fn ids(&self) -> Vec<BidId> {
        self.sequence.iter().map(|b| b.id).collect()
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn is_sorted_by_utility(&self) -> bool {
        self.sequence
            .windows(2)
            .all(|w| w[0].utility >= w[1].utility)
    }
}
