//! Optimal bid sequences for bilateral negotiation with a private
//! reservation value.
//!
//! Given a finite set of outcomes with own utilities and modelled opponent
//! acceptance probabilities, a reservation value and a deadline, the
//! [`planner`] computes the bid sequence maximizing expected utility. The
//! [`oracle`] solves small instances exhaustively, the [`simulator`] plays
//! plans by Monte Carlo, and [`bench`] measures how the planner scales.

pub mod bench;
pub mod cli;
pub mod domain;
pub mod evaluator;
pub mod generators;
pub mod io;
pub mod oracle;
pub mod planner;
pub mod simulator;

pub use domain::{validate_domain, Bid, BidId, BidPlan, DomainError, NegotiationDomain, PlanningProblem};
pub use evaluator::{evaluate_with_report, expected_utility, marginal_improvement, EvaluationReport};
pub use planner::{filter_dominated, plan_greedy_trace, plan_miarvelous, run_greedy, EvalPath, PlannerOptions};
pub use simulator::{simulate, SimulationResult};
