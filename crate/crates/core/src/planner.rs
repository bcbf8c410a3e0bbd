//! Greedy marginal-improvement planner.
//!
//! Starting from the empty plan (worth the reservation value), each round
//! inserts the unused bid whose insertion at its sorted position raises the
//! expected utility the most. The plan is kept sorted by non-increasing
//! utility throughout, and the loop ends after `deadline` rounds, when the
//! candidates run out, or when no insertion strictly improves the plan.
//!
//! Two scoring paths are available. [`EvalPath::Naive`] walks the whole
//! utility-sorted pool for every candidate to rebuild the sorted sequence
//! `plan + candidate` (`O(n)` per candidate, `O(n^2 D)` overall).
//! [`EvalPath::Incremental`] evaluates the current plan once per round and
//! scores each candidate in `O(log k)`.
//! Both use the same floating point operations for a given insertion, so
//! they select the same bids bit for bit.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::domain::{Bid, BidId, BidPlan, NegotiationDomain, PlanningProblem};
use crate::evaluator::{
    continue_value, evaluate_with_report, expected_utility, insertion_gain, insertion_position,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPath {
    Naive,
    #[default]
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlannerOptions {
    pub path: EvalPath,
    /// Score the candidates of each round on the rayon pool.
    pub parallel: bool,
}

impl PlannerOptions {
    pub fn naive() -> Self {
        Self {
            path: EvalPath::Naive,
            parallel: false,
        }
    }

    pub fn incremental() -> Self {
        Self {
            path: EvalPath::Incremental,
            parallel: false,
        }
    }

    pub fn parallel(mut self) -> Self {
        self.parallel = true;
        self
    }
}

/// One round of the greedy loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    /// 1-based round number.
    pub step: usize,
    pub bid_id: BidId,
    pub delta: f64,
    /// Expected utility of the plan after this round.
    pub expected_utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub plan: BidPlan,
    pub trace: Vec<TraceStep>,
}

/// Bids whose utility strictly exceeds `rv`, in domain order.
///
/// A bid worth at most the reservation value can only lower (or, at equality,
/// leave unchanged) the value of any plan it is added to.
pub fn filter_dominated(domain: &NegotiationDomain, rv: f64) -> Vec<Bid> {
    domain
        .bids()
        .iter()
        .filter(|b| b.utility > rv)
        .cloned()
        .collect()
}

pub fn plan_miarvelous(problem: &PlanningProblem) -> BidPlan {
    run_greedy(problem, PlannerOptions::default()).plan
}

pub fn plan_greedy_trace(problem: &PlanningProblem) -> Vec<TraceStep> {
    run_greedy(problem, PlannerOptions::default()).trace
}

#[derive(Debug, Clone, Copy)]
struct Choice {
    delta: f64,
    slot: usize,
    id: BidId,
}

impl Choice {
    // Larger delta first, then lower id.
    fn cmp_preference(&self, other: &Self) -> Ordering {
        self.delta
            .total_cmp(&other.delta)
            .then_with(|| other.id.cmp(&self.id))
    }

    fn best(a: Self, b: Self) -> Self {
        if b.cmp_preference(&a) == Ordering::Greater {
            b
        } else {
            a
        }
    }
}

/// Greedy state. The pool is held in non-increasing utility order; within a
/// run of equal utilities, selected bids sit first, in selection order. A
/// scan over the selected slots therefore visits the plan in plan order.
struct Greedy<'a> {
    pool: &'a [Bid],
    rv: f64,
    /// Slot to pool index.
    order: Vec<usize>,
    utility: Vec<f64>,
    acceptance: Vec<f64>,
    selected: Vec<bool>,
    plan: Vec<Bid>,
}

impl<'a> Greedy<'a> {
    fn new(pool: &'a [Bid], rv: f64) -> Self {
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&x, &y| pool[y].utility.total_cmp(&pool[x].utility));
        Self {
            pool,
            rv,
            utility: order.iter().map(|&i| pool[i].utility).collect(),
            acceptance: order.iter().map(|&i| pool[i].acceptance_probability).collect(),
            selected: vec![false; pool.len()],
            order,
            plan: Vec::new(),
        }
    }

    fn unused(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.order.len()).filter(|&slot| !self.selected[slot])
    }

    fn choice(&self, slot: usize, delta: f64) -> Choice {
        Choice {
            delta,
            slot,
            id: self.pool[self.order[slot]].id,
        }
    }

    fn best_incremental(&self, parallel: bool) -> Option<Choice> {
        let report = evaluate_with_report(&self.plan, self.rv);
        let score = |slot: usize| {
            let (utility, acceptance) = (self.utility[slot], self.acceptance[slot]);
            let position = insertion_position(&self.plan, utility);
            let delta = insertion_gain(
                report.survival_before(position),
                utility,
                acceptance,
                report.suffix_value[position],
            );
            self.choice(slot, delta)
        };
        if parallel {
            let unused: Vec<usize> = self.unused().collect();
            unused.into_par_iter().map(score).reduce_with(Choice::best)
        } else {
            self.unused().map(score).reduce(Choice::best)
        }
    }

    fn best_naive(&self, parallel: bool) -> Option<Choice> {
        let score = |slot: usize| self.choice(slot, self.naive_gain(slot));
        if parallel {
            let unused: Vec<usize> = self.unused().collect();
            unused.into_par_iter().map(score).reduce_with(Choice::best)
        } else {
            self.unused().map(score).reduce(Choice::best)
        }
    }

    /// Scores `candidate` from scratch against the sorted sequence
    /// `plan + candidate`, walking every slot of the pool.
    fn naive_gain(&self, candidate: usize) -> f64 {
        let mut survival = 1.0;
        for slot in 0..candidate {
            if self.selected[slot] {
                survival *= 1.0 - self.acceptance[slot];
            }
        }
        let mut tail = self.rv;
        for slot in (candidate + 1..self.order.len()).rev() {
            if self.selected[slot] {
                tail = continue_value(self.utility[slot], self.acceptance[slot], tail);
            }
        }
        insertion_gain(survival, self.utility[candidate], self.acceptance[candidate], tail)
    }

    fn accept(&mut self, choice: Choice) {
        let slot = choice.slot;
        let bid = self.pool[self.order[slot]].clone();
        let position = insertion_position(&self.plan, bid.utility);
        self.plan.insert(position, bid);

        // Move the slot right behind the selected members of its tie run.
        let utility = self.utility[slot];
        let mut target = slot;
        while target > 0 && self.utility[target - 1] == utility && !self.selected[target - 1] {
            target -= 1;
        }
        self.order[target..=slot].rotate_right(1);
        self.utility[target..=slot].rotate_right(1);
        self.acceptance[target..=slot].rotate_right(1);
        self.selected[target..=slot].rotate_right(1);
        self.selected[target] = true;
    }
}

/// Runs the greedy planner and records one [`TraceStep`] per selected bid.
pub fn run_greedy(problem: &PlanningProblem, options: PlannerOptions) -> GreedyOutcome {
    let rv = problem.reservation_value();
    let pool = filter_dominated(problem.domain(), rv);
    let mut greedy = Greedy::new(&pool, rv);
    let mut trace = Vec::new();

    for step in 1..=problem.deadline() {
        let best = match options.path {
            EvalPath::Incremental => greedy.best_incremental(options.parallel),
            EvalPath::Naive => greedy.best_naive(options.parallel),
        };
        let Some(best) = best else { break };
        if best.delta <= 0.0 {
            break;
        }
        greedy.accept(best);
        trace.push(TraceStep {
            step,
            bid_id: best.id,
            delta: best.delta,
            expected_utility: expected_utility(&greedy.plan, rv),
        });
    }

    let expected_utility = expected_utility(&greedy.plan, rv);
    GreedyOutcome {
        plan: BidPlan {
            sequence: greedy.plan,
            expected_utility,
        },
        trace,
    }
}
