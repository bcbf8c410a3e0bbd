//! Exhaustive reference solver for small instances.
//!
//! Everything here evaluates sequences by direct summation of
//! `sum_i u_i a_i prod_{j<i} (1 - a_j) + rv prod_j (1 - a_j)` and never goes
//! through the evaluator's recurrence, so the two can check each other.

use thiserror::Error;

use crate::domain::{Bid, BidId, BidPlan, PlanningProblem};

pub const DEFAULT_MAX_N: usize = 10;
pub const DEFAULT_MAX_DEADLINE: usize = 6;
pub const MAX_PERMUTATION_SET: usize = 6;

/// Slack allowed when comparing the sorted ordering against the best
/// permutation; mathematically equal orderings may differ in the last bits.
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: {what} is {value}, limit {limit}")]
    InstanceTooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    pub max_n: usize,
    pub max_deadline: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
            max_deadline: DEFAULT_MAX_DEADLINE,
        }
    }
}

/// Expected utility by direct summation over the offers.
pub fn summed_expected_utility(sequence: &[&Bid], rv: f64) -> f64 {
    let mut total = 0.0;
    for (i, bid) in sequence.iter().enumerate() {
        let reached: f64 = sequence[..i]
            .iter()
            .map(|b| 1.0 - b.acceptance_probability)
            .product();
        total += bid.utility * bid.acceptance_probability * reached;
    }
    let no_deal: f64 = sequence
        .iter()
        .map(|b| 1.0 - b.acceptance_probability)
        .product();
    total + rv * no_deal
}

struct Best {
    eu: f64,
    ids: Vec<BidId>,
    indices: Vec<usize>,
}

impl Best {
    // Higher value; then shorter; then lexicographically smaller ids.
    fn is_beaten_by(&self, eu: f64, ids: &[BidId]) -> bool {
        if eu != self.eu {
            return eu > self.eu;
        }
        if ids.len() != self.ids.len() {
            return ids.len() < self.ids.len();
        }
        ids < self.ids.as_slice()
    }
}

struct Search<'a> {
    bids: &'a [Bid],
    rv: f64,
    max_len: usize,
    used: Vec<bool>,
    current: Vec<usize>,
    best: Best,
}

impl Search<'_> {
    fn visit(&mut self) {
        let seq: Vec<&Bid> = self.current.iter().map(|&i| &self.bids[i]).collect();
        let eu = summed_expected_utility(&seq, self.rv);
        let ids: Vec<BidId> = seq.iter().map(|b| b.id).collect();
        if self.best.is_beaten_by(eu, &ids) {
            self.best = Best {
                eu,
                ids,
                indices: self.current.clone(),
            };
        }
        if self.current.len() == self.max_len {
            return;
        }
        for i in 0..self.bids.len() {
            if self.used[i] {
                continue;
            }
            self.used[i] = true;
            self.current.push(i);
            self.visit();
            self.current.pop();
            self.used[i] = false;
        }
    }
}

/// Best duplicate-free sequence of at most `deadline` bids over the whole,
/// unfiltered domain.
pub fn plan_bruteforce(problem: &PlanningProblem, guards: Guards) -> Result<BidPlan, OracleError> {
    let bids = problem.domain().bids();
    if bids.len() > guards.max_n {
        return Err(OracleError::InstanceTooLarge {
            what: "domain size",
            value: bids.len(),
            limit: guards.max_n,
        });
    }
    if problem.deadline() > guards.max_deadline {
        return Err(OracleError::InstanceTooLarge {
            what: "deadline",
            value: problem.deadline(),
            limit: guards.max_deadline,
        });
    }

    let rv = problem.reservation_value();
    let mut search = Search {
        bids,
        rv,
        max_len: problem.deadline().min(bids.len()),
        used: vec![false; bids.len()],
        current: Vec::new(),
        best: Best {
            eu: f64::NEG_INFINITY,
            ids: Vec::new(),
            indices: Vec::new(),
        },
    };
    search.visit();

    let best = search.best;
    Ok(BidPlan {
        sequence: best.indices.iter().map(|&i| bids[i].clone()).collect(),
        expected_utility: best.eu,
    })
}

/// Best value over subsets of at most `deadline` bids, each offered in
/// non-increasing utility order. Agrees with [`plan_bruteforce`] exactly when
/// sorted orderings are optimal.
pub fn best_sorted_subset_value(problem: &PlanningProblem, guards: Guards) -> Result<f64, OracleError> {
    let bids = problem.domain().bids();
    if bids.len() > guards.max_n {
        return Err(OracleError::InstanceTooLarge {
            what: "domain size",
            value: bids.len(),
            limit: guards.max_n,
        });
    }
    let rv = problem.reservation_value();
    let mut best = rv;
    for mask in 1u32..(1 << bids.len()) {
        if mask.count_ones() as usize > problem.deadline() {
            continue;
        }
        let mut subset: Vec<&Bid> = (0..bids.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &bids[i])
            .collect();
        subset.sort_by(|x, y| y.utility.total_cmp(&x.utility));
        best = best.max(summed_expected_utility(&subset, rv));
    }
    Ok(best)
}

fn for_each_permutation<'a>(items: &mut Vec<&'a Bid>, k: usize, f: &mut impl FnMut(&[&'a Bid])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Whether offering `bid_set` by non-increasing utility is as good as the
/// best of all its orderings.
pub fn verify_sorted_dominance(bid_set: &[Bid], rv: f64) -> Result<bool, OracleError> {
    if bid_set.len() > MAX_PERMUTATION_SET {
        return Err(OracleError::InstanceTooLarge {
            what: "bid set size",
            value: bid_set.len(),
            limit: MAX_PERMUTATION_SET,
        });
    }
    let mut sorted: Vec<&Bid> = bid_set.iter().collect();
    sorted.sort_by(|x, y| y.utility.total_cmp(&x.utility));
    let sorted_eu = summed_expected_utility(&sorted, rv);

    let mut best = f64::NEG_INFINITY;
    let mut items: Vec<&Bid> = bid_set.iter().collect();
    for_each_permutation(&mut items, 0, &mut |perm| {
        best = best.max(summed_expected_utility(perm, rv));
    });
    Ok(sorted_eu >= best - DOMINANCE_TOLERANCE)
}
