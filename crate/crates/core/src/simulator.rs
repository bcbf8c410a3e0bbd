//! Monte Carlo play of a fixed plan against a static accept/reject opponent.
//!
//! Trial `t` draws from its own ChaCha8 stream `(seed, t)`, so every trial's
//! outcome is independent of how trials are scheduled. Trials are grouped
//! into fixed-size blocks; block statistics are merged in block order, which
//! keeps the result bit-identical for any number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::Bid;

const BLOCK_TRIALS: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub trials: u64,
    pub mean_utility: f64,
    /// Sample standard deviation (n - 1 denominator) over `sqrt(trials)`.
    /// Zero for a single trial.
    pub std_error: f64,
    pub agreement_rate: f64,
    /// Number of trials that ended on each plan position.
    pub acceptance_counts: Vec<u64>,
    pub seed: u64,
}

// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
    accepted: Vec<u64>,
}

impl Moments {
    fn new(positions: usize) -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            accepted: vec![0; positions],
        }
    }

    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn merge(mut self, other: Self) -> Self {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * (other.count as f64 / total as f64);
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64 / total as f64);
        self.count = total;
        for (mine, theirs) in self.accepted.iter_mut().zip(other.accepted) {
            *mine += theirs;
        }
        self
    }
}

/// Outcome of one trial: the accepted position, or `None` on disagreement.
fn play(plan: &[Bid], seed: u64, trial: u64) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    plan.iter()
        .position(|bid| rng.random::<f64>() < bid.acceptance_probability)
}

fn run_block(plan: &[Bid], rv: f64, seed: u64, trials: std::ops::Range<u64>) -> Moments {
    let mut moments = Moments::new(plan.len());
    for trial in trials {
        match play(plan, seed, trial) {
            Some(pos) => {
                moments.accepted[pos] += 1;
                moments.push(plan[pos].utility);
            }
            None => moments.push(rv),
        }
    }
    moments
}

/// Plays `plan` `trials` times. Panics if `trials` is zero.
pub fn simulate(plan: &[Bid], rv: f64, trials: u64, seed: u64) -> SimulationResult {
    assert!(trials >= 1, "at least one trial is required");
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let per_block: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_TRIALS;
            let end = (start + BLOCK_TRIALS).min(trials);
            run_block(plan, rv, seed, start..end)
        })
        .collect();
    let total = per_block
        .into_iter()
        .fold(Moments::new(plan.len()), Moments::merge);

    let std_error = if trials > 1 {
        (total.m2 / (trials - 1) as f64).sqrt() / (trials as f64).sqrt()
    } else {
        0.0
    };
    let agreed: u64 = total.accepted.iter().sum();
    SimulationResult {
        trials,
        mean_utility: total.mean,
        std_error,
        agreement_rate: agreed as f64 / trials as f64,
        acceptance_counts: total.accepted,
        seed,
    }
}
