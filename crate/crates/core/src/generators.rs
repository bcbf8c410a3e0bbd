//! Seeded random planning problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{validate_domain, Bid, BidId, PlanningProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RvMode {
    Fixed(f64),
    Uniform,
}

/// How acceptance probabilities relate to utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correlation {
    #[default]
    Independent,
    /// `a = 1 - u` plus uniform noise in `[-0.1, 0.1]`, clamped to `[0, 1]`.
    Inverse,
}

pub const INVERSE_NOISE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

pub fn random_problem(
    n: usize,
    rv_mode: RvMode,
    deadline: usize,
    seed: u64,
    correlation: Correlation,
) -> Result<PlanningProblem, GenError> {
    if n == 0 {
        return Err(GenError::InvalidParams("n must be at least 1".into()));
    }
    if deadline == 0 {
        return Err(GenError::InvalidParams("deadline must be at least 1".into()));
    }
    if let RvMode::Fixed(rv) = rv_mode {
        if !(0.0..=1.0).contains(&rv) {
            return Err(GenError::InvalidParams(format!(
                "reservation value {rv} outside [0, 1]"
            )));
        }
    }
    if BidId::try_from(n).is_err() {
        return Err(GenError::InvalidParams(format!("n = {n} exceeds the id range")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bids = (0..n)
        .map(|i| {
            let utility: f64 = rng.random();
            let acceptance = match correlation {
                Correlation::Independent => rng.random(),
                Correlation::Inverse => {
                    let noise = rng.random_range(-INVERSE_NOISE..=INVERSE_NOISE);
                    (1.0 - utility + noise).clamp(0.0, 1.0)
                }
            };
            Bid::new(i as BidId, utility, acceptance)
        })
        .collect();
    let rv = match rv_mode {
        RvMode::Fixed(rv) => rv,
        RvMode::Uniform => rng.random(),
    };

    let domain = validate_domain(bids).map_err(|e| GenError::InvalidParams(e.to_string()))?;
    PlanningProblem::new(domain, rv, deadline).map_err(|e| GenError::InvalidParams(e.to_string()))
}
