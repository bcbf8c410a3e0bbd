//! Wall-clock scaling of the two planner paths.
//!
//! The contract is the ratio between cells, not absolute times: doubling the
//! domain size should roughly quadruple the naive path's time, and doubling
//! the deadline (while it stays below the domain size) should roughly double
//! it. Ratios are taken per round (one repetition of every cell) and the
//! median over rounds is reported.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::generators::{random_problem, Correlation, RvMode};
use crate::planner::{run_greedy, PlannerOptions};

/// Agreement tolerance between the expected utilities of the two paths.
pub const PATH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub n: usize,
    pub deadline: usize,
    pub reps: usize,
    pub naive_median_secs: f64,
    pub incremental_median_secs: f64,
    /// Identical id sequences and expected utilities within [`PATH_TOLERANCE`]
    /// on every repetition.
    pub paths_agree: bool,
    pub mean_plan_len: f64,
    /// Naive-path time of every repetition, in round order.
    #[serde(skip)]
    pub naive_secs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchTable {
    pub cells: Vec<BenchCell>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

fn cell_seed(seed: u64, n: usize, deadline: usize, rep: usize) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add((n as u64) << 32)
        .wrapping_add((deadline as u64) << 16)
        .wrapping_add(rep as u64)
}

/// Times both planner paths on `reps` independent-mode problems per
/// `(n, deadline)` cell, with reservation value 0 so the whole domain stays
/// in play. Repetitions are interleaved across cells so that slow phases of
/// the machine do not land on a single cell. Runs on the calling thread.
///
/// Panics if `reps < 3` or any `n`/`deadline` is zero.
pub fn bench_scaling(n_values: &[usize], d_values: &[usize], reps: usize, seed: u64) -> BenchTable {
    assert!(reps >= 3, "at least three repetitions are needed for a median");
    let cells: Vec<(usize, usize)> = n_values
        .iter()
        .flat_map(|&n| d_values.iter().map(move |&d| (n, d)))
        .collect();
    let mut naive_times = vec![Vec::with_capacity(reps); cells.len()];
    let mut fast_times = vec![Vec::with_capacity(reps); cells.len()];
    let mut agree = vec![true; cells.len()];
    let mut total_len = vec![0usize; cells.len()];

    for rep in 0..reps {
        for (c, &(n, deadline)) in cells.iter().enumerate() {
            let problem = random_problem(
                n,
                RvMode::Fixed(0.0),
                deadline,
                cell_seed(seed, n, deadline, rep),
                Correlation::Independent,
            )
            .expect("bench parameters must be positive");

            let start = Instant::now();
            let naive = run_greedy(&problem, PlannerOptions::naive());
            naive_times[c].push(start.elapsed().as_secs_f64());

            let start = Instant::now();
            let fast = run_greedy(&problem, PlannerOptions::incremental());
            fast_times[c].push(start.elapsed().as_secs_f64());

            agree[c] &= naive.plan.ids() == fast.plan.ids()
                && (naive.plan.expected_utility - fast.plan.expected_utility).abs() <= PATH_TOLERANCE;
            total_len[c] += fast.plan.len();
        }
    }

    let cells = cells
        .into_iter()
        .enumerate()
        .map(|(c, (n, deadline))| BenchCell {
            n,
            deadline,
            reps,
            naive_median_secs: median(naive_times[c].clone()),
            naive_secs: std::mem::take(&mut naive_times[c]),
            incremental_median_secs: median(std::mem::take(&mut fast_times[c])),
            paths_agree: agree[c],
            mean_plan_len: total_len[c] as f64 / reps as f64,
        })
        .collect();
    BenchTable { cells }
}

/// Median over rounds of the time ratio between neighbouring cells. Both
/// cells of a pair were timed in the same round, so slow phases of the
/// machine cancel out.
fn successive_ratios(cells: &[&BenchCell]) -> Vec<f64> {
    cells
        .windows(2)
        .map(|w| {
            let ratios = w[0]
                .naive_secs
                .iter()
                .zip(&w[1].naive_secs)
                .map(|(lo, hi)| hi / lo)
                .collect();
            median(ratios)
        })
        .collect()
}

impl BenchTable {
    pub fn all_paths_agree(&self) -> bool {
        self.cells.iter().all(|c| c.paths_agree)
    }

    /// Successive naive-time ratios along `n`, for cells sharing `deadline`.
    pub fn naive_ratios_in_n(&self, deadline: usize) -> Vec<f64> {
        let mut cells: Vec<&BenchCell> = self.cells.iter().filter(|c| c.deadline == deadline).collect();
        cells.sort_by_key(|c| c.n);
        successive_ratios(&cells)
    }

    /// Successive naive-time ratios along the deadline, for cells sharing `n`.
    pub fn naive_ratios_in_deadline(&self, n: usize) -> Vec<f64> {
        let mut cells: Vec<&BenchCell> = self.cells.iter().filter(|c| c.n == n).collect();
        cells.sort_by_key(|c| c.deadline);
        successive_ratios(&cells)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,deadline,reps,naive_median_secs,incremental_median_secs,paths_agree,mean_plan_len\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{:.9},{},{}",
                c.n,
                c.deadline,
                c.reps,
                c.naive_median_secs,
                c.incremental_median_secs,
                c.paths_agree,
                c.mean_plan_len
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:>7} {:>8} {:>5} {:>14} {:>14} {:>6}\n",
            "n", "deadline", "reps", "naive (ms)", "incr. (ms)", "agree"
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:>7} {:>8} {:>5} {:>14.3} {:>14.3} {:>6}",
                c.n,
                c.deadline,
                c.reps,
                c.naive_median_secs * 1e3,
                c.incremental_median_secs * 1e3,
                if c.paths_agree { "yes" } else { "NO" }
            );
        }
        out
    }
}
