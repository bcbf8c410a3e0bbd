//! Command line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input (parse, validation,
//! bad arguments), 3 planner/oracle mismatch in `oracle-check`.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::bench_scaling;
use crate::domain::{Bid, BidId, BidPlan, PlanningProblem};
use crate::evaluator::expected_utility;
use crate::generators::{random_problem, Correlation, RvMode};
use crate::io::{parse_problem_file, problem_to_string, ProblemFileError};
use crate::oracle::{plan_bruteforce, Guards, DEFAULT_MAX_DEADLINE, DEFAULT_MAX_N};
use crate::planner::{run_greedy, PlannerOptions, TraceStep};
use crate::simulator::simulate;

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "RVPLAN_THREADS";

/// Largest planner/oracle gap accepted by `oracle-check`.
pub const ORACLE_CHECK_TOLERANCE: f64 = 1e-9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    /// JSON document.
    #[value(alias = "structured-text")]
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rvplan", version, about = "Optimal bid sequences with a reservation value")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the optimal plan and its greedy trace.
    Plan {
        file: PathBuf,
        /// Score candidates in parallel.
        #[arg(long)]
        parallel: bool,
    },
    /// Expected utility of a sequence, offered in the given order.
    Evaluate {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        sequence: Vec<BidId>,
    },
    /// Monte Carlo play of the optimal plan (or of --sequence).
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        sequence: Option<Vec<BidId>>,
    },
    /// Compare the planner with exhaustive search.
    OracleCheck {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_N)]
        max_n: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DEADLINE)]
        max_deadline: usize,
    },
    /// Write a random problem file.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        deadline: usize,
        /// Fixed reservation value; drawn uniformly when absent.
        #[arg(long)]
        rv: Option<f64>,
        /// Anti-correlate acceptance with utility.
        #[arg(long)]
        inverse: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Time the naive and incremental planner paths.
    Bench {
        #[arg(long = "n", value_delimiter = ',', default_values_t = vec![250, 500, 1000])]
        n_values: Vec<usize>,
        #[arg(long = "d", value_delimiter = ',', default_values_t = vec![50])]
        d_values: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<ProblemFileError> for Failure {
    fn from(e: ProblemFileError) -> Self {
        let code = match e {
            ProblemFileError::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    configure_threads();
    match execute(cli, out) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

fn configure_threads() {
    if let Some(threads) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
    {
        // Fails only if a global pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot write output: {e}"),
    })
}

/// Looks up a user-supplied id sequence, rejecting unknown and repeated ids.
fn resolve_sequence(problem: &PlanningProblem, ids: &[BidId]) -> Result<Vec<Bid>, Failure> {
    let mut seen = HashSet::new();
    ids.iter()
        .map(|&id| {
            if !seen.insert(id) {
                return Err(Failure::invalid(format!("duplicate bid id {id} in sequence")));
            }
            problem
                .domain()
                .get(id)
                .cloned()
                .ok_or_else(|| Failure::invalid(format!("unknown bid id {id}")))
        })
        .collect()
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn joined_ids(ids: &[BidId], sep: &str) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn bid_json(bid: &Bid) -> serde_json::Value {
    json!({
        "id": bid.id,
        "label": bid.label,
        "utility": bid.utility,
        "acceptance_probability": bid.acceptance_probability,
    })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let format = cli.format;
    match cli.command {
        Command::Plan { file, parallel } => {
            let problem = parse_problem_file(&file)?;
            let mut options = PlannerOptions::incremental();
            options.parallel = parallel;
            let outcome = run_greedy(&problem, options);
            emit(out, &render_plan(&problem, &outcome.plan, &outcome.trace, format))?;
        }
        Command::Evaluate { file, sequence } => {
            let problem = parse_problem_file(&file)?;
            let bids = resolve_sequence(&problem, &sequence)?;
            let eu = expected_utility(&bids, problem.reservation_value());
            let text = match format {
                Format::Text => format!(
                    "sequence: {}\nexpected utility: {:.6}\n",
                    if sequence.is_empty() { "(empty)".to_string() } else { joined_ids(&sequence, ", ") },
                    eu
                ),
                Format::Csv => format!("sequence,expected_utility\n{},{}\n", joined_ids(&sequence, ";"), eu),
                Format::Json => format!("{}\n", json!({ "sequence": sequence, "expected_utility": eu })),
            };
            emit(out, &text)?;
        }
        Command::Simulate {
            file,
            trials,
            seed,
            sequence,
        } => {
            if trials == 0 {
                return Err(Failure::invalid("--trials must be at least 1"));
            }
            let problem = parse_problem_file(&file)?;
            let rv = problem.reservation_value();
            let plan = match sequence {
                Some(ids) => resolve_sequence(&problem, &ids)?,
                None => run_greedy(&problem, PlannerOptions::default()).plan.sequence,
            };
            let analytic = expected_utility(&plan, rv);
            let r = simulate(&plan, rv, trials, seed);
            let ids: Vec<BidId> = plan.iter().map(|b| b.id).collect();
            let text = match format {
                Format::Text => format!(
                    "sequence: {}\ntrials: {}\nseed: {}\nmean utility: {:.6} (std error {:.6})\n\
                     analytic expected utility: {:.6}\nagreement rate: {:.6}\nacceptance counts: {}\n",
                    joined_ids(&ids, ", "),
                    r.trials,
                    r.seed,
                    r.mean_utility,
                    r.std_error,
                    analytic,
                    r.agreement_rate,
                    joined_ids_u64(&r.acceptance_counts)
                ),
                Format::Csv => format!(
                    "sequence,trials,seed,mean_utility,std_error,agreement_rate,analytic_expected_utility,acceptance_counts\n\
                     {},{},{},{},{},{},{},{}\n",
                    joined_ids(&ids, ";"),
                    r.trials,
                    r.seed,
                    r.mean_utility,
                    r.std_error,
                    r.agreement_rate,
                    analytic,
                    r.acceptance_counts.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "sequence": ids,
                        "trials": r.trials,
                        "seed": r.seed,
                        "mean_utility": r.mean_utility,
                        "std_error": r.std_error,
                        "agreement_rate": r.agreement_rate,
                        "acceptance_counts": r.acceptance_counts,
                        "analytic_expected_utility": analytic,
                    })
                ),
            };
            emit(out, &text)?;
        }
        Command::OracleCheck {
            file,
            max_n,
            max_deadline,
        } => {
            let problem = parse_problem_file(&file)?;
            let guards = Guards { max_n, max_deadline };
            let oracle = plan_bruteforce(&problem, guards).map_err(|e| Failure::invalid(e.to_string()))?;
            let planner = run_greedy(&problem, PlannerOptions::default()).plan;
            let gap = (planner.expected_utility - oracle.expected_utility).abs();
            let pass = gap <= ORACLE_CHECK_TOLERANCE;
            let verdict = if pass { "PASS" } else { "FAIL" };
            let text = match format {
                Format::Text => format!(
                    "planner: [{}] expected utility {:.12}\noracle:  [{}] expected utility {:.12}\n\
                     difference: {:e}\n{}\n",
                    joined_ids(&planner.ids(), ", "),
                    planner.expected_utility,
                    joined_ids(&oracle.ids(), ", "),
                    oracle.expected_utility,
                    gap,
                    verdict
                ),
                Format::Csv => format!(
                    "planner_sequence,planner_eu,oracle_sequence,oracle_eu,abs_diff,result\n{},{},{},{},{},{}\n",
                    joined_ids(&planner.ids(), ";"),
                    planner.expected_utility,
                    joined_ids(&oracle.ids(), ";"),
                    oracle.expected_utility,
                    gap,
                    verdict
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "planner": { "sequence": planner.ids(), "expected_utility": planner.expected_utility },
                        "oracle": { "sequence": oracle.ids(), "expected_utility": oracle.expected_utility },
                        "abs_diff": gap,
                        "result": verdict,
                    })
                ),
            };
            emit(out, &text)?;
            if !pass {
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::Generate {
            n,
            seed,
            deadline,
            rv,
            inverse,
            output,
        } => {
            let rv_mode = rv.map_or(RvMode::Uniform, RvMode::Fixed);
            let correlation = if inverse { Correlation::Inverse } else { Correlation::Independent };
            let problem = random_problem(n, rv_mode, deadline, seed, correlation)
                .map_err(|e| Failure::invalid(e.to_string()))?;
            match output {
                Some(path) => crate::io::write_problem_file(&problem, path)?,
                None => emit(out, &problem_to_string(&problem))?,
            }
        }
        Command::Bench {
            n_values,
            d_values,
            reps,
            seed,
        } => {
            if reps < 3 {
                return Err(Failure::invalid("--reps must be at least 3"));
            }
            if n_values.iter().chain(&d_values).any(|&v| v == 0) {
                return Err(Failure::invalid("domain sizes and deadlines must be positive"));
            }
            let table = bench_scaling(&n_values, &d_values, reps, seed);
            let text = match format {
                Format::Text => table.to_text(),
                Format::Csv => table.to_csv(),
                Format::Json => format!("{}\n", serde_json::to_string(&table.cells).expect("bench cells serialize")),
            };
            emit(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

fn joined_ids_u64(values: &[u64]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn render_plan(problem: &PlanningProblem, plan: &BidPlan, trace: &[TraceStep], format: Format) -> String {
    let label_of = |id: BidId| {
        problem
            .domain()
            .get(id)
            .map(Bid::display_name)
            .unwrap_or_default()
    };
    let mut s = String::new();
    match format {
        Format::Text => {
            let _ = writeln!(
                s,
                "reservation value: {}  deadline: {}  bids: {}",
                problem.reservation_value(),
                problem.deadline(),
                problem.domain().len()
            );
            let _ = writeln!(s, "{:>4}  {:>6}  {:<16} {:>10}  {:>10}", "step", "bid", "label", "delta", "EU");
            for step in trace {
                let _ = writeln!(
                    s,
                    "{:>4}  {:>6}  {:<16} {:>10.6}  {:>10.6}",
                    step.step,
                    step.bid_id,
                    label_of(step.bid_id),
                    step.delta,
                    step.expected_utility
                );
            }
            let _ = writeln!(s, "plan:");
            if plan.is_empty() {
                let _ = writeln!(s, "  (empty: fall back on the reservation value)");
            }
            for (i, bid) in plan.sequence.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "  {}. {} (id {}, utility {}, acceptance {})",
                    i + 1,
                    bid.display_name(),
                    bid.id,
                    bid.utility,
                    bid.acceptance_probability
                );
            }
            let _ = writeln!(s, "expected utility: {:.6}", plan.expected_utility);
        }
        Format::Csv => {
            let _ = writeln!(s, "kind,index,bid_id,label,utility,acceptance_probability,delta,expected_utility");
            for (i, bid) in plan.sequence.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "plan,{},{},{},{},{},,",
                    i + 1,
                    bid.id,
                    csv_field(bid.label.as_deref().unwrap_or("")),
                    bid.utility,
                    bid.acceptance_probability
                );
            }
            for step in trace {
                let _ = writeln!(
                    s,
                    "step,{},{},{},,,{},{}",
                    step.step,
                    step.bid_id,
                    csv_field(&label_of(step.bid_id)),
                    step.delta,
                    step.expected_utility
                );
            }
            let _ = writeln!(s, "total,,,,,,,{}", plan.expected_utility);
        }
        Format::Json => {
            let value = json!({
                "reservation_value": problem.reservation_value(),
                "deadline": problem.deadline(),
                "plan": plan.sequence.iter().map(bid_json).collect::<Vec<_>>(),
                "trace": trace.iter().map(|t| json!({
                    "step": t.step,
                    "bid_id": t.bid_id,
                    "delta": t.delta,
                    "expected_utility": t.expected_utility,
                })).collect::<Vec<_>>(),
                "expected_utility": plan.expected_utility,
            });
            let _ = writeln!(s, "{value}");
        }
    }
    s
}
