use proptest::prelude::*;

use rvplan::domain::{validate_domain, Bid, BidId, PlanningProblem};
use rvplan::evaluator::{evaluate_with_report, expected_utility, insertion_position, marginal_improvement};
use rvplan::generators::{random_problem, Correlation, RvMode};
use rvplan::io::{parse_problem_str, problem_to_string};
use rvplan::oracle::{best_sorted_subset_value, plan_bruteforce, summed_expected_utility, Guards};
use rvplan::planner::{filter_dominated, run_greedy, PlannerOptions};
use rvplan::simulator::simulate;

const TOL: f64 = 1e-12;

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => 0.0..=1.0f64,
        1 => Just(0.0),
        1 => Just(1.0),
    ]
}

fn bids(max: usize) -> impl Strategy<Value = Vec<Bid>> {
    prop::collection::vec((unit(), unit()), 0..=max).prop_map(|pairs| {
        pairs
            .into_iter()
            .enumerate()
            .map(|(i, (u, a))| Bid::new(i as BidId, u, a))
            .collect()
    })
}

fn sorted(mut bids: Vec<Bid>) -> Vec<Bid> {
    bids.sort_by(|x, y| y.utility.total_cmp(&x.utility));
    bids
}

fn problem_strategy() -> impl Strategy<Value = PlanningProblem> {
    (1usize..=8, 1usize..=5, 0u64..u64::MAX, any::<bool>(), 0u32..10).prop_map(
        |(n, deadline, seed, inverse, tenth)| {
            let correlation = if inverse { Correlation::Inverse } else { Correlation::Independent };
            random_problem(n, RvMode::Fixed(tenth as f64 / 10.0), deadline, seed, correlation).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn recurrence_matches_summation(plan in bids(12), rv in unit()) {
        let refs: Vec<&Bid> = plan.iter().collect();
        let direct = summed_expected_utility(&refs, rv);
        prop_assert!((expected_utility(&plan, rv) - direct).abs() <= TOL);
    }

    #[test]
    fn report_is_consistent(plan in bids(10), rv in unit()) {
        let report = evaluate_with_report(&plan, rv);
        prop_assert_eq!(report.survival_prefix.len(), plan.len());
        prop_assert_eq!(report.suffix_value.len(), plan.len() + 1);
        prop_assert_eq!(report.expected_utility, report.suffix_value[0]);
        prop_assert_eq!(*report.suffix_value.last().unwrap(), rv);
        prop_assert_eq!(report.expected_utility, expected_utility(&plan, rv));
        let mut prev = 1.0;
        for &s in &report.survival_prefix {
            prop_assert!((0.0..=1.0).contains(&s) && s <= prev);
            prev = s;
        }
    }

    #[test]
    fn swapping_equal_utilities_keeps_value(plan in bids(8), rv in unit(), at in 0usize..8) {
        prop_assume!(plan.len() >= 2);
        let at = at % (plan.len() - 1);
        let mut tied = plan.clone();
        tied[at + 1].utility = tied[at].utility;
        let mut swapped = tied.clone();
        swapped.swap(at, at + 1);
        prop_assert!((expected_utility(&tied, rv) - expected_utility(&swapped, rv)).abs() <= TOL);
    }

    #[test]
    fn marginal_improvement_is_the_value_difference(
        plan in bids(8),
        extra in (unit(), unit()),
        tie_with in prop::option::of(0usize..8),
        rv in unit(),
    ) {
        let plan = sorted(plan);
        let mut candidate = Bid::new(100, extra.0, extra.1);
        if let (Some(i), false) = (tie_with, plan.is_empty()) {
            candidate.utility = plan[i % plan.len()].utility;
        }
        let report = evaluate_with_report(&plan, rv);
        let ins = marginal_improvement(&plan, &candidate, &report).unwrap();
        prop_assert_eq!(ins.position, insertion_position(&plan, candidate.utility));
        let mut inserted = plan.clone();
        inserted.insert(ins.position, candidate);
        let diff = expected_utility(&inserted, rv) - expected_utility(&plan, rv);
        prop_assert!((ins.delta - diff).abs() <= TOL, "delta {} vs {}", ins.delta, diff);
    }

    #[test]
    fn value_is_monotone_in_rv(plan in bids(8), rv in unit(), bump in 0.0..=1.0f64) {
        let higher = rv + (1.0 - rv) * bump;
        prop_assert!(expected_utility(&plan, higher) >= expected_utility(&plan, rv) - TOL);
    }

    #[test]
    fn planner_matches_oracle(problem in problem_strategy()) {
        let oracle = plan_bruteforce(&problem, Guards::default()).unwrap();
        let plan = run_greedy(&problem, PlannerOptions::default()).plan;
        prop_assert!((plan.expected_utility - oracle.expected_utility).abs() <= 1e-9);
        let sorted_best = best_sorted_subset_value(&problem, Guards::default()).unwrap();
        prop_assert!((sorted_best - oracle.expected_utility).abs() <= TOL);
    }

    #[test]
    fn plan_invariants(problem in problem_strategy()) {
        let rv = problem.reservation_value();
        let outcome = run_greedy(&problem, PlannerOptions::default());
        let plan = &outcome.plan;
        prop_assert!(plan.is_sorted_by_utility());
        prop_assert!(plan.len() <= problem.deadline().min(problem.domain().len()));
        prop_assert!(plan.sequence.iter().all(|b| b.utility > rv));
        let mut ids = plan.ids();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), plan.len());
        prop_assert!(plan.expected_utility >= rv);
        prop_assert!((plan.expected_utility - expected_utility(&plan.sequence, rv)).abs() <= TOL);

        let pool = filter_dominated(problem.domain(), rv);
        if !pool.is_empty() {
            let best_single = pool
                .iter()
                .map(|b| b.acceptance_probability * b.utility + (1.0 - b.acceptance_probability) * rv)
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(plan.expected_utility >= best_single - TOL);
        }

        let mut last = rv;
        for step in &outcome.trace {
            prop_assert!(step.delta > 0.0);
            prop_assert!(step.expected_utility >= last - TOL);
            last = step.expected_utility;
        }
        if let Some(step) = outcome.trace.last() {
            prop_assert_eq!(step.expected_utility, plan.expected_utility);
        }
    }

    #[test]
    fn greedy_prefix_property(problem in problem_strategy()) {
        let trace = run_greedy(&problem, PlannerOptions::default()).trace;
        for m in 1..=trace.len() {
            let shorter = run_greedy(&problem.with_deadline(m).unwrap(), PlannerOptions::default()).plan;
            let mut expected: Vec<Bid> = trace[..m]
                .iter()
                .map(|s| problem.domain().get(s.bid_id).unwrap().clone())
                .collect();
            // Stable sort keeps selection order among equal utilities.
            expected.sort_by(|x, y| y.utility.total_cmp(&x.utility));
            prop_assert_eq!(shorter.sequence, expected);
        }
    }

    #[test]
    fn paths_and_parallel_scans_agree(n in 1usize..60, deadline in 1usize..30, seed: u64, rv in 0u32..10) {
        let problem = random_problem(n, RvMode::Fixed(rv as f64 / 10.0), deadline, seed, Correlation::Independent).unwrap();
        let reference = run_greedy(&problem, PlannerOptions::incremental());
        prop_assert_eq!(&run_greedy(&problem, PlannerOptions::naive()), &reference);
        prop_assert_eq!(&run_greedy(&problem, PlannerOptions::naive().parallel()), &reference);
        prop_assert_eq!(&run_greedy(&problem, PlannerOptions::incremental().parallel()), &reference);
    }

    #[test]
    fn deadline_and_rv_monotonicity(problem in problem_strategy(), bump in 0.0..=1.0f64) {
        let eu = run_greedy(&problem, PlannerOptions::default()).plan.expected_utility;
        let longer = run_greedy(&problem.with_deadline(problem.deadline() + 1).unwrap(), PlannerOptions::default());
        prop_assert!(longer.plan.expected_utility >= eu - TOL);
        let rv = problem.reservation_value();
        let raised = problem.with_reservation_value(rv + (1.0 - rv) * bump).unwrap();
        prop_assert!(run_greedy(&raised, PlannerOptions::default()).plan.expected_utility >= eu - TOL);
    }

    #[test]
    fn generated_problems_validate_and_round_trip(
        n in 1usize..40, deadline in 1usize..10, seed: u64, inverse: bool, uniform: bool,
    ) {
        let correlation = if inverse { Correlation::Inverse } else { Correlation::Independent };
        let mode = if uniform { RvMode::Uniform } else { RvMode::Fixed(0.25) };
        let problem = random_problem(n, mode, deadline, seed, correlation).unwrap();
        prop_assert!(validate_domain(problem.domain().bids().to_vec()).is_ok());
        prop_assert_eq!(parse_problem_str(&problem_to_string(&problem)).unwrap(), problem);
    }

    #[test]
    fn handwritten_decimals_round_trip(values in prop::collection::vec((0u64..=10u64.pow(15), 0u64..=10u64.pow(15)), 1..6)) {
        // Decimal inputs with at most 15 significant digits.
        let bids: Vec<Bid> = values
            .iter()
            .enumerate()
            .map(|(i, &(u, a))| Bid::new(i as BidId, u as f64 / 1e15, a as f64 / 1e15))
            .collect();
        let problem = PlanningProblem::new(validate_domain(bids).unwrap(), 0.5, 2).unwrap();
        let back = parse_problem_str(&problem_to_string(&problem)).unwrap();
        for (x, y) in back.domain().bids().iter().zip(problem.domain().bids()) {
            prop_assert_eq!(x.utility.to_bits(), y.utility.to_bits());
            prop_assert_eq!(x.acceptance_probability.to_bits(), y.acceptance_probability.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simulation_is_reproducible_across_pools(plan in bids(6), rv in unit(), seed: u64, trials in 1u64..5000) {
        let a = simulate(&plan, rv, trials, seed);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = single.install(|| simulate(&plan, rv, trials, seed));
        let c = quad.install(|| simulate(&plan, rv, trials, seed));
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
        prop_assert!((0.0..=1.0).contains(&a.mean_utility));
        prop_assert!(a.std_error >= 0.0);
        let agreed: u64 = a.acceptance_counts.iter().sum();
        prop_assert_eq!(agreed as f64 / trials as f64, a.agreement_rate);
        prop_assert!((a.agreement_rate * trials as f64 - agreed as f64).abs() < 1e-6);
    }
}

#[test]
fn simulation_converges_over_seeds() {
    let plan = vec![Bid::new(1, 0.9, 0.2), Bid::new(0, 0.5, 0.4), Bid::new(2, 0.3, 0.9)];
    let eu = expected_utility(&plan, 0.2);
    let no_deal: f64 = plan.iter().map(|b| 1.0 - b.acceptance_probability).product();
    let agree_p = 1.0 - no_deal;
    let mut mean_ok = 0;
    let mut rate_ok = 0;
    for seed in 0..100 {
        let r = simulate(&plan, 0.2, 10_000, seed);
        mean_ok += usize::from((r.mean_utility - eu).abs() <= 4.0 * r.std_error);
        let rate_se = (agree_p * (1.0 - agree_p) / r.trials as f64).sqrt();
        rate_ok += usize::from((r.agreement_rate - agree_p).abs() <= 4.0 * rate_se);
    }
    assert!(mean_ok >= 99, "{mean_ok}/100");
    assert!(rate_ok >= 99, "{rate_ok}/100");
}

#[test]
fn sorted_order_dominates_all_permutations() {
    use rvplan::oracle::verify_sorted_dominance;
    for seed in 0..300 {
        let p = random_problem(1 + seed as usize % 6, RvMode::Uniform, 1, seed, Correlation::Inverse).unwrap();
        assert!(verify_sorted_dominance(p.domain().bids(), p.reservation_value()).unwrap());
    }
}
