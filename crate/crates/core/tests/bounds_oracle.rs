mod common;

use common::{brute_force, instance, omega};
use proptest::prelude::*;
use sockp_core::exact::solve_exact;
use sockp_core::model::is_soc_feasible;
use sockp_core::rkpm::{lower_bound, upper_bound, BoundKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn sandwich_and_feasibility(inst in instance(10), w in omega()) {
        let opt = brute_force(&inst, &w);
        let mut previous_ub = u64::MAX;
        for m in [1u64, 2, 4, 8] {
            let ub = upper_bound(&inst, &w, m).unwrap();
            let lb = lower_bound(&inst, &w, m).unwrap();
            prop_assert_eq!(ub.kind, BoundKind::Upper);
            prop_assert_eq!(lb.kind, BoundKind::Lower);
            prop_assert!(lb.objective <= opt, "m={} lb={} opt={}", m, lb.objective, opt);
            prop_assert!(opt <= ub.objective, "m={} ub={} opt={}", m, ub.objective, opt);
            prop_assert!(is_soc_feasible(&lb.solution, &inst, &w));
            prop_assert_eq!(inst.profit_of(&ub.solution), ub.objective);
            prop_assert!(ub.objective <= previous_ub);
            previous_ub = ub.objective;
        }
    }

    #[test]
    fn doubling_algorithm_is_exact(inst in instance(12), w in omega()) {
        let rep = solve_exact(&inst, &w).unwrap();
        prop_assert_eq!(rep.result.objective, brute_force(&inst, &w));
        prop_assert!(is_soc_feasible(&rep.result.solution, &inst, &w));
        prop_assert_eq!(rep.result.kind, BoundKind::Exact);
        let ms: Vec<u64> = rep.iterations.iter().map(|it| it.m).collect();
        prop_assert!(ms.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(rep.iterations.last().is_none_or(|it| it.feasible));
        prop_assert_eq!(rep.knapsack_solves(), rep.result.subproblems_solved);
    }

    #[test]
    fn results_are_deterministic(inst in instance(10), w in omega()) {
        let a = upper_bound(&inst, &w, 3).unwrap();
        let b = upper_bound(&inst, &w, 3).unwrap();
        prop_assert_eq!(a.solution, b.solution);
        prop_assert_eq!(a.subproblems_solved, b.subproblems_solved);
    }
}
