use proptest::prelude::*;
use sockp_core::knapsack::{lp_bound, solve_knapsack, solve_knapsack_with, KnapsackSubproblem, SolverConfig};

fn enumerate(problem: &KnapsackSubproblem) -> u64 {
    let n = problem.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|j| mask >> j & 1 == 1).collect();
        if problem.admits(&x) {
            best = best.max(problem.value_of(&x));
        }
    }
    best
}

fn problem() -> impl Strategy<Value = KnapsackSubproblem> {
    (0usize..=20)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0u64..=100, n),
                prop::collection::vec(0i128..=1_000, n),
                -50i128..=5_000,
            )
        })
        .prop_map(|(p, w, c)| KnapsackSubproblem::new(p, w, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_enumeration(pr in problem()) {
        let out = solve_knapsack(&pr);
        if pr.capacity < 0 {
            prop_assert!(out.solution().is_none());
        } else {
            let sol = out.solution().unwrap();
            prop_assert_eq!(sol.value, enumerate(&pr));
            prop_assert!(pr.admits(&sol.selected));
            prop_assert_eq!(pr.value_of(&sol.selected), sol.value);
            for (j, &s) in sol.selected.iter().enumerate() {
                prop_assert!(!s || pr.weights[j] <= pr.capacity);
            }
            prop_assert!(lp_bound(&pr).unwrap() >= sol.value);
        }
    }

    #[test]
    fn branch_and_bound_is_exact(pr in problem()) {
        let bb = solve_knapsack_with(&pr, &SolverConfig { dp_state_cap: 0 });
        prop_assert_eq!(bb.value(), solve_knapsack(&pr).value());
    }

    #[test]
    fn value_is_permutation_invariant(pr in problem(), rot in 0usize..20) {
        let n = pr.len();
        let r = if n == 0 { 0 } else { rot % n };
        let mut p = pr.profits.clone();
        let mut w = pr.weights.clone();
        p.rotate_left(r);
        w.rotate_left(r);
        p.reverse();
        w.reverse();
        let permuted = KnapsackSubproblem::new(p, w, pr.capacity).unwrap();
        prop_assert_eq!(solve_knapsack(&permuted).value(), solve_knapsack(&pr).value());
    }
}

#[test]
fn large_weights_do_not_overflow() {
    let big = 10i128.pow(30);
    let pr = KnapsackSubproblem::new(vec![3, 5, 4], vec![big, 2 * big, big + 1], 2 * big + 1).unwrap();
    assert_eq!(solve_knapsack(&pr).value(), Some(7));
}

#[test]
fn many_items_with_large_profit_bound() {
    // Forces the branch-and-bound path on a realistic correlated instance.
    let n = 60;
    let w: Vec<i128> = (0..n).map(|j| 10 + (j * 37 % 90) as i128).collect();
    let p: Vec<u64> = w.iter().map(|&x| x as u64 * 1_000 + 10_000).collect();
    let cap: i128 = w.iter().sum::<i128>() / 2;
    let pr = KnapsackSubproblem::new(p, w, cap).unwrap();
    let dp = solve_knapsack(&pr);
    let bb = solve_knapsack_with(&pr, &SolverConfig { dp_state_cap: 1_000 });
    assert_eq!(dp.value(), bb.value());
    assert!(pr.admits(&bb.solution().unwrap().selected));
}
