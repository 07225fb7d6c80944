mod common;

use common::{instance, omega, selections};
use proptest::prelude::*;
use sockp_core::approx::{beta, build_segments, robust_feasible, Budget, Scheme, SegmentTable};
use sockp_core::rkpm::{solve_rkpm, ScaleMode, SubproblemFamily};
use sockp_core::{Decimal, SockpInstance};

/// Enumerates every vertex of the bounded continuous knapsack: a set `T` of
/// full segments plus at most one partial segment.
fn beta_by_vertices(x: &[bool], table: &SegmentTable, budget: Budget) -> f64 {
    let delta = budget.value();
    let live: Vec<_> = table.entries.iter().filter(|e| x[e.item]).collect();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << live.len()) {
        let (mut used, mut gain) = (0.0, 0.0);
        for (i, e) in live.iter().enumerate() {
            if mask >> i & 1 == 1 {
                used += e.f as f64;
                gain += e.d;
            }
        }
        if used > delta {
            continue;
        }
        best = best.max(gain);
        for (i, e) in live.iter().enumerate() {
            if mask >> i & 1 == 0 {
                let z = ((delta - used) / e.f as f64).min(1.0);
                best = best.max(gain + e.d * z);
            }
        }
    }
    best
}

fn union_holds(inst: &SockpInstance, w: &Decimal, m: u64, budget: Budget) -> Result<(), TestCaseError> {
    let table = build_segments(inst, w, m, Scheme::Horizontal).unwrap();
    let fam = SubproblemFamily::new(inst, w, m, budget, Scheme::Horizontal, ScaleMode::Exact).unwrap();
    let subs: Vec<_> = (0..fam.members().len()).map(|i| fam.subproblem(i).unwrap()).collect();
    let mut best = 0;
    for x in selections(inst.n()) {
        let robust = robust_feasible(&x, inst, &table, budget).unwrap();
        let in_union = subs.iter().any(|s| s.capacity >= 0 && s.admits(&x));
        prop_assert_eq!(robust, in_union, "x = {:?}, m = {}, quarters = {}", x, m, budget.quarters());
        if robust {
            best = best.max(inst.profit_of(&x));
        }
    }
    prop_assert_eq!(solve_rkpm(inst, w, m, budget).unwrap().objective, best);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn robust_set_is_union_of_knapsacks(inst in instance(9), w in omega(), m in 1u64..=6) {
        union_holds(&inst, &w, m, Budget::inner(Scheme::Horizontal, m))?;
        union_holds(&inst, &w, m, Budget::outer(inst.n(), m))?;
    }

    #[test]
    fn greedy_beta_matches_vertex_enumeration(inst in instance(4), w in omega(), m in 1u64..=3) {
        let table = build_segments(&inst, &w, m, Scheme::Horizontal).unwrap();
        for budget in [Budget::inner(Scheme::Horizontal, m), Budget::outer(inst.n(), m)] {
            for x in selections(inst.n()) {
                let g = beta(&x, &table, budget);
                let o = beta_by_vertices(&x, &table, budget);
                prop_assert!((g - o).abs() <= 1e-9 * (1.0 + o.abs()), "greedy {} oracle {}", g, o);
            }
        }
    }

    #[test]
    fn inner_and_outer_sets_bracket_the_ellipsoid(inst in instance(10), w in omega(), m in 1u64..=8) {
        let table = build_segments(&inst, &w, m, Scheme::Horizontal).unwrap();
        let wf = w.to_f64();
        for x in selections(inst.n()) {
            let exact = wf * x.iter().zip(&inst.sigmas).filter(|(&s, _)| s).map(|(_, s)| s.to_f64().powi(2)).sum::<f64>().sqrt();
            let tol = 1e-9 * (1.0 + exact);
            prop_assert!(beta(&x, &table, Budget::inner(Scheme::Horizontal, m)) <= exact + tol);
            prop_assert!(beta(&x, &table, Budget::outer(inst.n(), m)) >= exact - tol);
        }
    }

    #[test]
    fn refinement_tightens_inner_set(inst in instance(8), w in omega(), m in 1u64..=8) {
        let coarse = build_segments(&inst, &w, m, Scheme::Horizontal).unwrap();
        let fine = build_segments(&inst, &w, 2 * m, Scheme::Horizontal).unwrap();
        for x in selections(inst.n()) {
            let a = beta(&x, &coarse, Budget::inner(Scheme::Horizontal, m));
            let b = beta(&x, &fine, Budget::inner(Scheme::Horizontal, 2 * m));
            prop_assert!(b >= a - 1e-9 * (1.0 + a));
        }
    }

    #[test]
    fn modified_weights_dominate_means(inst in instance(10), w in omega(), m in 1u64..=6) {
        let fam = SubproblemFamily::new(&inst, &w, m, Budget::outer(inst.n(), m), Scheme::Horizontal, ScaleMode::Factor(1_000_000)).unwrap();
        for i in 0..fam.members().len() {
            let sub = fam.subproblem(i).unwrap();
            for (wj, a) in sub.weights.iter().zip(&inst.means) {
                prop_assert!(*wj >= a.mantissa_at(6).unwrap());
            }
        }
    }
}

fn d(s: &str) -> Decimal {
    s.parse().unwrap()
}

/// With the outer budget the last-ranked segment can be the only pivot that
/// certifies a point: here `x = {0, 1}` has its greedy pivot on item 0's
/// second segment, which ranks last.
#[test]
fn last_segment_pivot_is_required() {
    let n = 8;
    let mut sigmas = vec![d("1"), d("2")];
    sigmas.extend(std::iter::repeat_n(d("3"), n - 2));
    let inst = SockpInstance::new(vec![1; n], vec![d("1"); n], sigmas, d("7.4")).unwrap();
    let w = d("2");
    let m = 2;
    let budget = Budget::outer(n, m);
    let table = build_segments(&inst, &w, m, Scheme::Horizontal).unwrap();
    let last = table.entries.last().unwrap();
    assert_eq!((last.item, last.k), (0, 2));

    let mut x = vec![false; n];
    x[0] = true;
    x[1] = true;
    assert!((beta(&x, &table, budget) - 16.0 / 3.0).abs() < 1e-12);
    assert!(robust_feasible(&x, &inst, &table, budget).unwrap());

    let fam = SubproblemFamily::new(&inst, &w, m, budget, Scheme::Horizontal, ScaleMode::Exact).unwrap();
    let nm = n * m as usize;
    let mut certifying = Vec::new();
    for (i, member) in fam.members().iter().enumerate() {
        if fam.subproblem(i).unwrap().admits(&x) {
            certifying.push(member.label);
        }
    }
    assert_eq!(certifying, vec![nm]);
}

#[test]
fn vertical_scheme_is_coarser_than_horizontal() {
    use sockp_core::rkpm::{upper_bound_with, RkpmOptions};
    let inst = SockpInstance::new(
        vec![30, 42, 25, 37, 51, 20],
        vec![d("20"), d("32"), d("15"), d("27"), d("41"), d("10")],
        vec![d("1.5"), d("2.4"), d("1.1"), d("2.0"), d("3.3"), d("0.9")],
        d("72"),
    )
    .unwrap();
    let w = d("4.358898");
    for m in [1u64, 2, 4, 8] {
        let h = upper_bound_with(&inst, &w, m, &RkpmOptions::default()).unwrap();
        let v = upper_bound_with(
            &inst,
            &w,
            m,
            &RkpmOptions {
                scheme: Scheme::Vertical,
                ..RkpmOptions::default()
            },
        )
        .unwrap();
        assert!(v.objective >= h.objective, "m = {m}");
    }
}
