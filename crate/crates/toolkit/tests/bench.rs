use sockp_toolkit::bench::{
    gap_pct, run_bounds_bench, run_exact_bench, run_scheme_comparison, write_csv, BenchConfig, SegmentSpec,
};
use sockp_toolkit::Family;

fn config() -> BenchConfig {
    let mut cfg = BenchConfig::new(vec![Family::SC, Family::ICR], vec![20], vec![0.9], vec![1, 2]);
    cfg.m_grid = vec![SegmentSpec::Fixed(2), SegmentSpec::Fixed(6)];
    cfg
}

#[test]
fn empty_grid_gives_empty_report() {
    let cfg = BenchConfig::new(vec![], vec![20], vec![0.9], vec![1]);
    let rep = run_bounds_bench(&cfg).unwrap();
    assert!(rep.rows.is_empty() && rep.summary.is_empty());
    let rep = run_exact_bench(&BenchConfig::new(vec![Family::SC], vec![20], vec![0.9], vec![])).unwrap();
    assert!(rep.rows.is_empty() && rep.summary.is_empty());
}

#[test]
fn bounds_rows_are_consistent() {
    let cfg = config();
    let rep = run_bounds_bench(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 2 * 2 * 2);
    assert_eq!(rep.summary.len(), 2 * 2);
    for row in &rep.rows {
        let (ub, lb) = (row.ub.unwrap(), row.lb.unwrap());
        assert!(lb <= ub);
        assert_eq!(row.gap_pct.unwrap(), gap_pct(ub, lb));
    }
    let again = run_bounds_bench(&cfg).unwrap();
    let strip = |r: &sockp_toolkit::bench::BoundsReport| {
        r.rows.iter().map(|x| (x.family.clone(), x.m, x.seed, x.ub, x.lb)).collect::<Vec<_>>()
    };
    assert_eq!(strip(&rep), strip(&again));

    let mut buf = Vec::new();
    write_csv(&rep.rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "family,n,rho,m,seed,ub,lb,gap_pct,time_ms");
    assert_eq!(text.lines().count(), rep.rows.len() + 1);
}

#[test]
fn exact_rows_match_bounds() {
    let cfg = config();
    let rep = run_exact_bench(&cfg).unwrap();
    let bounds = run_bounds_bench(&cfg).unwrap();
    for row in &rep.rows {
        for b in bounds.rows.iter().filter(|b| b.family == row.family && b.seed == row.seed) {
            assert!(b.lb.unwrap() <= row.objective && row.objective <= b.ub.unwrap());
        }
        assert!(row.iters == 0 || row.knap_solves > 0);
    }
    let mut buf = Vec::new();
    write_csv(&rep.rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "family,n,rho,seed,iters,m_final,knap_solves,time_ms,objective"
    );
}

#[test]
fn schemes_bound_the_same_problem() {
    let cfg = config();
    let rows = run_scheme_comparison(&cfg, &[SegmentSpec::Fixed(4)], &[SegmentSpec::Fixed(40)]).unwrap();
    let exact = run_exact_bench(&cfg).unwrap();
    for r in &rows {
        let opt = exact
            .rows
            .iter()
            .find(|e| e.family == r.family && e.seed == r.seed)
            .unwrap()
            .objective;
        assert!(r.ub >= opt, "{r:?}");
    }
}
