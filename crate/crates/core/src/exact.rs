//! Doubling algorithm for the cone-constrained knapsack.
//!
//! Starting from `m = ceil(sqrt(n) / 2)`, the inner-set upper bound is solved
//! with `m` doubled each round until its optimal solution satisfies the cone
//! constraint; that solution is then optimal. The doubling stops at the
//! certificate [`m_star`], beyond which the inner set contains every integer
//! point of the ellipsoid.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::approx::Budget;
use crate::arith::isqrt;
use crate::decimal::Decimal;
use crate::error::{Error, Result};
use crate::model::{soc_feasible_scaled, SockpInstance};
use crate::rkpm::{upper_bound_with, BoundKind, BoundResult, RkpmOptions};
use crate::timing::Stopwatch;

/// Segment count above which the inner approximation is exact on integer
/// points: `ceil(omega / 2 * sqrt(n * sum sigma_j^2)) + 1`, evaluated on the
/// integer data at the smallest common scale. Saturates at `u64::MAX`.
pub fn m_star(inst: &SockpInstance, omega: &Decimal) -> Result<u64> {
    let scaled = inst.scaled()?;
    let sum_sq = scaled.sum_sq_sigmas(None)?;
    let w = omega.normalized().mantissa().unsigned_abs();
    let radicand = w
        .checked_mul(w)
        .and_then(|v| v.checked_mul(sum_sq))
        .and_then(|v| v.checked_mul(inst.n() as u128));
    let Some(radicand) = radicand else {
        return Ok(u64::MAX);
    };
    // Smallest k with 4 k^2 >= radicand.
    let mut root = isqrt(radicand);
    if root * root < radicand {
        root += 1;
    }
    let k = root.div_ceil(2);
    Ok(u64::try_from(k + 1).unwrap_or(u64::MAX))
}

/// Smallest positive `m` with `4 m^2 >= n`.
pub fn initial_m(n: usize) -> u64 {
    let n = n as u128;
    let mut m = isqrt(n).div_ceil(2).max(1);
    while 4 * m * m < n {
        m += 1;
    }
    while m > 1 && 4 * (m - 1) * (m - 1) >= n {
        m -= 1;
    }
    m as u64
}

/// One round of the doubling loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iteration {
    pub m: u64,
    pub objective: u64,
    pub feasible: bool,
    pub subproblems_solved: usize,
    pub subproblems: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactReport {
    pub result: BoundResult,
    pub iterations: Vec<Iteration>,
    /// Computed only once the loop starts doubling.
    pub m_star: Option<u64>,
}

impl ExactReport {
    /// Knapsacks solved over all rounds.
    pub fn knapsack_solves(&self) -> usize {
        self.iterations.iter().map(|it| it.subproblems_solved).sum()
    }
}

pub fn solve_exact(inst: &SockpInstance, omega: &Decimal) -> Result<ExactReport> {
    solve_exact_with(inst, omega, &RkpmOptions::default())
}

pub fn solve_exact_with(inst: &SockpInstance, omega: &Decimal, opts: &RkpmOptions) -> Result<ExactReport> {
    let clock = Stopwatch::start();
    let scaled = inst.scaled()?;
    let n = inst.n();
    let mut m = initial_m(n);

    let all = vec![true; n];
    if soc_feasible_scaled(&all, &scaled, omega)? {
        let objective = inst.profit_of(&all);
        return Ok(ExactReport {
            result: BoundResult {
                solution: all,
                objective,
                kind: BoundKind::Exact,
                m,
                delta: Budget::inner(opts.scheme, m),
                subproblems_solved: 0,
                subproblems_skipped: 0,
                subproblems_pruned: 0,
                wall_time: clock.elapsed(),
            },
            iterations: Vec::new(),
            m_star: None,
        });
    }

    let cap = m_star(inst, omega)?;
    let mut iterations = Vec::new();
    loop {
        m = m.saturating_mul(2).min(cap);
        let res = upper_bound_with(inst, omega, m, opts)?;
        let feasible = soc_feasible_scaled(&res.solution, &scaled, omega)?;
        iterations.push(Iteration {
            m,
            objective: res.objective,
            feasible,
            subproblems_solved: res.subproblems_solved,
            subproblems: res.subproblem_count(),
            wall_time: res.wall_time,
        });
        if feasible {
            let mut result = res;
            result.kind = BoundKind::Exact;
            result.subproblems_solved = iterations.iter().map(|it| it.subproblems_solved).sum();
            result.wall_time = clock.elapsed();
            return Ok(ExactReport {
                result,
                iterations,
                m_star: Some(cap),
            });
        }
        if m >= cap {
            return Err(Error::Invariant(alloc::format!(
                "inner-set optimum at m* = {cap} is not cone-feasible"
            )));
        }
    }
}
