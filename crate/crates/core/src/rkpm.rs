//! The robust knapsack over a polyhedral inner or outer set, solved exactly as
//! a union of ordinary knapsacks.
//!
//! By LP duality, `beta(x, delta)` is the minimum over the segment ratios
//! `r_l = d_l / f_l` (and `r = 0` for the dummy element) of
//!
//! ```text
//! r_l * delta + sum_{l' : r_l' > r_l, x_{j(l')} = 1} (d_l' - r_l f_l')
//! ```
//!
//! so `a'x + beta(x, delta) <= b` holds iff `x` fits one of the knapsacks
//!
//! ```text
//! B_l = { x : sum_j (a_j + sum_{l' > l, j(l') = j} (d_l' - r_l f_l')) x_j <= b - r_l delta }.
//! ```
//!
//! Only pivots at or after the first position whose prefix budget reaches
//! `delta` are needed. Pivots with equal ratio give identical knapsacks and
//! are solved once.
//!
//! With the horizontal scheme and [`ScaleMode::Exact`] every knapsack is
//! multiplied through by its common denominator, so each `B_l` is represented
//! without rounding.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::approx::{build_from_scaled, Budget, Scheme, SegmentTable};
#[cfg(test)]
use crate::arith::div_ceil;
use crate::arith::pow10;
use crate::decimal::Decimal;
use crate::error::{Error, Result};
use crate::knapsack::{lp_bound, scale_to_integers, solve_at_least, KnapsackSubproblem, SolverConfig};
use crate::model::{is_soc_feasible, ScaledInstance, SockpInstance};
use crate::timing::Stopwatch;

/// Multiplier used when subproblem data are rounded to integers.
pub const DEFAULT_SCALE_FACTOR: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Upper,
    Lower,
    Exact,
}

/// How subproblem weights and capacities become integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleMode {
    /// Common denominator, no rounding. Horizontal scheme only; the vertical
    /// scheme falls back to `Factor(DEFAULT_SCALE_FACTOR)`.
    Exact,
    /// Multiply by the factor, round weights up and the capacity down.
    Factor(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RkpmOptions {
    pub scheme: Scheme,
    pub scale: ScaleMode,
    pub solver: SolverConfig,
    /// Evaluate subproblem bounds on the rayon pool (needs `std`).
    pub parallel: bool,
}

impl Default for RkpmOptions {
    fn default() -> Self {
        RkpmOptions {
            scheme: Scheme::Horizontal,
            scale: ScaleMode::Exact,
            solver: SolverConfig::default(),
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundResult {
    pub solution: Vec<bool>,
    pub objective: u64,
    pub kind: BoundKind,
    pub m: u64,
    pub delta: Budget,
    /// Knapsacks actually solved.
    pub subproblems_solved: usize,
    /// Knapsacks with negative capacity (empty feasible set).
    pub subproblems_skipped: usize,
    /// Knapsacks discarded because their LP bound could not beat the incumbent.
    pub subproblems_pruned: usize,
    pub wall_time: Duration,
}

impl BoundResult {
    pub fn subproblem_count(&self) -> usize {
        self.subproblems_solved + self.subproblems_skipped + self.subproblems_pruned
    }
}

/// Pivot of one member of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pivot {
    /// Position in the sorted segment table (0-based).
    Segment(usize),
    Dummy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Member {
    /// 1-based rank `l`; the dummy is `nm + 1`.
    pub label: usize,
    pub pivot: Pivot,
}

/// The ordinary knapsacks whose feasible sets union to the robust one.
pub struct SubproblemFamily<'a> {
    inst: &'a SockpInstance,
    scaled: ScaledInstance,
    table: SegmentTable,
    budget: Budget,
    scale: ScaleMode,
    omega: Decimal,
    members: Vec<Member>,
    /// `group_start[p]`: first position with the same ratio as `p`.
    group_start: Vec<usize>,
    /// Positions of each item's segments, ascending.
    item_positions: Vec<Vec<usize>>,
    /// Running sums of `d` and `f` along `item_positions`.
    item_prefix_d: Vec<Vec<f64>>,
    item_prefix_f: Vec<Vec<u128>>,
}

impl<'a> SubproblemFamily<'a> {
    pub fn new(
        inst: &'a SockpInstance,
        omega: &Decimal,
        m: u64,
        budget: Budget,
        scheme: Scheme,
        scale: ScaleMode,
    ) -> Result<Self> {
        inst.validate()?;
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if omega.is_negative() || omega.is_zero() {
            return Err(Error::InvalidParameter("omega must be positive".into()));
        }
        let scale = match (scheme, scale) {
            (Scheme::Vertical, ScaleMode::Exact) => ScaleMode::Factor(DEFAULT_SCALE_FACTOR),
            (_, s) => s,
        };
        let scaled = inst.scaled()?;
        let table = build_from_scaled(inst, &scaled, omega, m, scheme)?;
        let len = table.len();

        let mut group_start = vec![0usize; len];
        for p in 1..len {
            group_start[p] = if table.ratio_cmp(&table.entries[p], &table.entries[p - 1]).is_eq() {
                group_start[p - 1]
            } else {
                p
            };
        }

        let n = inst.n();
        let mut item_positions = vec![Vec::with_capacity(m as usize); n];
        for (p, e) in table.entries.iter().enumerate() {
            item_positions[e.item].push(p);
        }
        let mut item_prefix_d = Vec::with_capacity(n);
        let mut item_prefix_f = Vec::with_capacity(n);
        for positions in &item_positions {
            let mut pd = Vec::with_capacity(positions.len() + 1);
            let mut pf = Vec::with_capacity(positions.len() + 1);
            pd.push(0.0);
            pf.push(0u128);
            for &p in positions {
                let e = &table.entries[p];
                pd.push(pd.last().unwrap() + e.d);
                pf.push(pf.last().unwrap() + e.f as u128);
            }
            item_prefix_d.push(pd);
            item_prefix_f.push(pf);
        }

        let mut members = Vec::new();
        let mut zero_ratio_pivot = false;
        if let Some(first) = table.first_budget_position(budget) {
            for p in first..len {
                if p != first && group_start[p] != p {
                    continue;
                }
                if table.sigma_int[table.entries[p].item] == 0 {
                    zero_ratio_pivot = true;
                }
                members.push(Member {
                    label: p + 1,
                    pivot: Pivot::Segment(p),
                });
            }
        }
        // A pivot of ratio zero gives the same knapsack as the dummy.
        if !zero_ratio_pivot {
            members.push(Member {
                label: len + 1,
                pivot: Pivot::Dummy,
            });
        }

        Ok(SubproblemFamily {
            inst,
            scaled,
            table,
            budget,
            scale,
            omega: omega.normalized(),
            members,
            group_start,
            item_positions,
            item_prefix_d,
            item_prefix_f,
        })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn table(&self) -> &SegmentTable {
        &self.table
    }

    /// Number of segments of item `j` ranked strictly before the pivot group.
    fn counts_before(&self, pivot: Pivot) -> Vec<usize> {
        match pivot {
            // Every segment of an item with positive sigma has a positive ratio.
            Pivot::Dummy => self
                .item_positions
                .iter()
                .zip(&self.table.sigma_int)
                .map(|(ps, &s)| if s > 0 { ps.len() } else { 0 })
                .collect(),
            Pivot::Segment(p) => {
                let gs = self.group_start[p];
                self.item_positions.iter().map(|ps| ps.partition_point(|&q| q < gs)).collect()
            }
        }
    }

    /// The knapsack for member `index` of [`Self::members`].
    pub fn subproblem(&self, index: usize) -> Result<KnapsackSubproblem> {
        let member = self.members[index];
        let counts = self.counts_before(member.pivot);
        let (weights, capacity) = match (self.table.scheme, self.scale) {
            (Scheme::Horizontal, ScaleMode::Exact) => self.exact_horizontal(member.pivot, &counts)?,
            (_, ScaleMode::Factor(factor)) => self.rounded(member.pivot, &counts, factor)?,
            (Scheme::Vertical, ScaleMode::Exact) => unreachable!("normalised in new"),
        };
        Ok(KnapsackSubproblem::new(self.inst.profits.clone(), weights, capacity)?.with_label(member.label))
    }

    fn exact_horizontal(&self, pivot: Pivot, counts: &[usize]) -> Result<(Vec<i128>, i128)> {
        let ovf = || Error::Overflow("subproblem weights");
        let s = &self.scaled;
        let w = self.omega.mantissa();
        let ten_t = pow10(self.omega.scale()).ok_or_else(ovf)?;
        match pivot {
            Pivot::Dummy => {
                // a_j + omega sigma_j, capacity b; times 10^(s+t)
                let weights = s
                    .means
                    .iter()
                    .zip(&s.sigmas)
                    .zip(counts)
                    .map(|((&a, &sg), &k)| {
                        let disp = if k > 0 { w.checked_mul(sg).ok_or_else(ovf)? } else { 0 };
                        a.checked_mul(ten_t).and_then(|v| v.checked_add(disp)).ok_or_else(ovf)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let cap = s.capacity.checked_mul(ten_t).ok_or_else(ovf)?;
                Ok((weights, cap))
            }
            Pivot::Segment(p) => {
                let e = self.table.entries[p];
                let fp = e.f as i128;
                let sp = s.sigmas[e.item];
                let m = self.table.m as i128;
                // Everything times 4 m f_p 10^(s+t).
                let base = ten_t
                    .checked_mul(m)
                    .and_then(|v| v.checked_mul(fp))
                    .and_then(|v| v.checked_mul(4))
                    .ok_or_else(ovf)?;
                let weights = s
                    .means
                    .iter()
                    .zip(&s.sigmas)
                    .zip(counts)
                    .map(|((&a, &sg), &k)| {
                        let k = k as i128;
                        let gain = k
                            .checked_mul(sg)
                            .and_then(|v| v.checked_mul(fp))
                            .and_then(|v| v.checked_sub(sp.checked_mul(k.checked_mul(k)?)?))
                            .and_then(|v| v.checked_mul(w))
                            .and_then(|v| v.checked_mul(4))
                            .ok_or_else(ovf)?;
                        debug_assert!(gain >= 0);
                        a.checked_mul(base).and_then(|v| v.checked_add(gain)).ok_or_else(ovf)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let shift = w
                    .checked_mul(sp)
                    .and_then(|v| v.checked_mul(self.budget.quarters() as i128))
                    .ok_or_else(ovf)?;
                let cap = s
                    .capacity
                    .checked_mul(base)
                    .and_then(|v| v.checked_sub(shift))
                    .ok_or_else(ovf)?;
                Ok((weights, cap))
            }
        }
    }

    fn rounded(&self, pivot: Pivot, counts: &[usize], factor: u64) -> Result<(Vec<i128>, i128)> {
        let ratio = match pivot {
            Pivot::Dummy => 0.0,
            Pivot::Segment(p) => {
                let e = self.table.entries[p];
                e.d / e.f as f64
            }
        };
        let weights: Vec<f64> = (0..self.inst.n())
            .map(|j| {
                let k = counts[j];
                let extra = self.item_prefix_d[j][k] - ratio * self.item_prefix_f[j][k] as f64;
                self.inst.means[j].to_f64() + extra.max(0.0)
            })
            .collect();
        let cap = self.inst.capacity.to_f64() - ratio * self.budget.value();
        scale_to_integers(&weights, cap, factor)
    }
}

/// `ceil(sigma_j f_p / sigma_p) / 2`, capped at `m`: the number of segments
/// of item `j` whose ratio strictly exceeds the pivot's.
#[cfg(test)]
fn horizontal_count(sigma_j: i128, sigma_p: i128, f_p: i128, m: u64) -> u64 {
    if sigma_p == 0 {
        return if sigma_j > 0 { m } else { 0 };
    }
    let c = div_ceil(sigma_j * f_p, sigma_p) / 2;
    (c as u64).min(m)
}

/// Solves the robust knapsack with budget `delta` and default options.
pub fn solve_rkpm(inst: &SockpInstance, omega: &Decimal, m: u64, budget: Budget) -> Result<BoundResult> {
    solve_rkpm_with(inst, omega, m, budget, &RkpmOptions::default())
}

pub fn solve_rkpm_with(
    inst: &SockpInstance,
    omega: &Decimal,
    m: u64,
    budget: Budget,
    opts: &RkpmOptions,
) -> Result<BoundResult> {
    let clock = Stopwatch::start();
    let inner = Budget::inner(opts.scheme, m);
    let kind = if budget <= inner {
        BoundKind::Upper
    } else if opts.scheme == Scheme::Horizontal && budget >= Budget::outer(inst.n(), m) {
        BoundKind::Lower
    } else {
        return Err(Error::InvalidParameter(format!(
            "budget {} is neither an inner nor an outer budget for m = {m}",
            budget.value()
        )));
    };
    let family = SubproblemFamily::new(inst, omega, m, budget, opts.scheme, opts.scale)?;
    let members = family.members();

    let bound_of = |i: usize| -> Result<Option<u64>> { Ok(lp_bound(&family.subproblem(i)?)) };
    #[cfg(feature = "std")]
    let bounds: Vec<Option<u64>> = if opts.parallel {
        use rayon::prelude::*;
        (0..members.len()).into_par_iter().map(bound_of).collect::<Result<_>>()?
    } else {
        (0..members.len()).map(bound_of).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "std"))]
    let bounds: Vec<Option<u64>> = (0..members.len()).map(bound_of).collect::<Result<_>>()?;

    let mut skipped = 0;
    let mut order: Vec<(u64, usize)> = Vec::with_capacity(members.len());
    for (i, b) in bounds.iter().enumerate() {
        match b {
            Some(b) => order.push((*b, i)),
            None => skipped += 1,
        }
    }
    // Highest bound first; members are already in label order.
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut best: Option<(u64, usize, Vec<bool>)> = None;
    let mut solved = 0;
    let mut pruned = 0;
    for (rank, &(bound, i)) in order.iter().enumerate() {
        let label = members[i].label;
        let floor = match &best {
            None => 0,
            Some((v, l, _)) => {
                if bound < *v {
                    pruned += order.len() - rank;
                    break;
                }
                if label > *l {
                    if bound == *v {
                        pruned += 1;
                        continue;
                    }
                    v + 1
                } else {
                    *v
                }
            }
        };
        let sub = family.subproblem(i)?;
        solved += 1;
        if let Some(sol) = solve_at_least(&sub, floor, &opts.solver) {
            best = Some((sol.value, label, sol.selected));
        }
    }

    let (objective, _, solution) = best.ok_or_else(|| Error::Invariant("every subproblem is empty".into()))?;
    if inst.profit_of(&solution) != objective {
        return Err(Error::Invariant("objective differs from the profit of the solution".into()));
    }
    Ok(BoundResult {
        solution,
        objective,
        kind,
        m,
        delta: budget,
        subproblems_solved: solved,
        subproblems_skipped: skipped,
        subproblems_pruned: pruned,
        wall_time: clock.elapsed(),
    })
}

/// Upper bound from the inner set (`delta = m^2`).
pub fn upper_bound(inst: &SockpInstance, omega: &Decimal, m: u64) -> Result<BoundResult> {
    upper_bound_with(inst, omega, m, &RkpmOptions::default())
}

pub fn upper_bound_with(inst: &SockpInstance, omega: &Decimal, m: u64, opts: &RkpmOptions) -> Result<BoundResult> {
    solve_rkpm_with(inst, omega, m, Budget::inner(opts.scheme, m), opts)
}

/// Feasible solution from the outer set (`delta = m^2 + n/4`).
pub fn lower_bound(inst: &SockpInstance, omega: &Decimal, m: u64) -> Result<BoundResult> {
    lower_bound_with(inst, omega, m, &RkpmOptions::default())
}

pub fn lower_bound_with(inst: &SockpInstance, omega: &Decimal, m: u64, opts: &RkpmOptions) -> Result<BoundResult> {
    if opts.scheme != Scheme::Horizontal {
        return Err(Error::InvalidParameter("lower bounds need the horizontal scheme".into()));
    }
    let res = solve_rkpm_with(inst, omega, m, Budget::outer(inst.n(), m), opts)?;
    if !is_soc_feasible(&res.solution, inst, omega) {
        return Err(Error::Invariant(format!("lower-bound solution at m = {m} violates the cone constraint")));
    }
    Ok(res)
}
