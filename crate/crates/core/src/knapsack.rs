//! Exact solver for the ordinary 0/1 knapsack problem.
//!
//! Profits are nonnegative integers; weights and capacity are integers of
//! arbitrary (i128) magnitude, typically produced by scaling rational data
//! to a common denominator. Because profits are small, the main engine is a
//! dynamic program over profits: a Pareto list of `(profit, weight)` states,
//! at most one per profit value, so the list never exceeds `U + 1` entries
//! where `U` is the Dantzig (LP) bound. States whose LP completion cannot
//! reach the incumbent are fathomed. When `U` exceeds the configured state
//! ceiling the solver uses depth-first branch-and-bound with the same bound.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::arith::{cmp_products, div_floor};
use crate::error::{Error, Result};

/// Default ceiling on the number of DP states (the LP bound `U`).
pub const DEFAULT_DP_STATE_CAP: u64 = 10_000_000;

/// One ordinary knapsack instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackSubproblem {
    pub profits: Vec<u64>,
    pub weights: Vec<i128>,
    pub capacity: i128,
    /// Pivot index of the robust family that produced this problem, if any.
    pub origin_label: Option<usize>,
}

impl KnapsackSubproblem {
    pub fn new(profits: Vec<u64>, weights: Vec<i128>, capacity: i128) -> Result<Self> {
        if profits.len() != weights.len() {
            return Err(Error::InvalidInstance(alloc::format!(
                "{} profits but {} weights",
                profits.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0) {
            return Err(Error::InvalidInstance("negative knapsack weight".into()));
        }
        profits
            .iter()
            .try_fold(0u64, |acc, &p| acc.checked_add(p))
            .ok_or(Error::Overflow("profit sum"))?;
        Ok(KnapsackSubproblem {
            profits,
            weights,
            capacity,
            origin_label: None,
        })
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.origin_label = Some(label);
        self
    }

    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }

    /// Whether `selected` fits in the capacity.
    pub fn admits(&self, selected: &[bool]) -> bool {
        let mut load: i128 = 0;
        for (w, &s) in self.weights.iter().zip(selected) {
            if s {
                load = match load.checked_add(*w) {
                    Some(v) => v,
                    None => return false,
                };
            }
        }
        load <= self.capacity
    }

    pub fn value_of(&self, selected: &[bool]) -> u64 {
        self.profits
            .iter()
            .zip(selected)
            .filter(|(_, &s)| s)
            .map(|(p, _)| *p)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackSolution {
    pub selected: Vec<bool>,
    pub value: u64,
}

impl KnapsackSolution {
    pub fn empty(n: usize) -> Self {
        KnapsackSolution {
            selected: vec![false; n],
            value: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KnapsackOutcome {
    Optimal(KnapsackSolution),
    /// Negative capacity: not even the empty selection is feasible.
    Infeasible,
}

impl KnapsackOutcome {
    pub fn solution(&self) -> Option<&KnapsackSolution> {
        match self {
            KnapsackOutcome::Optimal(s) => Some(s),
            KnapsackOutcome::Infeasible => None,
        }
    }

    pub fn value(&self) -> Option<u64> {
        self.solution().map(|s| s.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Above this LP bound the profit DP is not attempted.
    pub dp_state_cap: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dp_state_cap: DEFAULT_DP_STATE_CAP,
        }
    }
}

/// Conservative integerisation of real data: weights rounded up, capacity
/// rounded down, after multiplying by `factor`.
pub fn scale_to_integers(weights: &[f64], capacity: f64, factor: u64) -> Result<(Vec<i128>, i128)> {
    if factor == 0 {
        return Err(Error::InvalidParameter("scale factor must be at least 1".into()));
    }
    const LIMIT: f64 = 1.0e36;
    let f = factor as f64;
    let mut scaled = Vec::with_capacity(weights.len());
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidParameter(alloc::format!("weight {w} is not a nonnegative real")));
        }
        let v = libm::ceil(w * f);
        if v >= LIMIT {
            return Err(Error::Overflow("weight scaling"));
        }
        scaled.push(v as i128);
    }
    if !capacity.is_finite() {
        return Err(Error::InvalidParameter("capacity is not finite".into()));
    }
    let c = libm::floor(capacity * f);
    if c.abs() >= LIMIT {
        return Err(Error::Overflow("capacity scaling"));
    }
    Ok((scaled, c as i128))
}

/// Optimal solution with the default configuration.
pub fn solve_knapsack(problem: &KnapsackSubproblem) -> KnapsackOutcome {
    solve_knapsack_with(problem, &SolverConfig::default())
}

pub fn solve_knapsack_with(problem: &KnapsackSubproblem, config: &SolverConfig) -> KnapsackOutcome {
    match Prepared::new(problem) {
        None => KnapsackOutcome::Infeasible,
        Some(prep) => {
            let sol = prep
                .solve(0, config)
                .expect("a floor of zero is always reachable by the empty selection");
            KnapsackOutcome::Optimal(sol)
        }
    }
}

/// Best solution with value at least `floor`, or `None` if the optimum is
/// below `floor` (or the capacity is negative).
pub fn solve_at_least(problem: &KnapsackSubproblem, floor: u64, config: &SolverConfig) -> Option<KnapsackSolution> {
    Prepared::new(problem)?.solve(floor, config)
}

/// Floor of the LP relaxation optimum (Dantzig bound); `None` when the
/// capacity is negative.
pub fn lp_bound(problem: &KnapsackSubproblem) -> Option<u64> {
    let prep = Prepared::new(problem)?;
    Some(prep.base_profit + prep.suffix_bound(0, prep.capacity))
}

/// Items reduced and sorted for solving.
struct Prepared {
    n: usize,
    capacity: i128,
    /// Profit of zero-weight items, always packed.
    base_profit: u64,
    forced: Vec<usize>,
    /// Original indices in nonincreasing profit/weight order.
    order: Vec<usize>,
    profits: Vec<u64>,
    weights: Vec<i128>,
    /// `prefix_w[i]` = total weight of `order[..i]`.
    prefix_w: Vec<i128>,
    prefix_p: Vec<u64>,
}

impl Prepared {
    fn new(problem: &KnapsackSubproblem) -> Option<Self> {
        if problem.capacity < 0 {
            return None;
        }
        let capacity = problem.capacity;
        let mut base_profit = 0;
        let mut forced = Vec::new();
        let mut order = Vec::new();
        for j in 0..problem.len() {
            let (p, w) = (problem.profits[j], problem.weights[j]);
            if p == 0 || w > capacity {
                continue;
            }
            if w == 0 {
                base_profit += p;
                forced.push(j);
            } else {
                order.push(j);
            }
        }
        order.sort_by(|&a, &b| {
            // p_a / w_a > p_b / w_b first
            let lhs = (problem.profits[a] as u128, problem.weights[b] as u128);
            let rhs = (problem.profits[b] as u128, problem.weights[a] as u128);
            cmp_products(rhs.0, rhs.1, lhs.0, lhs.1).then(a.cmp(&b))
        });
        let profits: Vec<u64> = order.iter().map(|&j| problem.profits[j]).collect();
        let weights: Vec<i128> = order.iter().map(|&j| problem.weights[j]).collect();
        let mut prefix_w = Vec::with_capacity(order.len() + 1);
        let mut prefix_p = Vec::with_capacity(order.len() + 1);
        prefix_w.push(0i128);
        prefix_p.push(0u64);
        for i in 0..order.len() {
            // Saturation keeps the binary search correct: a saturated prefix
            // already exceeds any capacity.
            prefix_w.push(prefix_w[i].saturating_add(weights[i]));
            prefix_p.push(prefix_p[i] + profits[i]);
        }
        Some(Prepared {
            n: problem.len(),
            capacity,
            base_profit,
            forced,
            order,
            profits,
            weights,
            prefix_w,
            prefix_p,
        })
    }

    /// Floor of the LP optimum over sorted items `start..` with `cap` room.
    fn suffix_bound(&self, start: usize, cap: i128) -> u64 {
        let len = self.order.len();
        if start >= len || cap <= 0 {
            return 0;
        }
        let base_w = self.prefix_w[start];
        // Largest t with prefix_w[t] - base_w <= cap.
        let limit = base_w.saturating_add(cap);
        let t = match self.prefix_w[start..].binary_search_by(|w| {
            if *w <= limit {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }) {
            Ok(i) | Err(i) => start + i - 1,
        };
        let full = self.prefix_p[t] - self.prefix_p[start];
        if t >= len {
            return full;
        }
        let residual = cap - (self.prefix_w[t] - base_w);
        let frac = match residual.checked_mul(self.profits[t] as i128) {
            Some(num) => div_floor(num, self.weights[t]) as u64,
            // Falls back to the whole profit of the break item.
            None => self.profits[t],
        };
        full + frac.min(self.profits[t])
    }

    /// Profit of packing sorted items `start..` greedily in order until the
    /// first one that does not fit.
    fn greedy_completion(&self, start: usize, cap: i128) -> u64 {
        let len = self.order.len();
        if start >= len || cap <= 0 {
            return 0;
        }
        let limit = self.prefix_w[start].saturating_add(cap);
        let t = match self.prefix_w[start..].binary_search_by(|w| {
            if *w <= limit {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }) {
            Ok(i) | Err(i) => start + i - 1,
        };
        self.prefix_p[t] - self.prefix_p[start]
    }

    fn solve(&self, floor: u64, config: &SolverConfig) -> Option<KnapsackSolution> {
        let upper = self.base_profit + self.suffix_bound(0, self.capacity);
        if upper < floor {
            return None;
        }
        let picked = if upper <= config.dp_state_cap {
            self.profit_dp(floor)
        } else {
            self.branch_and_bound(floor)
        }?;
        let mut selected = vec![false; self.n];
        for &j in &self.forced {
            selected[j] = true;
        }
        let mut value = self.base_profit;
        for pos in picked {
            selected[self.order[pos]] = true;
            value += self.profits[pos];
        }
        Some(KnapsackSolution { selected, value })
    }

    /// Sparse dynamic program by profits. Returns sorted positions of the
    /// packed items of the best state.
    fn profit_dp(&self, floor: u64) -> Option<Vec<usize>> {
        #[derive(Clone, Copy)]
        struct State {
            profit: u64,
            weight: i128,
            node: u32,
        }
        const ROOT: u32 = u32::MAX;
        // (sorted position, parent node)
        let mut arena: Vec<(u32, u32)> = Vec::new();

        let mut states = vec![State {
            profit: self.base_profit,
            weight: 0,
            node: ROOT,
        }];
        let mut incumbent = floor.max(self.base_profit + self.greedy_completion(0, self.capacity));
        let mut merged: Vec<State> = Vec::with_capacity(16);

        for pos in 0..self.order.len() {
            let (p, w) = (self.profits[pos], self.weights[pos]);
            merged.clear();
            let mut a = 0;
            let mut b = 0;
            let next = pos + 1;
            // Merge "skip" states (a) and "take" states (b) by weight,
            // keeping a strictly increasing profit frontier.
            loop {
                let take = match states.get(b) {
                    Some(s) if s.weight + w <= self.capacity => Some((s.profit + p, s.weight + w, s.node)),
                    Some(_) => {
                        // States are sorted by weight; no later one fits either.
                        b = states.len();
                        None
                    }
                    None => None,
                };
                let skip = states.get(a).copied();
                let (cand_profit, cand_weight, from_take, parent) = match (skip, take) {
                    (None, None) => break,
                    (Some(s), None) => {
                        a += 1;
                        (s.profit, s.weight, false, s.node)
                    }
                    (None, Some((tp, tw, tn))) => {
                        b += 1;
                        (tp, tw, true, tn)
                    }
                    (Some(s), Some((tp, tw, tn))) => {
                        if s.weight < tw || (s.weight == tw && s.profit >= tp) {
                            a += 1;
                            (s.profit, s.weight, false, s.node)
                        } else {
                            b += 1;
                            (tp, tw, true, tn)
                        }
                    }
                };
                if merged.last().is_some_and(|last| last.profit >= cand_profit) {
                    continue;
                }
                let room = self.capacity - cand_weight;
                if cand_profit + self.suffix_bound(next, room) < incumbent {
                    continue;
                }
                let completion = cand_profit + self.greedy_completion(next, room);
                if completion > incumbent {
                    incumbent = completion;
                }
                let node = if from_take {
                    arena.push((pos as u32, parent));
                    (arena.len() - 1) as u32
                } else {
                    parent
                };
                merged.push(State {
                    profit: cand_profit,
                    weight: cand_weight,
                    node,
                });
            }
            core::mem::swap(&mut states, &mut merged);
            if states.is_empty() {
                return None;
            }
        }

        let best = *states.last()?;
        if best.profit < floor {
            return None;
        }
        let mut picked = Vec::new();
        let mut node = best.node;
        while node != ROOT {
            let (pos, parent) = arena[node as usize];
            picked.push(pos as usize);
            node = parent;
        }
        picked.reverse();
        Some(picked)
    }

    /// Depth-first branch-and-bound in ratio order.
    fn branch_and_bound(&self, floor: u64) -> Option<Vec<usize>> {
        let len = self.order.len();
        // best is "value needed minus one"; any strictly larger value wins.
        let mut best: i128 = floor as i128 - 1;
        let mut best_set: Option<Vec<usize>> = None;
        let greedy_lb = self.base_profit + self.greedy_completion(0, self.capacity);
        if (greedy_lb as i128) > best {
            let t = self.greedy_completion_len(0, self.capacity);
            best = greedy_lb as i128;
            best_set = Some((0..t).collect());
        }

        let mut chosen: Vec<usize> = Vec::new();
        // Frames: (position, profit, room, phase). Phase 0 = try take,
        // phase 1 = try skip, phase 2 = done.
        let mut stack: Vec<(usize, u64, i128, u8)> = vec![(0, self.base_profit, self.capacity, 0)];
        while let Some(frame) = stack.last_mut() {
            let (pos, profit, room, phase) = *frame;
            if phase == 0 {
                if (profit as i128) > best {
                    best = profit as i128;
                    best_set = Some(chosen.clone());
                }
                if pos >= len || ((profit + self.suffix_bound(pos, room)) as i128) <= best {
                    stack.pop();
                    if !stack.is_empty() {
                        Self::unwind(&mut stack, &mut chosen);
                    }
                    continue;
                }
                frame.3 = 1;
                if self.weights[pos] <= room {
                    chosen.push(pos);
                    stack.push((pos + 1, profit + self.profits[pos], room - self.weights[pos], 0));
                    continue;
                }
            }
            let (pos, profit, room, phase) = *stack.last().unwrap();
            if phase == 1 {
                stack.last_mut().unwrap().3 = 2;
                if ((profit + self.suffix_bound(pos + 1, room)) as i128) > best {
                    stack.push((pos + 1, profit, room, 0));
                    continue;
                }
            }
            stack.pop();
            if !stack.is_empty() {
                Self::unwind(&mut stack, &mut chosen);
            }
        }
        best_set
    }

    /// Called after a child frame returns: if the parent is at phase 1 its
    /// take-branch just finished, so the item is removed from `chosen`.
    fn unwind(stack: &mut [(usize, u64, i128, u8)], chosen: &mut Vec<usize>) {
        let parent = stack.last().unwrap();
        if parent.3 == 1 && chosen.last() == Some(&parent.0) {
            chosen.pop();
        }
    }

    fn greedy_completion_len(&self, start: usize, cap: i128) -> usize {
        let limit = self.prefix_w[start].saturating_add(cap);
        match self.prefix_w[start..].binary_search_by(|w| {
            if *w <= limit {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }) {
            Ok(i) | Err(i) => start + i - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(p: &[u64], w: &[i128], c: i128) -> KnapsackSubproblem {
        KnapsackSubproblem::new(p.to_vec(), w.to_vec(), c).unwrap()
    }

    fn brute_force(problem: &KnapsackSubproblem) -> Option<u64> {
        if problem.capacity < 0 {
            return None;
        }
        let n = problem.len();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let sel: Vec<bool> = (0..n).map(|j| mask >> j & 1 == 1).collect();
            if problem.admits(&sel) {
                best = best.max(problem.value_of(&sel));
            }
        }
        Some(best)
    }

    #[test]
    fn textbook_instance() {
        let pr = problem(&[60, 100, 120], &[10, 20, 30], 50);
        let sol = solve_knapsack(&pr);
        let sol = sol.solution().unwrap();
        assert_eq!(sol.value, 220);
        assert_eq!(sol.selected, vec![false, true, true]);
        assert_eq!(brute_force(&pr), Some(220));
    }

    #[test]
    fn empty_and_oversized() {
        assert_eq!(solve_knapsack(&problem(&[], &[], 0)).value(), Some(0));
        let single = solve_knapsack(&problem(&[5], &[10], 9));
        assert_eq!(single.value(), Some(0));
        assert_eq!(single.solution().unwrap().selected, vec![false]);
    }

    #[test]
    fn negative_capacity_is_infeasible() {
        assert_eq!(solve_knapsack(&problem(&[1, 2], &[0, 1], -1)), KnapsackOutcome::Infeasible);
        assert_eq!(lp_bound(&problem(&[1], &[1], -5)), None);
    }

    #[test]
    fn zero_weight_items_are_packed() {
        let sol = solve_knapsack(&problem(&[4, 3, 0], &[0, 5, 0], 4));
        assert_eq!(sol.value(), Some(4));
        assert_eq!(sol.solution().unwrap().selected, vec![true, false, false]);
    }

    #[test]
    fn rejects_mismatched_and_negative_weights() {
        assert!(KnapsackSubproblem::new(vec![1], vec![], 3).is_err());
        assert!(KnapsackSubproblem::new(vec![1], vec![-1], 3).is_err());
    }

    #[test]
    fn scaling_is_conservative() {
        let (w, c) = scale_to_integers(&[1.2345678901], 10.9999999, 1_000_000).unwrap();
        assert_eq!((w, c), (vec![1_234_568], 10_999_999));
        let (w, c) = scale_to_integers(&[4.0, 7.0], 12.0, 1).unwrap();
        assert_eq!((w, c), (vec![4, 7], 12));
        let (w, c) = scale_to_integers(&[0.0000001], 0.0, 1_000_000).unwrap();
        assert_eq!((w, c), (vec![1], 0));
        assert!(scale_to_integers(&[1e40], 1.0, 1_000_000).is_err());
        assert!(scale_to_integers(&[1.0], 1.0, 0).is_err());
    }

    #[test]
    fn floor_filtering() {
        let pr = problem(&[60, 100, 120], &[10, 20, 30], 50);
        let cfg = SolverConfig::default();
        assert_eq!(solve_at_least(&pr, 220, &cfg).map(|s| s.value), Some(220));
        assert_eq!(solve_at_least(&pr, 221, &cfg), None);
    }

    #[test]
    fn branch_and_bound_agrees_with_dp() {
        let dp = SolverConfig::default();
        let bb = SolverConfig { dp_state_cap: 0 };
        let mut seed = 0x2545_f491_4f6c_dd1du64;
        let mut next = move |m: u64| {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed % m
        };
        for _ in 0..300 {
            let n = 1 + next(14) as usize;
            let p: Vec<u64> = (0..n).map(|_| next(60)).collect();
            let w: Vec<i128> = (0..n).map(|_| next(50) as i128).collect();
            let c = next(120) as i128;
            let pr = problem(&p, &w, c);
            let expected = brute_force(&pr);
            let a = solve_knapsack_with(&pr, &dp);
            let b = solve_knapsack_with(&pr, &bb);
            assert_eq!(a.value(), expected);
            assert_eq!(b.value(), expected);
            for out in [a, b] {
                let s = out.solution().unwrap();
                assert!(pr.admits(&s.selected));
                assert_eq!(pr.value_of(&s.selected), s.value);
            }
            assert!(lp_bound(&pr).unwrap() >= expected.unwrap());
        }
    }
}
