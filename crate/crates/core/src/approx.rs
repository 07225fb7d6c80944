//! Piecewise-linear envelopes of `xi^2` and the polyhedral sets they induce.
//!
//! Splitting `[0, omega]` into `m` equal pieces, the chord interpolant `u`
//! lies above `xi^2` by at most `omega^2 / 4m^2` and `l = u - omega^2 / 4m^2`
//! lies below. Replacing `sum xi_j^2 <= omega^2` by `sum u(xi_j) <= omega^2`
//! gives a polytope inside the ball, and by `sum l(xi_j) <= omega^2` one
//! containing it. The support function of either polytope in the direction
//! `(sigma_j x_j)` is a bounded continuous knapsack over segments, [`beta`].

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::arith::{cmp_products, pow10};
use crate::decimal::Decimal;
use crate::error::{Error, Result};
use crate::model::{ScaledInstance, SockpInstance};

/// How `[0, omega]` is partitioned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Equal pieces of the domain `[0, omega]`.
    Horizontal,
    /// Equal pieces of the range `[0, omega^2]`. Upper bounds only.
    Vertical,
}

/// Segment budget `delta`, held as an integer number of quarters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Budget {
    quarters: u128,
}

impl Budget {
    pub fn from_quarters(quarters: u128) -> Self {
        Budget { quarters }
    }

    /// Budget of the inner set: `m^2` (horizontal) or `m` (vertical).
    pub fn inner(scheme: Scheme, m: u64) -> Self {
        let m = m as u128;
        match scheme {
            Scheme::Horizontal => Budget { quarters: 4 * m * m },
            Scheme::Vertical => Budget { quarters: 4 * m },
        }
    }

    /// Budget of the outer set for the horizontal scheme: `m^2 + n/4`.
    pub fn outer(n: usize, m: u64) -> Self {
        let m = m as u128;
        Budget {
            quarters: 4 * m * m + n as u128,
        }
    }

    pub fn quarters(&self) -> u128 {
        self.quarters
    }

    pub fn value(&self) -> f64 {
        self.quarters as f64 / 4.0
    }
}

fn check_domain(xi: f64, m: u64, omega: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter("omega must be positive".into()));
    }
    if !(0.0..=omega).contains(&xi) {
        return Err(Error::OutOfDomain);
    }
    Ok(())
}

/// Chord interpolant of `xi^2` on `m` equal pieces of `[0, omega]`.
pub fn eval_upper_envelope(xi: f64, m: u64, omega: f64) -> Result<f64> {
    check_domain(xi, m, omega)?;
    let mf = m as f64;
    let k = libm::ceil(xi * mf / omega).clamp(1.0, mf);
    let lo = (k - 1.0) * omega / mf;
    let hi = if k == mf { omega } else { k * omega / mf };
    // Chord through (lo, lo^2) and (hi, hi^2): (lo + hi) xi - lo hi.
    Ok(xi * xi + (hi - xi) * (xi - lo))
}

/// Upper envelope shifted down by `omega^2 / 4m^2`; touches `xi^2` at the
/// segment midpoints.
pub fn eval_lower_envelope(xi: f64, m: u64, omega: f64) -> Result<f64> {
    let u = eval_upper_envelope(xi, m, omega)?;
    let mf = m as f64;
    Ok(u - omega * omega / (4.0 * mf * mf))
}

/// Radii of the balls inscribed in the inner set and circumscribing the outer
/// set. The inner radius only exists for `4m^2 >= n`.
pub fn containment_radii(n: usize, m: u64, omega: f64) -> Result<(Option<f64>, f64)> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let ratio = n as f64 / (4.0 * (m as f64) * (m as f64));
    let inner = if ratio <= 1.0 {
        Some(omega * libm::sqrt(1.0 - ratio))
    } else {
        None
    };
    Ok((inner, omega * libm::sqrt(1.0 + ratio)))
}

/// One segment `(item, k)` with gain `d` and budget weight `f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentEntry {
    pub item: usize,
    /// Segment index, 1-based.
    pub k: u64,
    pub d: f64,
    pub f: u64,
}

/// Segments of all items sorted by nonincreasing `d / f`, ties by `(item, k)`.
/// The dummy element (`d = 0`, `f = delta`) is implicit and follows the last
/// entry.
#[derive(Clone, Debug)]
pub struct SegmentTable {
    pub scheme: Scheme,
    pub m: u64,
    pub omega: Decimal,
    pub n: usize,
    pub entries: Vec<SegmentEntry>,
    /// `prefix_f[i]` is the total `f` of `entries[..i]`.
    pub prefix_f: Vec<u128>,
    /// Sigmas as integers at `scale`; horizontal gains are `omega * sigma / m`.
    pub(crate) sigma_int: Vec<i128>,
}

/// Builds the sorted segment table.
pub fn build_segments(inst: &SockpInstance, omega: &Decimal, m: u64, scheme: Scheme) -> Result<SegmentTable> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if omega.is_negative() || omega.is_zero() {
        return Err(Error::InvalidParameter("omega must be positive".into()));
    }
    let scaled = inst.scaled()?;
    build_from_scaled(inst, &scaled, omega, m, scheme)
}

pub(crate) fn build_from_scaled(
    inst: &SockpInstance,
    scaled: &ScaledInstance,
    omega: &Decimal,
    m: u64,
    scheme: Scheme,
) -> Result<SegmentTable> {
    let n = inst.n();
    let count = (n as u128)
        .checked_mul(m as u128)
        .filter(|&c| c <= u32::MAX as u128)
        .ok_or(Error::InvalidParameter("too many segments".into()))? as usize;
    let w = omega.to_f64();
    let mf = m as f64;
    let mut entries = Vec::with_capacity(count);
    for j in 0..n {
        let s = inst.sigmas[j].to_f64();
        for k in 1..=m {
            let (d, f) = match scheme {
                Scheme::Horizontal => (w * s / mf, 2 * k - 1),
                Scheme::Vertical => {
                    let kf = k as f64;
                    (w * s * (libm::sqrt(kf / mf) - libm::sqrt((kf - 1.0) / mf)), 1)
                }
            };
            entries.push(SegmentEntry { item: j, k, d, f });
        }
    }
    let sigma_int = scaled.sigmas.clone();
    match scheme {
        Scheme::Horizontal => entries.sort_by(|a, b| {
            // sigma_a / f_a > sigma_b / f_b first
            let lhs = cmp_products(
                sigma_int[b.item] as u128,
                a.f as u128,
                sigma_int[a.item] as u128,
                b.f as u128,
            );
            lhs.then(a.item.cmp(&b.item)).then(a.k.cmp(&b.k))
        }),
        Scheme::Vertical => entries.sort_by(|a, b| {
            b.d.total_cmp(&a.d).then(a.item.cmp(&b.item)).then(a.k.cmp(&b.k))
        }),
    }
    let mut prefix_f = Vec::with_capacity(entries.len() + 1);
    prefix_f.push(0u128);
    for e in &entries {
        prefix_f.push(prefix_f.last().unwrap() + e.f as u128);
    }
    Ok(SegmentTable {
        scheme,
        m,
        omega: *omega,
        n,
        entries,
        prefix_f,
        sigma_int,
    })
}

impl SegmentTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First (0-based) position whose prefix sum of `f` reaches the budget,
    /// or `None` if the segments together never do.
    pub fn first_budget_position(&self, budget: Budget) -> Option<usize> {
        let q = budget.quarters();
        let pos = self.prefix_f.partition_point(|&p| 4 * p < q);
        if pos >= self.prefix_f.len() {
            None
        } else {
            // prefix_f[pos] covers entries[..pos]; the element that reaches
            // the budget is entries[pos - 1].
            Some(pos.saturating_sub(1))
        }
    }

    /// Exact order of `d/f` between two entries: `Greater` if `a` has the
    /// larger ratio. Horizontal tables only.
    pub(crate) fn ratio_cmp(&self, a: &SegmentEntry, b: &SegmentEntry) -> Ordering {
        match self.scheme {
            Scheme::Horizontal => cmp_products(
                self.sigma_int[a.item] as u128,
                b.f as u128,
                self.sigma_int[b.item] as u128,
                a.f as u128,
            ),
            Scheme::Vertical => a.d.total_cmp(&b.d),
        }
    }
}

/// Greedy value of the bounded continuous knapsack
/// `max sum d_l z_l` s.t. `sum f_l z_l <= delta`, `0 <= z_l <= x_{j(l)}`.
pub fn beta(x: &[bool], table: &SegmentTable, budget: Budget) -> f64 {
    let mut rem = budget.quarters();
    let mut total = 0.0;
    for e in &table.entries {
        if !x[e.item] {
            continue;
        }
        let f4 = 4 * e.f as u128;
        if f4 <= rem {
            total += e.d;
            rem -= f4;
        } else {
            total += e.d * rem as f64 / f4 as f64;
            break;
        }
    }
    total
}

/// Exact test of `a'x + beta(x, delta) <= b` for a horizontal table.
pub fn robust_feasible(x: &[bool], inst: &SockpInstance, table: &SegmentTable, budget: Budget) -> Result<bool> {
    if table.scheme != Scheme::Horizontal {
        return Err(Error::InvalidParameter("exact beta needs the horizontal scheme".into()));
    }
    let scaled = inst.scaled()?;
    let mut load: i128 = 0;
    for (j, &a) in scaled.means.iter().enumerate() {
        if x[j] {
            load += a;
        }
    }
    if load > scaled.capacity {
        return Ok(false);
    }
    // beta = omega / (m * 10^s) * num / den
    let mut rem = budget.quarters();
    let mut full: u128 = 0;
    let mut num: u128 = 0;
    let mut den: u128 = 1;
    let mut pivot = false;
    for e in &table.entries {
        if !x[e.item] {
            continue;
        }
        let f4 = 4 * e.f as u128;
        let s = table.sigma_int[e.item] as u128;
        if f4 <= rem {
            full += s;
            rem -= f4;
        } else {
            num = full * f4 + s * rem;
            den = f4;
            pivot = true;
            break;
        }
    }
    if !pivot {
        num = full;
    }
    let omega = table.omega.normalized();
    let slack = ((scaled.capacity - load) as u128)
        .checked_mul(pow10(omega.scale()).ok_or(Error::Overflow("omega scale"))? as u128)
        .ok_or(Error::Overflow("slack"))?;
    let lhs_factor = den.checked_mul(table.m as u128).ok_or(Error::Overflow("beta denominator"))?;
    Ok(cmp_products(slack, lhs_factor, omega.mantissa() as u128, num).is_ge())
}
