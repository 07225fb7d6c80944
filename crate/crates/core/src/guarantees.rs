//! Probability guarantees of the inner approximation and a Monte-Carlo check
//! of chance-constraint satisfaction.
//!
//! A solution feasible for the inner set with `m` segments satisfies the
//! cone constraint with a safety factor shrunk to `omega * sqrt(1 - n/4m^2)`.
//! The gap functions bound how much satisfaction probability that costs.

use core::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::initial_m;
use crate::model::SockpInstance;
use crate::normal;

fn check_rho(rho: f64) -> Result<()> {
    if !(0.5..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(alloc::format!("rho = {rho} is outside [0.5, 1)")));
    }
    Ok(())
}

fn shrink_ratio(n: usize, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(n as f64 / (4.0 * (m as f64) * (m as f64)))
}

/// Loss of satisfaction probability under independent normal weights.
/// Requires `4 m^2 >= n`.
pub fn guarantee_gap_normal(n: usize, m: u64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let r = shrink_ratio(n, m)?;
    if r > 1.0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "m = {m} is below sqrt(n)/2 for n = {n}"
        )));
    }
    let z = normal::inverse_cdf(rho);
    let keep = 1.0 - r;
    Ok(z * (1.0 - libm::sqrt(keep)) * libm::exp(-0.5 * z * z * keep) / libm::sqrt(2.0 * PI))
}

/// Loss of worst-case satisfaction probability over all distributions with
/// the given means and variances. Requires `4 m^2 / n > rho`.
pub fn guarantee_gap_dro(n: usize, m: u64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let r = shrink_ratio(n, m)?;
    let denom = 1.0 / r - rho;
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "4m^2/n must exceed rho (m = {m}, n = {n})"
        )));
    }
    Ok(rho * (1.0 - rho) / denom)
}

/// Smallest `m` whose distribution-free gap is at most `delta`.
pub fn min_segments_dro(n: usize, rho: f64, delta: f64) -> Result<u64> {
    check_rho(rho)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let nf = n as f64;
    let guess = libm::ceil(libm::sqrt((rho * (1.0 - rho) / (4.0 * delta) + rho / 4.0) * nf));
    let mut m = (guess as u64).max(1);
    let ok = |m: u64| guarantee_gap_dro(n, m, rho).is_ok_and(|g| g <= delta);
    // The closed form is exact up to floating rounding; settle the last step.
    while !ok(m) {
        m += 1;
    }
    while m > 1 && ok(m - 1) {
        m -= 1;
    }
    Ok(m)
}

/// Smallest `m >= sqrt(n)/2` whose normal gap is at most `delta`, found by
/// doubling and bisection (the gap is nonincreasing in `m`).
pub fn min_segments_normal_order(n: usize, rho: f64, delta: f64) -> Result<u64> {
    check_rho(rho)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let ok = |m: u64| guarantee_gap_normal(n, m, rho).map(|g| g <= delta);
    let mut lo = initial_m(n);
    if ok(lo)? {
        return Ok(lo);
    }
    let mut hi = lo;
    loop {
        hi = hi.checked_mul(2).ok_or(Error::Overflow("segment count"))?;
        if ok(hi)? {
            break;
        }
        lo = hi;
    }
    // ok(lo) is false, ok(hi) is true.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Weight distribution used for sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Distribution {
    /// Independent `N(mean_j, sigma_j^2)`.
    #[default]
    Normal,
}

/// Seeded standard normal source (Marsaglia polar method on ChaCha8).
pub struct NormalSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new(seed: u64) -> Self {
        NormalSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform_pm1(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 * SCALE) * 2.0 - 1.0
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = self.uniform_pm1();
            let v = self.uniform_pm1();
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let k = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(v * k);
                return u * k;
            }
        }
    }
}

/// Fraction of sampled weight vectors for which `x` fits the capacity.
pub fn monte_carlo_feasibility(
    x: &[bool],
    inst: &SockpInstance,
    distribution: Distribution,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if x.len() != inst.n() {
        return Err(Error::InvalidParameter("solution length differs from n".into()));
    }
    let Distribution::Normal = distribution;
    // Slack b - a'x is exact; only the noise term is random.
    let scaled = inst.scaled()?;
    let load: i128 = scaled.means.iter().zip(x).filter(|(_, &s)| s).map(|(a, _)| *a).sum();
    let slack = (scaled.capacity - load) as f64 / libm::pow(10.0, scaled.scale as f64);
    let sigmas: alloc::vec::Vec<f64> = inst
        .sigmas
        .iter()
        .zip(x)
        .filter(|(s, &on)| on && !s.is_zero())
        .map(|(s, _)| s.to_f64())
        .collect();
    let mut sampler = NormalSampler::new(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let noise: f64 = sigmas.iter().map(|s| s * sampler.sample()).sum();
        if noise <= slack {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}
