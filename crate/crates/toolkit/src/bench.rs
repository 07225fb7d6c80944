//! Benchmark harness: bounds per segment count, the doubling algorithm, and
//! the horizontal/vertical scheme comparison.
//!
//! Jobs run on the rayon pool; rows are sorted by key afterwards so reports
//! do not depend on completion order.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sockp_core::approx::Scheme;
use sockp_core::exact::solve_exact_with;
use sockp_core::rkpm::{lower_bound_with, upper_bound_with, RkpmOptions};
use sockp_core::{Decimal, Error, OmegaKind, Result, SockpInstance};

use crate::generate::{generate, Family, GeneratorSpec};

/// A segment count, either fixed or a multiple of `sqrt(n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentSpec {
    Fixed(u64),
    SqrtMultiple(f64),
}

impl SegmentSpec {
    pub fn resolve(&self, n: usize) -> u64 {
        match *self {
            SegmentSpec::Fixed(m) => m,
            SegmentSpec::SqrtMultiple(c) => ((c * (n as f64).sqrt()).round() as u64).max(1),
        }
    }
}

impl FromStr for SegmentSpec {
    type Err = Error;

    /// `10`, `sqrt`, `4sqrt`, `0.5sqrt`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad segment count `{s}`"));
        let s = s.trim();
        if let Some(c) = s.strip_suffix("sqrt") {
            let c = if c.is_empty() { 1.0 } else { c.parse::<f64>().map_err(|_| bad())? };
            if c.is_nan() || c <= 0.0 || !c.is_finite() {
                return Err(bad());
            }
            return Ok(SegmentSpec::SqrtMultiple(c));
        }
        match s.parse::<u64>() {
            Ok(m) if m > 0 => Ok(SegmentSpec::Fixed(m)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for SegmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentSpec::Fixed(m) => write!(f, "{m}"),
            SegmentSpec::SqrtMultiple(c) => write!(f, "{c}sqrt"),
        }
    }
}

/// Distributional assumption used across a benchmark.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BenchAmbiguity {
    Normal,
    Chebyshev,
    DelageYe { gamma1: f64, gamma2: f64 },
}

impl BenchAmbiguity {
    pub fn omega(&self, rho: f64) -> Result<Decimal> {
        let kind = match *self {
            BenchAmbiguity::Normal => OmegaKind::Normal { rho },
            BenchAmbiguity::Chebyshev => OmegaKind::MomentChebyshev { rho },
            BenchAmbiguity::DelageYe { gamma1, gamma2 } => OmegaKind::DelageYe { rho, gamma1, gamma2 },
        };
        Ok(kind.resolve()?.omega)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DeltaChoice {
    Upper,
    Lower,
    #[default]
    Both,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    pub rhos: Vec<f64>,
    pub m_grid: Vec<SegmentSpec>,
    pub seeds: Vec<u64>,
    pub ambiguity: BenchAmbiguity,
    pub delta: DeltaChoice,
    pub options: RkpmOptions,
}

impl BenchConfig {
    pub fn new(families: Vec<Family>, sizes: Vec<usize>, rhos: Vec<f64>, seeds: Vec<u64>) -> Self {
        BenchConfig {
            families,
            sizes,
            rhos,
            m_grid: Vec::new(),
            seeds,
            ambiguity: BenchAmbiguity::Chebyshev,
            delta: DeltaChoice::Both,
            options: RkpmOptions::default(),
        }
    }

    fn instances(&self) -> Vec<(Family, usize, f64, u64)> {
        let mut out = Vec::new();
        for &family in &self.families {
            for &n in &self.sizes {
                for &rho in &self.rhos {
                    for &seed in &self.seeds {
                        out.push((family, n, rho, seed));
                    }
                }
            }
        }
        out
    }
}

fn build(family: Family, n: usize, seed: u64) -> Result<SockpInstance> {
    Ok(generate(&GeneratorSpec { family, n, seed })?.instance)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Relative gap in percent; infinite when the lower bound is zero and the
/// upper bound is not.
pub fn gap_pct(ub: u64, lb: u64) -> f64 {
    if lb == 0 {
        return if ub == 0 { 0.0 } else { f64::INFINITY };
    }
    (ub as f64 - lb as f64) / lb as f64 * 100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub family: String,
    pub n: usize,
    pub rho: f64,
    pub m: u64,
    pub seed: u64,
    pub ub: Option<u64>,
    pub lb: Option<u64>,
    pub gap_pct: Option<f64>,
    pub time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub family: String,
    pub n: usize,
    pub rho: f64,
    pub m: u64,
    pub runs: usize,
    pub mean_ub: Option<f64>,
    pub mean_lb: Option<f64>,
    pub mean_gap_pct: Option<f64>,
    pub mean_time_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
    pub summary: Vec<BoundsSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn family_key(name: &str) -> Family {
    name.parse().expect("rows carry valid family names")
}

pub fn run_bounds_bench(cfg: &BenchConfig) -> Result<BoundsReport> {
    let mut jobs = Vec::new();
    for (family, n, rho, seed) in cfg.instances() {
        let mut ms: Vec<u64> = cfg.m_grid.iter().map(|s| s.resolve(n)).collect();
        ms.sort_unstable();
        ms.dedup();
        for m in ms {
            jobs.push((family, n, rho, seed, m));
        }
    }
    let mut rows = jobs
        .par_iter()
        .map(|&(family, n, rho, seed, m)| -> Result<BoundsRow> {
            let inst = build(family, n, seed)?;
            let omega = cfg.ambiguity.omega(rho)?;
            let start = Instant::now();
            let ub = match cfg.delta {
                DeltaChoice::Lower => None,
                _ => Some(upper_bound_with(&inst, &omega, m, &cfg.options)?.objective),
            };
            let lb = match cfg.delta {
                DeltaChoice::Upper => None,
                _ => Some(lower_bound_with(&inst, &omega, m, &cfg.options)?.objective),
            };
            Ok(BoundsRow {
                family: family.to_string(),
                n,
                rho,
                m,
                seed,
                ub,
                lb,
                gap_pct: ub.zip(lb).map(|(u, l)| gap_pct(u, l)),
                time_ms: millis(start),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (family_key(&a.family), a.n, a.m, a.seed)
            .cmp(&(family_key(&b.family), b.n, b.m, b.seed))
            .then(a.rho.total_cmp(&b.rho))
    });

    let mut groups: BTreeMap<(Family, usize, u64, u64), Vec<&BoundsRow>> = BTreeMap::new();
    for r in &rows {
        groups.entry((family_key(&r.family), r.n, r.rho.to_bits(), r.m)).or_default().push(r);
    }
    let mut summary: Vec<BoundsSummary> = groups
        .into_iter()
        .map(|((family, n, rho, m), rs)| BoundsSummary {
            family: family.to_string(),
            n,
            rho: f64::from_bits(rho),
            m,
            runs: rs.len(),
            mean_ub: mean(rs.iter().filter_map(|r| r.ub).map(|v| v as f64)),
            mean_lb: mean(rs.iter().filter_map(|r| r.lb).map(|v| v as f64)),
            mean_gap_pct: mean(rs.iter().filter_map(|r| r.gap_pct)),
            mean_time_ms: mean(rs.iter().map(|r| r.time_ms)).unwrap_or(0.0),
        })
        .collect();
    summary.sort_by(|a, b| {
        (family_key(&a.family), a.n, a.m)
            .cmp(&(family_key(&b.family), b.n, b.m))
            .then(a.rho.total_cmp(&b.rho))
    });
    Ok(BoundsReport { rows, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub family: String,
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub iters: usize,
    pub m_final: u64,
    pub knap_solves: usize,
    pub time_ms: f64,
    pub objective: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub family: String,
    pub n: usize,
    pub rho: f64,
    pub runs: usize,
    pub mean_iters: f64,
    pub mean_m_final: f64,
    pub mean_knap_solves: f64,
    pub mean_time_ms: f64,
    pub mean_objective: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactBenchReport {
    pub rows: Vec<ExactRow>,
    pub summary: Vec<ExactSummary>,
}

pub fn run_exact_bench(cfg: &BenchConfig) -> Result<ExactBenchReport> {
    let mut rows = cfg
        .instances()
        .par_iter()
        .map(|&(family, n, rho, seed)| -> Result<ExactRow> {
            let inst = build(family, n, seed)?;
            let omega = cfg.ambiguity.omega(rho)?;
            let start = Instant::now();
            let rep = solve_exact_with(&inst, &omega, &cfg.options)?;
            Ok(ExactRow {
                family: family.to_string(),
                n,
                rho,
                seed,
                iters: rep.iterations.len(),
                m_final: rep.result.m,
                knap_solves: rep.knapsack_solves(),
                time_ms: millis(start),
                objective: rep.result.objective,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (family_key(&a.family), a.n, a.seed)
            .cmp(&(family_key(&b.family), b.n, b.seed))
            .then(a.rho.total_cmp(&b.rho))
    });
    let mut groups: BTreeMap<(Family, usize, u64), Vec<&ExactRow>> = BTreeMap::new();
    for r in &rows {
        groups.entry((family_key(&r.family), r.n, r.rho.to_bits())).or_default().push(r);
    }
    let mut summary: Vec<ExactSummary> = groups
        .into_iter()
        .map(|((family, n, rho), rs)| ExactSummary {
            family: family.to_string(),
            n,
            rho: f64::from_bits(rho),
            runs: rs.len(),
            mean_iters: mean(rs.iter().map(|r| r.iters as f64)).unwrap_or(0.0),
            mean_m_final: mean(rs.iter().map(|r| r.m_final as f64)).unwrap_or(0.0),
            mean_knap_solves: mean(rs.iter().map(|r| r.knap_solves as f64)).unwrap_or(0.0),
            mean_time_ms: mean(rs.iter().map(|r| r.time_ms)).unwrap_or(0.0),
            mean_objective: mean(rs.iter().map(|r| r.objective as f64)).unwrap_or(0.0),
        })
        .collect();
    summary.sort_by(|a, b| {
        (family_key(&a.family), a.n).cmp(&(family_key(&b.family), b.n)).then(a.rho.total_cmp(&b.rho))
    });
    Ok(ExactBenchReport { rows, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub family: String,
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub scheme: String,
    pub m: u64,
    pub ub: u64,
    pub time_ms: f64,
}

pub fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Horizontal => "horizontal",
        Scheme::Vertical => "vertical",
    }
}

/// Upper bounds of both schemes over their own segment grids.
pub fn run_scheme_comparison(
    cfg: &BenchConfig,
    horizontal: &[SegmentSpec],
    vertical: &[SegmentSpec],
) -> Result<Vec<SchemeRow>> {
    let mut jobs = Vec::new();
    for (family, n, rho, seed) in cfg.instances() {
        for (scheme, grid) in [(Scheme::Horizontal, horizontal), (Scheme::Vertical, vertical)] {
            let mut ms: Vec<u64> = grid.iter().map(|s| s.resolve(n)).collect();
            ms.sort_unstable();
            ms.dedup();
            for m in ms {
                jobs.push((family, n, rho, seed, scheme, m));
            }
        }
    }
    let mut rows = jobs
        .par_iter()
        .map(|&(family, n, rho, seed, scheme, m)| -> Result<SchemeRow> {
            let inst = build(family, n, seed)?;
            let omega = cfg.ambiguity.omega(rho)?;
            let opts = RkpmOptions { scheme, ..cfg.options };
            let start = Instant::now();
            let ub = upper_bound_with(&inst, &omega, m, &opts)?.objective;
            Ok(SchemeRow {
                family: family.to_string(),
                n,
                rho,
                seed,
                scheme: scheme_name(scheme).to_string(),
                m,
                ub,
                time_ms: millis(start),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (family_key(&a.family), a.n, a.seed, &a.scheme, a.m)
            .cmp(&(family_key(&b.family), b.n, b.seed, &b.scheme, b.m))
            .then(a.rho.total_cmp(&b.rho))
    });
    Ok(rows)
}

/// Writes rows as CSV with a header row.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn bounds_csv_header() -> &'static str {
    "family,n,rho,m,seed,ub,lb,gap_pct,time_ms"
}

pub fn exact_csv_header() -> &'static str {
    "family,n,rho,seed,iters,m_final,knap_solves,time_ms,objective"
}
