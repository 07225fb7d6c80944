//! Instance data, safety-factor resolution and the cone constraint.

use alloc::format;
use alloc::vec::Vec;

use crate::arith::{cmp_products, pow10};
use crate::decimal::Decimal;
use crate::error::{Error, Result};
use crate::normal;

/// Fractional digits kept when a safety factor is computed from a formula.
pub const DEFAULT_OMEGA_DIGITS: u32 = 6;

/// Data of one cone-constrained knapsack instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SockpInstance {
    pub profits: Vec<u64>,
    pub means: Vec<Decimal>,
    pub sigmas: Vec<Decimal>,
    pub capacity: Decimal,
}

impl SockpInstance {
    pub fn new(profits: Vec<u64>, means: Vec<Decimal>, sigmas: Vec<Decimal>, capacity: Decimal) -> Result<Self> {
        let inst = SockpInstance {
            profits,
            means,
            sigmas,
            capacity,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.profits.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.means.len() != n || self.sigmas.len() != n {
            return Err(Error::InvalidInstance(format!(
                "{} profits, {} means, {} sigmas",
                n,
                self.means.len(),
                self.sigmas.len()
            )));
        }
        if let Some(j) = self.means.iter().position(|a| a.is_negative()) {
            return Err(Error::InvalidInstance(format!("mean weight {j} is negative")));
        }
        if let Some(j) = self.sigmas.iter().position(|s| s.is_negative()) {
            return Err(Error::InvalidInstance(format!("sigma {j} is negative")));
        }
        if self.capacity.is_negative() {
            return Err(Error::InvalidInstance("capacity is negative".into()));
        }
        self.profits
            .iter()
            .try_fold(0u64, |acc, &p| acc.checked_add(p))
            .ok_or(Error::Overflow("profit sum"))?;
        self.scaled().map(|_| ())
    }

    pub fn profit_of(&self, x: &[bool]) -> u64 {
        self.profits.iter().zip(x).filter(|(_, &s)| s).map(|(p, _)| *p).sum()
    }

    /// Integer view with every decimal at one common scale.
    pub fn scaled(&self) -> Result<ScaledInstance> {
        let scale = self
            .means
            .iter()
            .chain(&self.sigmas)
            .chain(core::iter::once(&self.capacity))
            .map(|d| d.normalized().scale())
            .max()
            .unwrap_or(0);
        let convert = |ds: &[Decimal]| ds.iter().map(|d| d.mantissa_at(scale)).collect::<Result<Vec<_>>>();
        Ok(ScaledInstance {
            scale,
            means: convert(&self.means)?,
            sigmas: convert(&self.sigmas)?,
            capacity: self.capacity.mantissa_at(scale)?,
        })
    }

    /// Same instance with the dispersion coefficients replaced.
    pub fn with_sigmas(&self, sigmas: Vec<Decimal>) -> Result<Self> {
        SockpInstance::new(self.profits.clone(), self.means.clone(), sigmas, self.capacity)
    }
}

/// Instance data as integers `value * 10^scale`, all at the smallest common
/// scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledInstance {
    pub scale: u32,
    pub means: Vec<i128>,
    pub sigmas: Vec<i128>,
    pub capacity: i128,
}

impl ScaledInstance {
    pub fn sum_sq_sigmas(&self, x: Option<&[bool]>) -> Result<u128> {
        let mut total: u128 = 0;
        for (j, &s) in self.sigmas.iter().enumerate() {
            if x.is_some_and(|x| !x[j]) {
                continue;
            }
            let s = s as u128;
            total = s
                .checked_mul(s)
                .and_then(|sq| total.checked_add(sq))
                .ok_or(Error::Overflow("sum of squared sigmas"))?;
        }
        Ok(total)
    }
}

/// How the cone's dispersion coefficients are built from support intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SupportForm {
    /// `upper^2 - lower^2`.
    #[default]
    SquaredBounds,
    /// `upper - lower`, the Hoeffding width.
    Width,
}

/// Distributional assumption behind the chance constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum OmegaKind {
    /// Independent normal weights.
    Normal { rho: f64 },
    /// Known mean and variance only (one-sided Chebyshev).
    MomentChebyshev { rho: f64 },
    /// Delage-Ye moment ambiguity with parameters `gamma1 >= 0`, `gamma2 >= 1`.
    DelageYe { rho: f64, gamma1: f64, gamma2: f64 },
    /// Independent weights on known bounded supports.
    SupportInterval {
        rho: f64,
        lower: Vec<Decimal>,
        upper: Vec<Decimal>,
        form: SupportForm,
    },
    Explicit(Decimal),
}

/// A distributional assumption resolved to a safety factor.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSpec {
    pub kind: OmegaKind,
    pub omega: Decimal,
    /// Replacement dispersion coefficients (support intervals only).
    pub sigmas: Option<Vec<Decimal>>,
}

impl OmegaSpec {
    /// The instance the cone constraint is actually posed on.
    pub fn apply(&self, inst: &SockpInstance) -> Result<SockpInstance> {
        match &self.sigmas {
            None => Ok(inst.clone()),
            Some(s) => {
                if s.len() != inst.n() {
                    return Err(Error::InvalidParameter(format!(
                        "support intervals given for {} items, instance has {}",
                        s.len(),
                        inst.n()
                    )));
                }
                inst.with_sigmas(s.clone())
            }
        }
    }
}

impl OmegaKind {
    pub fn rho(&self) -> Option<f64> {
        match self {
            OmegaKind::Normal { rho }
            | OmegaKind::MomentChebyshev { rho }
            | OmegaKind::DelageYe { rho, .. }
            | OmegaKind::SupportInterval { rho, .. } => Some(*rho),
            OmegaKind::Explicit(_) => None,
        }
    }

    /// Unrounded safety factor.
    pub fn omega_f64(&self) -> Result<f64> {
        if let Some(rho) = self.rho() {
            if !(0.5..1.0).contains(&rho) {
                return Err(Error::InvalidParameter(format!("rho = {rho} is outside [0.5, 1)")));
            }
        }
        let omega = match self {
            OmegaKind::Normal { rho } => normal::inverse_cdf(*rho),
            OmegaKind::MomentChebyshev { rho } => libm::sqrt(rho / (1.0 - rho)),
            OmegaKind::DelageYe { rho, gamma1, gamma2 } => {
                let (g1, g2) = (*gamma1, *gamma2);
                if !(g1 >= 0.0) || !(g2 >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Delage-Ye parameters need gamma1 >= 0 and gamma2 >= 1 (got {g1}, {g2})"
                    )));
                }
                if g1 / g2 <= 1.0 - rho {
                    if g2 < g1 {
                        return Err(Error::InvalidParameter("gamma2 < gamma1".into()));
                    }
                    libm::sqrt(g1) + libm::sqrt((g2 - g1) * rho / (1.0 - rho))
                } else {
                    libm::sqrt(g2 / (1.0 - rho))
                }
            }
            OmegaKind::SupportInterval { rho, .. } => libm::sqrt(-0.5 * libm::log1p(-rho)),
            OmegaKind::Explicit(w) => w.to_f64(),
        };
        Ok(omega)
    }

    pub fn resolve(&self) -> Result<OmegaSpec> {
        self.resolve_with_digits(DEFAULT_OMEGA_DIGITS)
    }

    /// Resolves to a safety factor truncated to `digits` fractional digits.
    /// An explicit factor is kept as given.
    pub fn resolve_with_digits(&self, digits: u32) -> Result<OmegaSpec> {
        let omega = match self {
            OmegaKind::Explicit(w) => *w,
            _ => Decimal::truncate_f64(self.omega_f64()?, digits)?,
        };
        if omega.is_negative() || omega.is_zero() {
            return Err(Error::InvalidParameter(format!("safety factor {omega} is not positive")));
        }
        let sigmas = match self {
            OmegaKind::SupportInterval {
                lower, upper, form, ..
            } => Some(support_sigmas(lower, upper, *form)?),
            _ => None,
        };
        Ok(OmegaSpec {
            kind: self.clone(),
            omega,
            sigmas,
        })
    }
}

/// Free-function form of [`OmegaKind::resolve`].
pub fn resolve_omega(kind: &OmegaKind) -> Result<OmegaSpec> {
    kind.resolve()
}

fn support_sigmas(lower: &[Decimal], upper: &[Decimal], form: SupportForm) -> Result<Vec<Decimal>> {
    if lower.len() != upper.len() {
        return Err(Error::InvalidParameter("support bounds differ in length".into()));
    }
    lower
        .iter()
        .zip(upper)
        .enumerate()
        .map(|(j, (lo, hi))| {
            if lo.cmp_value(hi).is_gt() {
                return Err(Error::InvalidParameter(format!("support interval {j} has lower > upper")));
            }
            let s = match form {
                SupportForm::SquaredBounds => hi.checked_mul(hi)?.checked_sub(&lo.checked_mul(lo)?)?,
                SupportForm::Width => hi.checked_sub(lo)?,
            };
            if s.is_negative() {
                return Err(Error::InvalidParameter(format!(
                    "support interval {j} gives a negative dispersion coefficient"
                )));
            }
            Ok(s.normalized())
        })
        .collect()
}

/// `a'x + omega * sqrt(sum sigma_j^2 x_j)` in floating point.
pub fn soc_lhs(x: &[bool], inst: &SockpInstance, omega: &Decimal) -> f64 {
    let mut mean = 0.0;
    let mut var = 0.0;
    for ((a, s), _) in inst.means.iter().zip(&inst.sigmas).zip(x).filter(|(_, &on)| on) {
        mean += a.to_f64();
        let s = s.to_f64();
        var += s * s;
    }
    mean + omega.to_f64() * libm::sqrt(var)
}

/// Exact cone feasibility: `a'x <= b` and `(b - a'x)^2 >= omega^2 sum sigma_j^2 x_j`.
pub fn is_soc_feasible(x: &[bool], inst: &SockpInstance, omega: &Decimal) -> bool {
    let scaled = match inst.scaled() {
        Ok(s) => s,
        Err(_) => return false,
    };
    soc_feasible_scaled(x, &scaled, omega).unwrap_or(false)
}

pub(crate) fn soc_feasible_scaled(x: &[bool], inst: &ScaledInstance, omega: &Decimal) -> Result<bool> {
    let mut load: i128 = 0;
    for (j, &a) in inst.means.iter().enumerate() {
        if x[j] {
            load = load.checked_add(a).ok_or(Error::Overflow("mean load"))?;
        }
    }
    if load > inst.capacity {
        return Ok(false);
    }
    let omega = omega.normalized();
    let slack = ((inst.capacity - load) as u128)
        .checked_mul(pow10(omega.scale()).ok_or(Error::Overflow("omega scale"))? as u128)
        .ok_or(Error::Overflow("slack"))?;
    let w = omega.mantissa() as u128;
    let var = inst.sum_sq_sigmas(Some(x))?;
    let w_sq = w.checked_mul(w).ok_or(Error::Overflow("omega squared"))?;
    Ok(cmp_products(slack, slack, w_sq, var).is_ge())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn single(b: &str) -> SockpInstance {
        SockpInstance::new(vec![1], vec![d("5")], vec![d("1")], d(b)).unwrap()
    }

    #[test]
    fn closed_form_safety_factors() {
        let cheb = OmegaKind::MomentChebyshev { rho: 0.95 }.resolve().unwrap();
        assert_eq!(cheb.omega, d("4.358898"));
        let cheb99 = OmegaKind::MomentChebyshev { rho: 0.99 }.omega_f64().unwrap();
        assert!((cheb99 - 9.95).abs() < 0.005);
        let normal = OmegaKind::Normal { rho: 0.95 }.resolve().unwrap();
        assert_eq!(normal.omega, d("1.644853"));
        let normal975 = OmegaKind::Normal { rho: 0.975 }.omega_f64().unwrap();
        assert!((normal975 - 1.96).abs() < 1e-3);
        let normal995 = OmegaKind::Normal { rho: 0.995 }.omega_f64().unwrap();
        assert!((normal995 - 2.58).abs() < 5e-3);
    }

    #[test]
    fn delage_ye_reduces_to_moment_case() {
        for rho in [0.5, 0.7, 0.9, 0.95, 0.99] {
            let dy = OmegaKind::DelageYe {
                rho,
                gamma1: 0.0,
                gamma2: 1.0,
            }
            .omega_f64()
            .unwrap();
            let m = OmegaKind::MomentChebyshev { rho }.omega_f64().unwrap();
            assert!((dy - m).abs() < 1e-12);
        }
        let second = OmegaKind::DelageYe {
            rho: 0.95,
            gamma1: 0.5,
            gamma2: 2.0,
        }
        .omega_f64()
        .unwrap();
        assert!((second - (2.0f64 / 0.05).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_rho() {
        assert!(OmegaKind::Normal { rho: 0.4 }.resolve().is_err());
        assert!(OmegaKind::Normal { rho: 1.0 }.resolve().is_err());
        // rho = 0.5 gives omega = 0, which is not a valid safety factor.
        assert!(OmegaKind::Normal { rho: 0.5 }.resolve().is_err());
        assert!(OmegaKind::MomentChebyshev { rho: 0.5 }.resolve().is_ok());
        assert!(OmegaKind::Explicit(d("0")).resolve().is_err());
    }

    #[test]
    fn support_interval_coefficients() {
        let kind = OmegaKind::SupportInterval {
            rho: 0.9,
            lower: vec![d("1"), d("2.5")],
            upper: vec![d("3"), d("2.5")],
            form: SupportForm::SquaredBounds,
        };
        let spec = kind.resolve().unwrap();
        assert_eq!(spec.sigmas, Some(vec![d("8"), d("0")]));
        assert_eq!(spec.omega, Decimal::truncate_f64((0.5 * 10f64.ln()).sqrt(), 6).unwrap());
        let width = OmegaKind::SupportInterval {
            rho: 0.9,
            lower: vec![d("1")],
            upper: vec![d("3")],
            form: SupportForm::Width,
        };
        assert_eq!(width.resolve().unwrap().sigmas, Some(vec![d("2")]));
        let bad = OmegaKind::SupportInterval {
            rho: 0.9,
            lower: vec![d("4")],
            upper: vec![d("3")],
            form: SupportForm::Width,
        };
        assert!(bad.resolve().is_err());
    }

    #[test]
    fn cone_constraint_examples() {
        let inst = single("7");
        let two = d("2");
        assert_eq!(soc_lhs(&[false], &inst, &two), 0.0);
        assert_eq!(soc_lhs(&[true], &inst, &two), 7.0);
        assert!(is_soc_feasible(&[false], &inst, &two));
        assert!(is_soc_feasible(&[true], &inst, &two));
        assert!(!is_soc_feasible(&[true], &single("6.999999"), &two));
    }

    #[test]
    fn zero_sigmas_give_deterministic_knapsack() {
        let inst = SockpInstance::new(vec![1, 1], vec![d("2.5"), d("3")], vec![d("0"), d("0.000")], d("5.5")).unwrap();
        assert_eq!(soc_lhs(&[true, true], &inst, &d("3")), 5.5);
        assert!(is_soc_feasible(&[true, true], &inst, &d("3")));
    }

    #[test]
    fn instance_validation() {
        assert!(SockpInstance::new(vec![1], vec![], vec![d("1")], d("1")).is_err());
        assert!(SockpInstance::new(vec![1], vec![d("-1")], vec![d("1")], d("1")).is_err());
        assert!(SockpInstance::new(vec![1], vec![d("1")], vec![d("-0.1")], d("1")).is_err());
        assert!(SockpInstance::new(vec![1], vec![d("1")], vec![d("1")], d("-1")).is_err());
        let inst = SockpInstance::new(vec![1, 2], vec![d("1.50"), d("2")], vec![d("0.25"), d("1")], d("3")).unwrap();
        let s = inst.scaled().unwrap();
        assert_eq!(s.scale, 2);
        assert_eq!(s.means, vec![150, 200]);
        assert_eq!(s.sigmas, vec![25, 100]);
        assert_eq!(s.capacity, 300);
    }
}
