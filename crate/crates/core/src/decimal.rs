//! Finite decimal numbers.
//!
//! Instance data (means, standard deviations, capacity, safety factor) are
//! finite decimals. Keeping them as `mantissa * 10^-scale` lets every
//! feasibility decision be taken on integers, and the textual form written
//! back is the one that was read.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::arith::pow10;
use crate::error::{Error, Result};

/// Largest number of fractional digits accepted.
pub const MAX_SCALE: u32 = 18;

/// A finite decimal `mantissa * 10^-scale`.
///
/// Equality is representational: `1.50` and `1.5` are different values of
/// this type (they serialise differently). Use [`Decimal::cmp_value`] for
/// numeric comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

impl Decimal {
    pub const ZERO: Decimal = Decimal {
        mantissa: 0,
        scale: 0,
    };

    pub fn new(mantissa: i128, scale: u32) -> Result<Self> {
        if scale > MAX_SCALE {
            return Err(Error::InvalidParameter(alloc::format!(
                "decimal scale {scale} exceeds {MAX_SCALE}"
            )));
        }
        Ok(Decimal { mantissa, scale })
    }

    pub fn from_int(value: i64) -> Self {
        Decimal {
            mantissa: value as i128,
            scale: 0,
        }
    }

    /// Truncates a finite float towards zero to `digits` fractional digits.
    pub fn truncate_f64(value: f64, digits: u32) -> Result<Self> {
        if !value.is_finite() || digits > MAX_SCALE {
            return Err(Error::InvalidParameter(alloc::format!(
                "cannot represent {value} with {digits} digits"
            )));
        }
        let factor = libm::pow(10.0, digits as f64);
        let scaled = libm::trunc(value * factor);
        if scaled.abs() >= 1e36 {
            return Err(Error::Overflow("decimal truncation"));
        }
        Ok(Decimal {
            mantissa: scaled as i128,
            scale: digits,
        })
    }

    /// Rounds a finite float half-to-even to `digits` fractional digits.
    pub fn round_half_even_f64(value: f64, digits: u32) -> Result<Self> {
        if !value.is_finite() || digits > MAX_SCALE {
            return Err(Error::InvalidParameter(alloc::format!(
                "cannot represent {value} with {digits} digits"
            )));
        }
        let factor = libm::pow(10.0, digits as f64);
        let scaled = value * factor;
        let floor = libm::floor(scaled);
        let diff = scaled - floor;
        let round_up = diff > 0.5 || (diff == 0.5 && libm::fmod(floor, 2.0) != 0.0);
        let rounded = if round_up { floor + 1.0 } else { floor };
        if rounded.abs() >= 1e36 {
            return Err(Error::Overflow("decimal rounding"));
        }
        Ok(Decimal {
            mantissa: rounded as i128,
            scale: digits,
        })
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    /// Same value with trailing fractional zeros removed.
    pub fn normalized(&self) -> Decimal {
        let mut out = *self;
        while out.scale > 0 && out.mantissa % 10 == 0 {
            out.mantissa /= 10;
            out.scale -= 1;
        }
        out
    }

    /// Mantissa expressed at a larger (or equal) scale.
    pub fn mantissa_at(&self, scale: u32) -> Result<i128> {
        if scale < self.scale {
            let norm = self.normalized();
            if norm.scale > scale {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{self} has more than {scale} fractional digits"
                )));
            }
            return norm.mantissa_at(scale);
        }
        pow10(scale - self.scale)
            .and_then(|f| self.mantissa.checked_mul(f))
            .ok_or(Error::Overflow("decimal rescale"))
    }

    pub fn to_f64(&self) -> f64 {
        self.mantissa as f64 / libm::pow(10.0, self.scale as f64)
    }

    pub fn checked_mul(&self, other: &Decimal) -> Result<Decimal> {
        let mantissa = self
            .mantissa
            .checked_mul(other.mantissa)
            .ok_or(Error::Overflow("decimal product"))?;
        Decimal::new(mantissa, self.scale + other.scale)
    }

    pub fn checked_sub(&self, other: &Decimal) -> Result<Decimal> {
        let scale = self.scale.max(other.scale);
        let mantissa = self
            .mantissa_at(scale)?
            .checked_sub(other.mantissa_at(scale)?)
            .ok_or(Error::Overflow("decimal difference"))?;
        Decimal::new(mantissa, scale)
    }

    /// Numeric comparison, independent of representation.
    pub fn cmp_value(&self, other: &Decimal) -> Ordering {
        let scale = self.scale.max(other.scale);
        match (self.mantissa_at(scale), other.mantissa_at(scale)) {
            (Ok(a), Ok(b)) => a.cmp(&b),
            // Only reachable for magnitudes near 1e20 at scale 18.
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let digits = self.mantissa.unsigned_abs().to_string();
        if self.scale == 0 {
            return write!(f, "{sign}{digits}");
        }
        let scale = self.scale as usize;
        let padded = if digits.len() <= scale {
            let mut s = String::with_capacity(scale + 1);
            for _ in 0..(scale + 1 - digits.len()) {
                s.push('0');
            }
            s.push_str(&digits);
            s
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int_part}.{frac_part}")
    }
}

impl FromStr for Decimal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDecimal(s.to_string());
        let trimmed = s.trim();
        let (negative, body) = match trimmed.as_bytes().first() {
            Some(b'-') => (true, &trimmed[1..]),
            Some(b'+') => (false, &trimmed[1..]),
            _ => (false, trimmed),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        if body.ends_with('.') {
            return Err(bad());
        }
        let scale = frac_part.len() as u32;
        if scale > MAX_SCALE {
            return Err(bad());
        }
        let mut mantissa: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((b - b'0') as i128))
                .ok_or_else(bad)?;
        }
        if negative {
            mantissa = -mantissa;
        }
        Ok(Decimal { mantissa, scale })
    }
}
