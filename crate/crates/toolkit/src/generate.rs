//! Random instance families.
//!
//! Every random field of every item is drawn from its own ChaCha8 stream,
//! seeded by mixing `(seed, field, item)` with splitmix64. An instance of
//! size `n` is therefore a prefix of the instance of size `n + 1` with the
//! same seed (apart from the capacity), and adding fields never shifts the
//! draws of existing ones.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sockp_core::{Decimal, Error, Result, SockpInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Strongly correlated: `p = a + 10`.
    SC,
    /// Inverse strongly correlated: `a = min(100, p + 10)`.
    IC,
    /// Subset sum: `p = a`, `sigma = a / 10`.
    SS,
    /// SC with sigmas `10 - sigma * u`, `u ~ U[0.5, 0.8]`.
    SCR,
    /// IC with the same sigma transform.
    ICR,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::SC, Family::IC, Family::SS, Family::SCR, Family::ICR];

    pub fn name(&self) -> &'static str {
        match self {
            Family::SC => "SC",
            Family::IC => "IC",
            Family::SS => "SS",
            Family::SCR => "SCR",
            Family::ICR => "ICR",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown instance family `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

/// A generated instance with the uniform factors behind the SCR/ICR sigma
/// transform, kept for auditing.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub instance: SockpInstance,
    pub sigma_factors: Option<Vec<f64>>,
}

#[derive(Clone, Copy)]
enum Field {
    Mean = 1,
    Profit = 2,
    Sigma = 3,
    Factor = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream(seed: u64, field: Field, item: usize) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ field as u64) ^ item as u64);
    ChaCha8Rng::seed_from_u64(key)
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    if spec.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let n = spec.n;
    let mut means = Vec::with_capacity(n);
    let mut profits = Vec::with_capacity(n);
    for j in 0..n {
        let (a, p) = match spec.family {
            Family::SC | Family::SCR | Family::SS => {
                let a: u64 = stream(spec.seed, Field::Mean, j).gen_range(1..=100);
                let p = if spec.family == Family::SS { a } else { a + 10 };
                (a, p)
            }
            Family::IC | Family::ICR => {
                let p: u64 = stream(spec.seed, Field::Profit, j).gen_range(1..=100);
                ((p + 10).min(100), p)
            }
        };
        means.push(a);
        profits.push(p);
    }

    let mut sigmas = Vec::with_capacity(n);
    let mut factors = Vec::new();
    for (j, &a) in means.iter().enumerate() {
        let sigma = if spec.family == Family::SS {
            Decimal::new(a as i128, 1)?
        } else {
            let af = a as f64;
            let raw = stream(spec.seed, Field::Sigma, j).gen_range(0.05 * af..=0.1 * af);
            Decimal::round_half_even_f64(raw, 4)?
        };
        let sigma = match spec.family {
            Family::SCR | Family::ICR => {
                let u = stream(spec.seed, Field::Factor, j).gen_range(0.5..=0.8);
                factors.push(u);
                let s = Decimal::round_half_even_f64(10.0 - sigma.to_f64() * u, 4)?;
                if s.is_negative() {
                    return Err(Error::Invariant(format!("negative sigma for item {j}")));
                }
                s
            }
            _ => sigma,
        };
        sigmas.push(sigma.normalized());
    }

    let total: u64 = means.iter().sum();
    let instance = SockpInstance::new(
        profits,
        means.iter().map(|&a| Decimal::from_int(a as i64)).collect(),
        sigmas,
        Decimal::from_int((total / 2) as i64),
    )?;
    Ok(Generated {
        instance,
        sigma_factors: matches!(spec.family, Family::SCR | Family::ICR).then_some(factors),
    })
}
