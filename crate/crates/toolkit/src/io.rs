//! JSON file formats. Decimals travel as strings so that the digits written
//! are the digits read.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sockp_core::exact::ExactReport;
use sockp_core::rkpm::{BoundKind, BoundResult};
use sockp_core::{Decimal, SockpInstance};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub profits: Vec<u64>,
    pub means: Vec<String>,
    pub sigmas: Vec<String>,
    pub capacity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
}

impl InstanceFile {
    pub fn from_instance(inst: &SockpInstance, omega: Option<&Decimal>) -> Self {
        InstanceFile {
            n: inst.n(),
            profits: inst.profits.clone(),
            means: inst.means.iter().map(ToString::to_string).collect(),
            sigmas: inst.sigmas.iter().map(ToString::to_string).collect(),
            capacity: inst.capacity.to_string(),
            omega: omega.map(ToString::to_string),
        }
    }

    pub fn into_instance(self) -> anyhow::Result<(SockpInstance, Option<Decimal>)> {
        if self.profits.len() != self.n {
            bail!("`n` is {} but {} profits were given", self.n, self.profits.len());
        }
        let parse = |v: &[String], what: &str| -> anyhow::Result<Vec<Decimal>> {
            v.iter()
                .enumerate()
                .map(|(j, s)| s.parse::<Decimal>().with_context(|| format!("{what}[{j}]")))
                .collect()
        };
        let means = parse(&self.means, "means")?;
        let sigmas = parse(&self.sigmas, "sigmas")?;
        let capacity = self.capacity.parse::<Decimal>().context("capacity")?;
        let omega = self
            .omega
            .as_deref()
            .map(|s| s.parse::<Decimal>().context("omega"))
            .transpose()?;
        if let Some(w) = &omega {
            if w.is_negative() || w.is_zero() {
                bail!("omega must be positive");
            }
        }
        Ok((SockpInstance::new(self.profits, means, sigmas, capacity)?, omega))
    }
}

pub fn instance_to_json(inst: &SockpInstance, omega: Option<&Decimal>) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst, omega)).expect("instance serialises")
}

pub fn instance_from_json(text: &str) -> anyhow::Result<(SockpInstance, Option<Decimal>)> {
    let file: InstanceFile = serde_json::from_str(text).context("malformed instance JSON")?;
    file.into_instance()
}

pub fn read_instance(path: &Path) -> anyhow::Result<(SockpInstance, Option<Decimal>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    instance_from_json(&text).with_context(|| format!("in {}", path.display()))
}

/// Bit string `0101...` used on the command line and in result files.
pub fn bits_to_string(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn bits_from_string(s: &str) -> anyhow::Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => bail!("unexpected character `{other}` in solution bit string"),
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundRecord {
    pub kind: String,
    pub m: u64,
    pub delta: f64,
    pub objective: u64,
    pub solution: String,
    pub subproblems_solved: usize,
    pub subproblems_skipped: usize,
    pub subproblems_pruned: usize,
    pub time_ms: f64,
}

pub fn kind_name(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Upper => "upper",
        BoundKind::Lower => "lower",
        BoundKind::Exact => "exact",
    }
}

impl From<&BoundResult> for BoundRecord {
    fn from(r: &BoundResult) -> Self {
        BoundRecord {
            kind: kind_name(r.kind).to_string(),
            m: r.m,
            delta: r.delta.value(),
            objective: r.objective,
            solution: bits_to_string(&r.solution),
            subproblems_solved: r.subproblems_solved,
            subproblems_skipped: r.subproblems_skipped,
            subproblems_pruned: r.subproblems_pruned,
            time_ms: r.wall_time.as_secs_f64() * 1e3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    pub m: u64,
    pub objective: u64,
    pub feasible: bool,
    pub subproblems_solved: usize,
    pub time_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactRecord {
    pub result: BoundRecord,
    pub iterations: Vec<IterationRecord>,
    pub knapsack_solves: usize,
    pub m_star: Option<u64>,
}

impl From<&ExactReport> for ExactRecord {
    fn from(r: &ExactReport) -> Self {
        ExactRecord {
            result: BoundRecord::from(&r.result),
            iterations: r
                .iterations
                .iter()
                .map(|it| IterationRecord {
                    m: it.m,
                    objective: it.objective,
                    feasible: it.feasible,
                    subproblems_solved: it.subproblems_solved,
                    time_ms: it.wall_time.as_secs_f64() * 1e3,
                })
                .collect(),
            knapsack_solves: r.knapsack_solves(),
            m_star: r.m_star,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_files() {
        let bad_n = r#"{"n": 2, "profits": [1], "means": ["1"], "sigmas": ["1"], "capacity": "3"}"#;
        assert!(instance_from_json(bad_n).is_err());
        let bad_dec = r#"{"n": 1, "profits": [1], "means": ["1e3"], "sigmas": ["1"], "capacity": "3"}"#;
        assert!(instance_from_json(bad_dec).is_err());
        let neg = r#"{"n": 1, "profits": [1], "means": ["1"], "sigmas": ["-1"], "capacity": "3"}"#;
        assert!(instance_from_json(neg).is_err());
        let zero_omega = r#"{"n": 1, "profits": [1], "means": ["1"], "sigmas": ["1"], "capacity": "3", "omega": "0"}"#;
        assert!(instance_from_json(zero_omega).is_err());
    }

    #[test]
    fn bit_strings() {
        assert_eq!(bits_from_string("0110").unwrap(), vec![false, true, true, false]);
        assert_eq!(bits_to_string(&[true, false]), "10");
        assert!(bits_from_string("01a").is_err());
    }
}
