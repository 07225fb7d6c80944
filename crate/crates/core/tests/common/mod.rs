#![allow(dead_code)]

use proptest::prelude::*;
use sockp_core::{Decimal, SockpInstance};

/// Instances with small integer profits and means, sigmas with two decimals
/// and a capacity around half the total mean weight.
pub fn instance(max_n: usize) -> impl Strategy<Value = SockpInstance> {
    (1..=max_n)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0u64..=100, n),
                prop::collection::vec(1i128..=100, n),
                prop::collection::vec(0i128..=1500, n),
                30u32..=70,
            )
        })
        .prop_map(|(profits, means, sigmas, pct)| {
            let total: i128 = means.iter().sum();
            let cap = total * pct as i128 / 100;
            SockpInstance::new(
                profits,
                means.into_iter().map(|a| Decimal::new(a, 0).unwrap()).collect(),
                sigmas.into_iter().map(|s| Decimal::new(s, 2).unwrap()).collect(),
                Decimal::new(cap, 0).unwrap(),
            )
            .unwrap()
        })
}

pub fn omega() -> impl Strategy<Value = Decimal> {
    prop_oneof![
        Just("1.96".parse().unwrap()),
        Just("4.36".parse().unwrap()),
        (1i128..=1200).prop_map(|w| Decimal::new(w, 2).unwrap()),
    ]
}

pub fn selections(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..(1 << n)).map(move |mask| (0..n).map(|j| mask >> j & 1 == 1).collect())
}

/// Exhaustive optimum of the cone-constrained problem.
pub fn brute_force(inst: &SockpInstance, omega: &Decimal) -> u64 {
    selections(inst.n())
        .filter(|x| sockp_core::model::is_soc_feasible(x, inst, omega))
        .map(|x| inst.profit_of(&x))
        .max()
        .unwrap_or(0)
}
