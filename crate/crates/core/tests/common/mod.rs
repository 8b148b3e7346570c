#![allow(dead_code)]

use orchard_duo::model::{ControlSet, OrchardParams, Scenario};
use orchard_duo::StrategyKind;
use proptest::prelude::*;

pub fn orchard() -> impl Strategy<Value = OrchardParams<f64>> {
    (
        500.0..5000.0f64,
        0.001..0.01f64,
        0.1..0.5f64,
        0.05..0.5f64,
        20.0..200.0f64,
        5_000.0..50_000.0f64,
        0.2..2.0f64,
        0.005..0.1f64,
        0.02..0.3f64,
    )
        .prop_map(|(n, mt, mv, s, w, l, b, pt, pv)| OrchardParams {
            n_tau: n.round(),
            mu_tau: mt,
            mu_v: mv,
            sigma: s,
            omega: w,
            lambda_v: l,
            b,
            pi_tau: pt,
            pi_v: pv,
        })
}

pub fn strategy_kind() -> impl Strategy<Value = StrategyKind> {
    prop_oneof![Just(StrategyKind::Mechanical), Just(StrategyKind::Chemical)]
}

/// Valid scenario with the default initial state. Controls stay below 0.95
/// so roguing never stalls completely.
pub fn scenario() -> impl Strategy<Value = Scenario<f64>> {
    (
        orchard(),
        orchard(),
        0.0..=1.0f64,
        strategy_kind(),
        prop::array::uniform4(0.0..0.95f64),
    )
        .prop_map(|(o1, o2, phi, kind, g)| {
            Scenario::from_parts(o1, o2, phi, kind, ControlSet::zero(), ControlSet::zero())
                .with_genes(g)
        })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
