mod common;

use orchard_duo::integrator::{integrate_with, IntegratorOptions};
use orchard_duo::model::{
    default_initial_state, disease_free_equilibrium, rhs, ControlSet, Scenario, SystemState,
};
use orchard_duo::{Orchard, StrategyKind};
use proptest::prelude::*;

use common::{rel, scenario};

/// Keeps the default step of 0.01: the stiffest sampled tree infection rate
/// is near 200 per month, beyond the RK4 stability limit at 0.05.
fn short(mut s: Scenario<f64>, months: f64) -> Scenario<f64> {
    s.horizon_months = months;
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_totals_are_conserved(s in scenario()) {
        let s = short(s, 60.0);
        let traj = integrate_with(&s, &IntegratorOptions::default()).unwrap();
        for o in Orchard::BOTH {
            let n0 = s.conserved_trees(o);
            for st in &traj.states {
                prop_assert!(rel(st.tree_total(o), n0) <= 1e-8);
            }
        }
    }

    #[test]
    fn vector_field_points_inward_on_the_boundary(
        s in scenario(),
        x in prop::array::uniform12(0.0..5000.0f64),
        zero in 0usize..12,
    ) {
        let mut x = x;
        x[zero] = 0.0;
        let d = rhs(&SystemState::from_array(x), &s).unwrap().to_array();
        prop_assert!(d[zero] >= 0.0, "component {zero} derivative {}", d[zero]);
    }

    #[test]
    fn trajectories_stay_nonnegative_and_monotone(s in scenario()) {
        let s = short(s, 80.0);
        let traj = integrate_with(&s, &IntegratorOptions::default()).unwrap();
        for w in traj.states.windows(2) {
            prop_assert!(w[1].is_nonnegative());
            prop_assert!(w[1].r1t >= w[0].r1t && w[1].r2t >= w[0].r2t);
            prop_assert!(w[1].s1t <= w[0].s1t && w[1].s2t <= w[0].s2t);
        }
    }

    #[test]
    fn dfe_is_an_equilibrium(s in scenario()) {
        let p = disease_free_equilibrium(&s).unwrap();
        let d = rhs(&p, &s).unwrap().to_array();
        let scale = p.s1v.max(p.s2v);
        for v in d {
            prop_assert!(v.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn no_dispersal_keeps_orchard_two_clean(s in scenario()) {
        let mut s = short(s, 60.0);
        s.phi12 = 0.0;
        let traj = integrate_with(&s, &IntegratorOptions::default()).unwrap();
        for st in &traj.states {
            prop_assert_eq!(st.a2t + st.i2t + st.r2t + st.i2v, 0.0);
            prop_assert_eq!(st.s2t, s.orchard2.n_tau);
        }
    }
}

#[test]
fn orchard_one_dynamics_ignore_orchard_two_without_dispersal() {
    let mut a = Scenario::<f64>::baseline(StrategyKind::Mechanical)
        .with_controls(ControlSet::mechanical(0.3, 0.4), ControlSet::mechanical(0.1, 0.2));
    a.phi12 = 0.0;
    a.horizon_months = 50.0;
    let mut b = a.clone();
    b.orchard2.b = 0.4;
    b.orchard2.lambda_v = 9000.0;
    b.controls2 = ControlSet::mechanical(0.8, 0.9);
    b.initial = default_initial_state(&b);
    let ta = integrate_with(&a, &IntegratorOptions::default()).unwrap();
    let tb = integrate_with(&b, &IntegratorOptions::default()).unwrap();
    for (x, y) in ta.states.iter().zip(&tb.states) {
        assert_eq!(
            [x.s1t, x.a1t, x.i1t, x.r1t, x.s1v, x.i1v],
            [y.s1t, y.a1t, y.i1t, y.r1t, y.s1v, y.i1v]
        );
    }
}

#[test]
fn controls_outside_unit_interval_are_rejected() {
    let s = Scenario::<f64>::baseline(StrategyKind::Mechanical)
        .with_controls(ControlSet::mechanical(1.0, 0.0), ControlSet::zero());
    assert!(s.validate().is_err());
    let s = Scenario::<f64>::baseline(StrategyKind::Mechanical)
        .with_controls(ControlSet::chemical(0.2, 0.0), ControlSet::zero());
    assert!(s.validate().is_err());
}
