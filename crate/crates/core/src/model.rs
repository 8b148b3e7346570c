//! Domain types and the vector field of the two-orchard SAIR–SI model.
//!
//! Trees in orchard *i* move through Susceptible → Asymptomatic →
//! symptomatic Infectious → Rogued; psyllids are Susceptible or Infectious.
//! A fraction `phi12` of orchard-1 psyllids feeds in orchard 2, the rest
//! (`phi11 = 1 - phi12`) stays home. Orchard-2 psyllids never leave.
//!
//! All rates are per month.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Biological and epidemiological constants of one orchard.
///
/// Missing fields deserialize to the baseline values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct OrchardParams<T> {
    /// Number of citrus trees.
    pub n_tau: T,
    /// Natural tree mortality.
    pub mu_tau: T,
    /// Baseline psyllid mortality.
    pub mu_v: T,
    /// Asymptomatic → symptomatic progression.
    pub sigma: T,
    /// Maximum psyllid abundance per tree.
    pub omega: T,
    /// Psyllid recruitment (psyllids per month).
    pub lambda_v: T,
    /// Probing rate of trees.
    pub b: T,
    /// Transmission probability psyllid → tree.
    pub pi_tau: T,
    /// Transmission probability tree → psyllid.
    pub pi_v: T,
}

impl<T: Scalar> OrchardParams<T> {
    /// Baseline column of the parameter table.
    pub fn baseline() -> Self {
        Self {
            n_tau: T::lit(2000.0),
            mu_tau: T::lit(0.0033),
            mu_v: T::lit(0.266),
            sigma: T::lit(0.2),
            omega: T::lit(100.0),
            lambda_v: T::lit(25_000.0),
            b: T::lit(1.15),
            pi_tau: T::lit(0.025),
            pi_v: T::lit(0.13),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu_tau", self.mu_tau),
            ("mu_v", self.mu_v),
            ("sigma", self.sigma),
            ("omega", self.omega),
            ("lambda_v", self.lambda_v),
            ("b", self.b),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > T::zero()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: value.as_f64(),
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if !(self.n_tau.is_finite() && self.n_tau >= T::one()) {
            return Err(Error::InvalidParameter {
                name: "n_tau",
                value: self.n_tau.as_f64(),
                reason: "must be at least 1",
            });
        }
        for (name, value) in [("pi_tau", self.pi_tau), ("pi_v", self.pi_v)] {
            if !(value >= T::zero() && value <= T::one()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: value.as_f64(),
                    reason: "must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Default for OrchardParams<T> {
    fn default() -> Self {
        Self::baseline()
    }
}

/// The four control knobs of one orchard, each in `[0, 1)`.
///
/// `m` reduces probing, `n` reduces vigilance (the roguing rate is `1 - n`),
/// `p` reduces psyllid abundance per tree and `q` boosts psyllid mortality.
/// A baseline roguing rate of 0.47 corresponds to `n = 0.53`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlSet<T> {
    pub m: T,
    pub n: T,
    pub p: T,
    pub q: T,
}

impl<T: Scalar> ControlSet<T> {
    pub fn zero() -> Self {
        Self {
            m: T::zero(),
            n: T::zero(),
            p: T::zero(),
            q: T::zero(),
        }
    }

    pub fn mechanical(m: T, n: T) -> Self {
        Self {
            m,
            n,
            ..Self::zero()
        }
    }

    pub fn chemical(p: T, q: T) -> Self {
        Self {
            p,
            q,
            ..Self::zero()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("m", self.m), ("n", self.n), ("p", self.p), ("q", self.q)] {
            if !(value >= T::zero() && value < T::one()) {
                return Err(Error::ControlOutOfRange {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// The two knobs a strategy is allowed to move.
    pub fn active_pair(&self, strategy: StrategyKind) -> (T, T) {
        match strategy {
            StrategyKind::Mechanical => (self.m, self.n),
            StrategyKind::Chemical => (self.p, self.q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Barriers, traps and vigilance: `m` and `n` only.
    #[default]
    Mechanical,
    /// Insecticide campaigns: `p` and `q` only.
    Chemical,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Mechanical => "mechanical",
            StrategyKind::Chemical => "chemical",
        }
    }

    /// Names of the four genes `(orchard 1 pair, orchard 2 pair)`.
    pub fn gene_names(self) -> [&'static str; 4] {
        match self {
            StrategyKind::Mechanical => ["m1", "n1", "m2", "n2"],
            StrategyKind::Chemical => ["p1", "q1", "p2", "q2"],
        }
    }

    /// Builds per-orchard control sets from the four strategy genes.
    pub fn controls_from_genes<T: Scalar>(self, genes: [T; 4]) -> (ControlSet<T>, ControlSet<T>) {
        match self {
            StrategyKind::Mechanical => (
                ControlSet::mechanical(genes[0], genes[1]),
                ControlSet::mechanical(genes[2], genes[3]),
            ),
            StrategyKind::Chemical => (
                ControlSet::chemical(genes[0], genes[1]),
                ControlSet::chemical(genes[2], genes[3]),
            ),
        }
    }
}

/// Orchard label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orchard {
    First,
    Second,
}

impl Orchard {
    pub const BOTH: [Orchard; 2] = [Orchard::First, Orchard::Second];

    pub fn number(self) -> usize {
        match self {
            Orchard::First => 1,
            Orchard::Second => 2,
        }
    }

    pub fn other(self) -> Orchard {
        match self {
            Orchard::First => Orchard::Second,
            Orchard::Second => Orchard::First,
        }
    }
}

/// Rates induced by a control set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates<T> {
    /// Psyllid → tree infection rate `(1 - m) b pi_tau`.
    pub beta_tau_hat: T,
    /// Roguing rate `1 - n`.
    pub r_tau_hat: T,
    /// Tree → psyllid infection rate `(1 - p) omega pi_v`.
    pub beta_v_hat: T,
    /// Controlled psyllid mortality `(1 + q) mu_v`.
    pub mu_v_hat: T,
}

pub fn effective_rates<T: Scalar>(
    params: &OrchardParams<T>,
    controls: &ControlSet<T>,
) -> Result<EffectiveRates<T>> {
    controls.validate()?;
    let one = T::one();
    Ok(EffectiveRates {
        beta_tau_hat: (one - controls.m) * params.b * params.pi_tau,
        r_tau_hat: one - controls.n,
        beta_v_hat: (one - controls.p) * params.omega * params.pi_v,
        mu_v_hat: (one + controls.q) * params.mu_v,
    })
}

/// Component names in storage order.
pub const STATE_NAMES: [&str; 12] = [
    "S1t", "A1t", "I1t", "R1t", "S1v", "I1v", "S2t", "A2t", "I2t", "R2t", "S2v", "I2v",
];

/// Indices into the 12-vector layout.
pub mod idx {
    pub const S1T: usize = 0;
    pub const A1T: usize = 1;
    pub const I1T: usize = 2;
    pub const R1T: usize = 3;
    pub const S1V: usize = 4;
    pub const I1V: usize = 5;
    pub const S2T: usize = 6;
    pub const A2T: usize = 7;
    pub const I2T: usize = 8;
    pub const R2T: usize = 9;
    pub const S2V: usize = 10;
    pub const I2V: usize = 11;

    /// A, I and I_v of both orchards.
    pub const INFECTIOUS: [usize; 6] = [A1T, I1T, I1V, A2T, I2T, I2V];
}

/// The twelve state variables (trees and psyllids of both orchards).
///
/// The same type carries time derivatives, in units per month.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemState<T> {
    pub s1t: T,
    pub a1t: T,
    pub i1t: T,
    pub r1t: T,
    pub s1v: T,
    pub i1v: T,
    pub s2t: T,
    pub a2t: T,
    pub i2t: T,
    pub r2t: T,
    pub s2v: T,
    pub i2v: T,
}

impl<T: Scalar> SystemState<T> {
    pub fn to_array(&self) -> [T; 12] {
        [
            self.s1t, self.a1t, self.i1t, self.r1t, self.s1v, self.i1v, self.s2t, self.a2t,
            self.i2t, self.r2t, self.s2v, self.i2v,
        ]
    }

    pub fn from_array(x: [T; 12]) -> Self {
        Self {
            s1t: x[0],
            a1t: x[1],
            i1t: x[2],
            r1t: x[3],
            s1v: x[4],
            i1v: x[5],
            s2t: x[6],
            a2t: x[7],
            i2t: x[8],
            r2t: x[9],
            s2v: x[10],
            i2v: x[11],
        }
    }

    /// `S + A + I + R` of one orchard.
    pub fn tree_total(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.s1t + self.a1t + self.i1t + self.r1t,
            Orchard::Second => self.s2t + self.a2t + self.i2t + self.r2t,
        }
    }

    /// `S_v + I_v` of one orchard.
    pub fn vector_total(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.s1v + self.i1v,
            Orchard::Second => self.s2v + self.i2v,
        }
    }

    /// `(S, A, I, R)` of one orchard.
    pub fn trees(&self, orchard: Orchard) -> [T; 4] {
        match orchard {
            Orchard::First => [self.s1t, self.a1t, self.i1t, self.r1t],
            Orchard::Second => [self.s2t, self.a2t, self.i2t, self.r2t],
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|v| *v >= T::zero())
    }
}

/// Where the single seeded asymptomatic tree of orchard 1 comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// `S = N, A = 1`: orchard 1 then holds `N + 1` trees.
    #[default]
    Additional,
    /// `S = N - 1, A = 1`: orchard 1 holds exactly `N` trees.
    FromSusceptibles,
}

/// Everything needed to evaluate or integrate the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Scenario<T> {
    pub orchard1: OrchardParams<T>,
    pub orchard2: OrchardParams<T>,
    /// Fraction of orchard-1 psyllids present in orchard 2.
    pub phi12: T,
    pub strategy: StrategyKind,
    pub controls1: ControlSet<T>,
    pub controls2: ControlSet<T>,
    pub initial: SystemState<T>,
    pub horizon_months: T,
    pub dt_months: T,
}

impl<T: Scalar> Scenario<T> {
    /// Baseline parameters in both orchards, `phi12 = 0.35`, no control,
    /// default initial conditions, 240-month horizon at `dt = 0.01`.
    pub fn baseline(strategy: StrategyKind) -> Self {
        Self::from_parts(
            OrchardParams::baseline(),
            OrchardParams::baseline(),
            T::lit(0.35),
            strategy,
            ControlSet::zero(),
            ControlSet::zero(),
        )
    }

    /// Builds a scenario with the default initial state.
    pub fn from_parts(
        orchard1: OrchardParams<T>,
        orchard2: OrchardParams<T>,
        phi12: T,
        strategy: StrategyKind,
        controls1: ControlSet<T>,
        controls2: ControlSet<T>,
    ) -> Self {
        let mut scenario = Self {
            orchard1,
            orchard2,
            phi12,
            strategy,
            controls1,
            controls2,
            initial: SystemState::default(),
            horizon_months: T::lit(240.0),
            dt_months: T::lit(0.01),
        };
        scenario.initial = default_initial_state(&scenario);
        scenario
    }

    /// Replaces the controls and keeps everything else.
    pub fn with_controls(mut self, controls1: ControlSet<T>, controls2: ControlSet<T>) -> Self {
        self.controls1 = controls1;
        self.controls2 = controls2;
        self
    }

    /// Installs four strategy genes as the controls of both orchards.
    pub fn with_genes(self, genes: [T; 4]) -> Self {
        let (c1, c2) = self.strategy.controls_from_genes(genes);
        self.with_controls(c1, c2)
    }

    pub fn phi11(&self) -> T {
        T::one() - self.phi12
    }

    pub fn params(&self, orchard: Orchard) -> &OrchardParams<T> {
        match orchard {
            Orchard::First => &self.orchard1,
            Orchard::Second => &self.orchard2,
        }
    }

    pub fn controls(&self, orchard: Orchard) -> &ControlSet<T> {
        match orchard {
            Orchard::First => &self.controls1,
            Orchard::Second => &self.controls2,
        }
    }

    pub fn rates(&self, orchard: Orchard) -> Result<EffectiveRates<T>> {
        effective_rates(self.params(orchard), self.controls(orchard))
    }

    /// Tree total of an orchard at `t = 0`, which is conserved along
    /// trajectories.
    pub fn conserved_trees(&self, orchard: Orchard) -> T {
        self.initial.tree_total(orchard)
    }

    pub fn validate(&self) -> Result<()> {
        self.orchard1.validate()?;
        self.orchard2.validate()?;
        self.controls1.validate()?;
        self.controls2.validate()?;
        if !(self.phi12 >= T::zero() && self.phi12 <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "phi12",
                value: self.phi12.as_f64(),
                reason: "must lie in [0, 1]",
            });
        }
        for (label, c) in [("orchard 1", &self.controls1), ("orchard 2", &self.controls2)] {
            let (off_a, off_b) = match self.strategy {
                StrategyKind::Mechanical => (c.p, c.q),
                StrategyKind::Chemical => (c.m, c.n),
            };
            if off_a != T::zero() || off_b != T::zero() {
                let knobs = match self.strategy {
                    StrategyKind::Mechanical => "p and q",
                    StrategyKind::Chemical => "m and n",
                };
                return Err(Error::InvalidScenario(format!(
                    "{} strategy requires {knobs} = 0 in {label}",
                    self.strategy.name()
                )));
            }
        }
        if !self.initial.is_nonnegative() || !self.initial.to_array().iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidScenario(
                "initial state must be finite and nonnegative".into(),
            ));
        }
        for orchard in Orchard::BOTH {
            let n = self.params(orchard).n_tau;
            let total = self.initial.tree_total(orchard);
            // as-written seeding adds one tree to orchard 1
            let slack = T::one() + T::lit(1e-9) * n;
            if (total - n).abs() > slack {
                return Err(Error::InvalidScenario(format!(
                    "initial trees of orchard {} sum to {total}, expected {n} (or {n} + 1)",
                    orchard.number()
                )));
            }
        }
        if !(self.dt_months.is_finite() && self.dt_months > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "dt_months",
                value: self.dt_months.as_f64(),
                reason: "must be strictly positive",
            });
        }
        if !(self.horizon_months.is_finite() && self.horizon_months >= self.dt_months) {
            return Err(Error::InvalidParameter {
                name: "horizon_months",
                value: self.horizon_months.as_f64(),
                reason: "must be at least dt_months",
            });
        }
        Ok(())
    }
}

/// Precomputed coefficients of the right-hand side.
#[derive(Debug, Clone, Copy)]
pub(crate) struct VectorField<T> {
    phi11: T,
    phi12: T,
    n1: T,
    n2: T,
    lambda1: T,
    lambda2: T,
    sigma1: T,
    sigma2: T,
    mu1t: T,
    mu2t: T,
    rates1: EffectiveRates<T>,
    rates2: EffectiveRates<T>,
}

impl<T: Scalar> VectorField<T> {
    pub(crate) fn new(scenario: &Scenario<T>) -> Result<Self> {
        Ok(Self {
            phi11: scenario.phi11(),
            phi12: scenario.phi12,
            n1: scenario.orchard1.n_tau,
            n2: scenario.orchard2.n_tau,
            lambda1: scenario.orchard1.lambda_v,
            lambda2: scenario.orchard2.lambda_v,
            sigma1: scenario.orchard1.sigma,
            sigma2: scenario.orchard2.sigma,
            mu1t: scenario.orchard1.mu_tau,
            mu2t: scenario.orchard2.mu_tau,
            rates1: scenario.rates(Orchard::First)?,
            rates2: scenario.rates(Orchard::Second)?,
        })
    }

    #[inline]
    pub(crate) fn eval(&self, x: &[T; 12]) -> [T; 12] {
        let [s1t, a1t, i1t, _r1t, s1v, i1v, s2t, a2t, i2t, _r2t, s2v, i2v] = *x;
        let (r1, r2) = (&self.rates1, &self.rates2);

        // tree infections
        let inf1 = r1.beta_tau_hat * s1t * (self.phi11 * i1v) / self.n1;
        let inf2 = r2.beta_tau_hat * s2t * i2v / self.n2
            + r2.beta_tau_hat * s2t * (self.phi12 * i1v) / self.n2;

        // psyllid infections; orchard-1 psyllids also feed in orchard 2
        let sick1 = a1t + i1t;
        let sick2 = a2t + i2t;
        let vinf1 = r1.beta_v_hat * self.phi11 * s1v * sick1 / self.n1
            + r2.beta_v_hat * self.phi12 * s1v * sick2 / self.n2;
        let vinf2 = r2.beta_v_hat * s2v * sick2 / self.n2;

        let leave1 = self.sigma1 + self.mu1t;
        let leave2 = self.sigma2 + self.mu2t;
        [
            -inf1,
            inf1 - leave1 * a1t,
            self.sigma1 * a1t - r1.r_tau_hat * i1t,
            self.mu1t * a1t + r1.r_tau_hat * i1t,
            self.lambda1 - vinf1 - r1.mu_v_hat * s1v,
            vinf1 - r1.mu_v_hat * i1v,
            -inf2,
            inf2 - leave2 * a2t,
            self.sigma2 * a2t - r2.r_tau_hat * i2t,
            self.mu2t * a2t + r2.r_tau_hat * i2t,
            self.lambda2 - vinf2 - r2.mu_v_hat * s2v,
            vinf2 - r2.mu_v_hat * i2v,
        ]
    }
}

/// Right-hand side of the twelve-equation system at `state`.
pub fn rhs<T: Scalar>(state: &SystemState<T>, scenario: &Scenario<T>) -> Result<SystemState<T>> {
    let x = state.to_array();
    if let Some(k) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState {
            component: STATE_NAMES[k],
            value: x[k].as_f64(),
            time: f64::NAN,
        });
    }
    let field = VectorField::new(scenario)?;
    Ok(SystemState::from_array(field.eval(&x)))
}

/// Disease-free equilibrium: all trees susceptible, psyllids at the
/// controlled carrying level `Λ / μ̂_v`.
///
/// With zero chemical control (`q = 0`) this coincides with `Λ / μ_v`.
pub fn disease_free_equilibrium<T: Scalar>(scenario: &Scenario<T>) -> Result<SystemState<T>> {
    let r1 = scenario.rates(Orchard::First)?;
    let r2 = scenario.rates(Orchard::Second)?;
    Ok(SystemState {
        s1t: scenario.orchard1.n_tau,
        s1v: scenario.orchard1.lambda_v / r1.mu_v_hat,
        s2t: scenario.orchard2.n_tau,
        s2v: scenario.orchard2.lambda_v / r2.mu_v_hat,
        ..SystemState::default()
    })
}

/// One asymptomatic tree in orchard 1, everything else susceptible, psyllid
/// populations at their uncontrolled level `Λ / μ_v`.
pub fn default_initial_state<T: Scalar>(scenario: &Scenario<T>) -> SystemState<T> {
    default_initial_state_with(scenario, SeedPolicy::Additional)
}

pub fn default_initial_state_with<T: Scalar>(
    scenario: &Scenario<T>,
    seeding: SeedPolicy,
) -> SystemState<T> {
    let (o1, o2) = (&scenario.orchard1, &scenario.orchard2);
    let s1t = match seeding {
        SeedPolicy::Additional => o1.n_tau,
        SeedPolicy::FromSusceptibles => o1.n_tau - T::one(),
    };
    SystemState {
        s1t,
        a1t: T::one(),
        s1v: o1.lambda_v / o1.mu_v,
        s2t: o2.n_tau,
        s2v: o2.lambda_v / o2.mu_v,
        ..SystemState::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> Scenario<f64> {
        Scenario::baseline(StrategyKind::Mechanical)
    }

    #[test]
    fn zero_control_rates_are_the_uncontrolled_products() {
        let p = OrchardParams::<f64>::baseline();
        let r = effective_rates(&p, &ControlSet::zero()).unwrap();
        assert_eq!(r.beta_tau_hat, 1.15 * 0.025);
        assert_eq!(r.r_tau_hat, 1.0);
        assert_eq!(r.beta_v_hat, 100.0 * 0.13);
        assert_eq!(r.mu_v_hat, 0.266);
    }

    #[test]
    fn mortality_boost_scales_by_one_plus_q() {
        let p = OrchardParams::<f64>::baseline();
        let r = effective_rates(&p, &ControlSet::chemical(0.0, 0.5)).unwrap();
        assert!((r.mu_v_hat - 0.399).abs() < 1e-15);
    }

    #[test]
    fn control_of_one_is_rejected() {
        let p = OrchardParams::<f64>::baseline();
        let err = effective_rates(&p, &ControlSet::mechanical(0.2, 1.0)).unwrap_err();
        assert!(matches!(err, Error::ControlOutOfRange { name: "n", .. }));
        let err = effective_rates(&p, &ControlSet::chemical(-0.1, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ControlOutOfRange { name: "p", .. }));
    }

    #[test]
    fn default_initial_state_matches_seeding() {
        let s = baseline();
        let x = s.initial;
        assert_eq!(x.s1t, 2000.0);
        assert_eq!(x.a1t, 1.0);
        assert_eq!(x.s1v, 25_000.0 / 0.266);
        assert_eq!((x.a2t, x.i2t, x.i2v), (0.0, 0.0, 0.0));
        assert_eq!(x.s1t + x.a1t, 2001.0);

        let strict = default_initial_state_with(&s, SeedPolicy::FromSusceptibles);
        assert_eq!(strict.tree_total(Orchard::First), 2000.0);
    }

    #[test]
    fn dfe_uses_controlled_mortality() {
        let s = baseline();
        let p = disease_free_equilibrium(&s).unwrap();
        assert_eq!(p.s1v, 25_000.0 / 0.266);

        // q = 1 is outside the legal control range, so build the rates by hand
        let mut o1 = OrchardParams::<f64>::baseline();
        o1.mu_v *= 2.0;
        let doubled = Scenario::from_parts(
            o1,
            OrchardParams::baseline(),
            0.35,
            StrategyKind::Chemical,
            ControlSet::zero(),
            ControlSet::zero(),
        );
        let p = disease_free_equilibrium(&doubled).unwrap();
        assert!((p.s1v - 25_000.0 / (2.0 * 0.266)).abs() < 1e-9);
    }

    #[test]
    fn dfe_is_stationary() {
        let s = Scenario::<f64>::baseline(StrategyKind::Chemical)
            .with_controls(ControlSet::chemical(0.3, 0.4), ControlSet::chemical(0.1, 0.7));
        let p = disease_free_equilibrium(&s).unwrap();
        let d = rhs(&p, &s).unwrap().to_array();
        for (k, v) in d.iter().enumerate() {
            assert!(v.abs() < 1e-9, "component {} = {v}", STATE_NAMES[k]);
        }
    }

    #[test]
    fn orchard_two_has_no_force_of_infection_at_t0() {
        let s = baseline().with_controls(
            ControlSet::mechanical(0.29, 0.395),
            ControlSet::mechanical(0.07, 0.67),
        );
        let d = rhs(&s.initial, &s).unwrap();
        assert_eq!(d.a2t, 0.0);
        assert_eq!(d.s2t, 0.0);
        assert_eq!(d.s1t, 0.0);
    }

    #[test]
    fn non_finite_state_is_rejected() {
        let s = baseline();
        let mut x = s.initial;
        x.i2v = f64::NAN;
        assert!(matches!(
            rhs(&x, &s),
            Err(Error::NonFiniteState { component: "I2v", .. })
        ));
    }

    #[test]
    fn validation_catches_strategy_violations() {
        let s = baseline().with_controls(ControlSet::chemical(0.2, 0.0), ControlSet::zero());
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        let mut s = baseline();
        s.phi12 = 1.5;
        assert!(s.validate().is_err());
        assert!(baseline().validate().is_ok());
    }

    #[test]
    fn single_precision_evaluates() {
        let s = Scenario::<f32>::baseline(StrategyKind::Mechanical);
        let d = rhs(&s.initial, &s).unwrap();
        assert!(d.a1t < 0.0);
    }
}
