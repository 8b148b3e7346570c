//! Cost, effectiveness and the optimization objective.
//!
//! Cumulative infection follows exactly from the tree equations: integrating
//! `dR/dt = μ A + r̂ I` and `d(I + R)/dt = (σ + μ) A` from zero to infinity
//! gives
//!
//! ```text
//! ∫ (A + I) dt = Γ R(∞) - (r̂ - μ) / (r̂ (σ + μ)) · I(0),
//! Γ = (σ + r̂) / (r̂ (σ + μ)).
//! ```
//!
//! Effectiveness is the final number of susceptible trees estimated from the
//! final roguing counts. It replaces `S_v` by its disease-free value `N⁰_v`
//! in the psyllid equations, a first-order approximation that degrades once
//! a sizeable share of psyllids is infectious.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::EpidemicSummary;
use crate::model::{Orchard, Scenario, StrategyKind};
use crate::reproduction::{derived_quantities, local_r0_squared};
use crate::scalar::Scalar;

/// Weights of the cost functionals and the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights<T> {
    /// Infection weights `(M1, M2)` of the mechanical cost.
    pub infection_mechanical: [T; 2],
    /// Infection weights `(C1, C2)` of the chemical cost.
    pub infection_chemical: [T; 2],
    /// Control weights `x1..x4` on `m1², n1², m2², n2²`.
    pub control_mechanical: [T; 4],
    /// Control weights `y1..y4` on `p1², q1², p2², q2²`.
    pub control_chemical: [T; 4],
    /// Objective weight on cost.
    pub w1: T,
    /// Objective weight on `Ef1 + Ef2`.
    pub w2: T,
    /// Start of the control window (months).
    pub t_i: T,
    /// End of the control window; `None` uses the run's end time.
    pub t_f: Option<T>,
    /// When set, the weights only apply to this strategy.
    pub strategy: Option<StrategyKind>,
}

impl<T: Scalar> Default for CostWeights<T> {
    fn default() -> Self {
        let one = T::one();
        Self {
            infection_mechanical: [one; 2],
            infection_chemical: [one; 2],
            control_mechanical: [one; 4],
            control_chemical: [one; 4],
            w1: one,
            w2: one,
            t_i: T::zero(),
            t_f: None,
            strategy: None,
        }
    }
}

impl<T: Scalar> CostWeights<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, v: T| {
            if v > T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v.as_f64(),
                    reason: "weights must lie in (0, 1]",
                })
            }
        };
        for v in self.infection_mechanical.iter().chain(&self.infection_chemical) {
            unit("infection weight", *v)?;
        }
        for v in self.control_mechanical.iter().chain(&self.control_chemical) {
            unit("control weight", *v)?;
        }
        if !(self.t_i >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "t_i",
                value: self.t_i.as_f64(),
                reason: "must be nonnegative",
            });
        }
        if let Some(t_f) = self.t_f {
            if !(t_f > self.t_i) {
                return Err(Error::InvalidParameter {
                    name: "t_f",
                    value: t_f.as_f64(),
                    reason: "must exceed t_i",
                });
            }
        }
        Ok(())
    }

    fn infection(&self, strategy: StrategyKind) -> [T; 2] {
        match strategy {
            StrategyKind::Mechanical => self.infection_mechanical,
            StrategyKind::Chemical => self.infection_chemical,
        }
    }

    fn control(&self, strategy: StrategyKind) -> [T; 4] {
        match strategy {
            StrategyKind::Mechanical => self.control_mechanical,
            StrategyKind::Chemical => self.control_chemical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticConstants<T> {
    /// `Γ1 = (σ1 + r̂1) / (r̂1 (σ1 + μ1τ))` in months.
    pub gamma_1: T,
    pub gamma_2: T,
    /// `(μ1τ - r̂1) / (σ1 + r̂1)`, multiplies `I1(0)` in the final-size terms.
    pub symptomatic_seed_correction_1: T,
    pub symptomatic_seed_correction_2: T,
}

impl<T: Scalar> AnalyticConstants<T> {
    pub fn gamma(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.gamma_1,
            Orchard::Second => self.gamma_2,
        }
    }

    pub fn seed_correction(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.symptomatic_seed_correction_1,
            Orchard::Second => self.symptomatic_seed_correction_2,
        }
    }
}

pub fn analytic_constants<T: Scalar>(scenario: &Scenario<T>) -> Result<AnalyticConstants<T>> {
    let one = |o: Orchard| -> Result<(T, T)> {
        let p = scenario.params(o);
        let r = scenario.rates(o)?.r_tau_hat;
        if r == T::zero() {
            return Err(Error::DivisionByZero("roguing rate is zero"));
        }
        let gamma = (p.sigma + r) / (r * (p.sigma + p.mu_tau));
        let seed = (p.mu_tau - r) / (p.sigma + r);
        Ok((gamma, seed))
    };
    let (gamma_1, symptomatic_seed_correction_1) = one(Orchard::First)?;
    let (gamma_2, symptomatic_seed_correction_2) = one(Orchard::Second)?;
    Ok(AnalyticConstants {
        gamma_1,
        gamma_2,
        symptomatic_seed_correction_1,
        symptomatic_seed_correction_2,
    })
}

/// `∫₀^∞ (A + I) dt` of one orchard from its final roguing count and its
/// initial number of symptomatic trees.
pub fn cumulative_infectious_analytic<T: Scalar>(
    scenario: &Scenario<T>,
    orchard: Orchard,
    r_final: T,
    i_tau_0: T,
) -> Result<T> {
    if !(r_final >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "r_final",
            value: r_final.as_f64(),
            reason: "must be nonnegative",
        });
    }
    let p = scenario.params(orchard);
    let r = scenario.rates(orchard)?.r_tau_hat;
    if r == T::zero() {
        return Err(Error::DivisionByZero("roguing rate is zero"));
    }
    let leave = p.sigma + p.mu_tau;
    Ok(r_final / r * (p.sigma + r) / leave - (r - p.mu_tau) / (r * leave) * i_tau_0)
}

/// Both evaluations of a strategy cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyCost<T> {
    /// Infection part from final roguing counts (`Γ_i R_i(∞)` form).
    pub infection_reduced: T,
    /// Infection part from the numerically integrated `A + I`.
    pub infection_direct: T,
    /// `(t_f - t_i) Σ weight · control²`.
    pub control: T,
}

impl<T: Scalar> StrategyCost<T> {
    pub fn reduced(&self) -> T {
        self.infection_reduced + self.control
    }

    pub fn direct(&self) -> T {
        self.infection_direct + self.control
    }
}

/// Cost `C_X` (mechanical) or `C_Y` (chemical) of a finished run.
///
/// Controls are constant in time, so the control integral collapses to the
/// window length times the weighted squared controls.
pub fn strategy_cost<T: Scalar>(
    scenario: &Scenario<T>,
    weights: &CostWeights<T>,
    summary: &EpidemicSummary<T>,
) -> Result<StrategyCost<T>> {
    let strategy = scenario.strategy;
    if let Some(w) = weights.strategy {
        if w != strategy {
            return Err(Error::StrategyMismatch {
                weights: w.name(),
                scenario: strategy.name(),
            });
        }
    }
    let infection_w = weights.infection(strategy);
    let mut infection_reduced = T::zero();
    let mut infection_direct = T::zero();
    for (k, orchard) in Orchard::BOTH.into_iter().enumerate() {
        let i0 = scenario.initial.trees(orchard)[2];
        let reduced =
            cumulative_infectious_analytic(scenario, orchard, summary.r_final(orchard), i0)?;
        infection_reduced = infection_reduced + infection_w[k] * reduced;
        infection_direct = infection_direct + infection_w[k] * summary.cumulative_infectious(orchard);
    }

    let (a1, b1) = scenario.controls1.active_pair(strategy);
    let (a2, b2) = scenario.controls2.active_pair(strategy);
    let squares = [a1 * a1, b1 * b1, a2 * a2, b2 * b2];
    let weighted = weights
        .control(strategy)
        .iter()
        .zip(squares)
        .fold(T::zero(), |acc, (w, s)| acc + *w * s);
    let t_f = weights.t_f.unwrap_or(summary.end_time);
    let window = (t_f - weights.t_i).max(T::zero());

    Ok(StrategyCost {
        infection_reduced,
        infection_direct,
        control: window * weighted,
    })
}

/// Final-size estimate of `S_i(∞)` from arbitrary final roguing counts and
/// initial symptomatic trees.
pub fn final_size_estimate<T: Scalar>(
    scenario: &Scenario<T>,
    orchard: Orchard,
    r_final: [T; 2],
    i_tau_0: [T; 2],
) -> Result<T> {
    let d = derived_quantities(scenario)?;
    let consts = analytic_constants(scenario)?;
    let r10_sq = local_r0_squared(scenario, Orchard::First)?;
    let r20_sq = local_r0_squared(scenario, Orchard::Second)?;
    let beta1 = scenario.rates(Orchard::First)?.beta_tau_hat;
    let beta2 = scenario.rates(Orchard::Second)?.beta_tau_hat;
    let (phi11, phi12) = (scenario.phi11(), scenario.phi12);

    let removed1 = r_final[0] + consts.symptomatic_seed_correction_1 * i_tau_0[0];
    let removed2 = r_final[1] + consts.symptomatic_seed_correction_2 * i_tau_0[1];

    let exponent = match orchard {
        Orchard::First => {
            let n1 = scenario.orchard1.n_tau;
            let own = r10_sq * phi11 * phi11 / n1 * removed1;
            let cross = if phi12 == T::zero() {
                T::zero()
            } else {
                d.theta12 * r20_sq * beta1 / (n1 * beta2) * phi11 * phi12 * removed2
            };
            own + cross
        }
        Orchard::Second => {
            let n2 = scenario.orchard2.n_tau;
            let own = r20_sq / n2 * (T::one() + d.theta12 * phi12 * phi12) * removed2;
            let cross = if phi12 == T::zero() {
                T::zero()
            } else {
                r10_sq * beta2 / (n2 * beta1) * phi11 * phi12 * removed1
            };
            own + cross
        }
    };
    let s0 = scenario.initial.trees(orchard)[0];
    Ok(s0 * (-exponent).exp())
}

/// Effectiveness `Ef_i`: the final-size estimate of susceptible trees in
/// orchard `i` given the run's final roguing counts.
pub fn effectiveness<T: Scalar>(
    scenario: &Scenario<T>,
    orchard: Orchard,
    summary: &EpidemicSummary<T>,
) -> Result<T> {
    let i0 = [
        scenario.initial.trees(Orchard::First)[2],
        scenario.initial.trees(Orchard::Second)[2],
    ];
    final_size_estimate(
        scenario,
        orchard,
        [summary.r1_final, summary.r2_final],
        i0,
    )
}

/// Psyllid prevalence from which the final-size approximation is flagged.
pub const PREVALENCE_WARNING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessReport<T> {
    pub ef1: T,
    pub ef2: T,
    /// False when the peak infectious share of either psyllid population
    /// reached [`PREVALENCE_WARNING`].
    pub approximation_reliable: bool,
}

pub fn effectiveness_report<T: Scalar>(
    scenario: &Scenario<T>,
    summary: &EpidemicSummary<T>,
) -> Result<EffectivenessReport<T>> {
    let warn = T::lit(PREVALENCE_WARNING);
    Ok(EffectivenessReport {
        ef1: effectiveness(scenario, Orchard::First, summary)?,
        ef2: effectiveness(scenario, Orchard::Second, summary)?,
        approximation_reliable: summary.peak_vector_prevalence_1 < warn
            && summary.peak_vector_prevalence_2 < warn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective<T> {
    pub cost: StrategyCost<T>,
    pub ef1: T,
    pub ef2: T,
    /// `w1 · cost + w2 · (Ef1 + Ef2)` with the reduced cost.
    pub j: T,
}

pub fn evaluate_objective<T: Scalar>(
    scenario: &Scenario<T>,
    weights: &CostWeights<T>,
    summary: &EpidemicSummary<T>,
) -> Result<Objective<T>> {
    let cost = strategy_cost(scenario, weights, summary)?;
    let ef1 = effectiveness(scenario, Orchard::First, summary)?;
    let ef2 = effectiveness(scenario, Orchard::Second, summary)?;
    Ok(Objective {
        cost,
        ef1,
        ef2,
        j: weights.w1 * cost.reduced() + weights.w2 * (ef1 + ef2),
    })
}

/// Objective value `J`.
pub fn objective<T: Scalar>(
    scenario: &Scenario<T>,
    weights: &CostWeights<T>,
    summary: &EpidemicSummary<T>,
) -> Result<T> {
    Ok(evaluate_objective(scenario, weights, summary)?.j)
}
