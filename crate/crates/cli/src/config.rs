//! JSON run configuration. Every field is optional; missing fields take the
//! baseline parameter table and the library defaults.

use std::path::Path;

use orchard_duo::analytics::CostWeights;
use orchard_duo::ga::GaConfig;
use orchard_duo::integrator::IntegratorOptions;
use orchard_duo::model::{default_initial_state_with, ControlSet, OrchardParams, Scenario};
use orchard_duo::sensitivity::{ParameterRange, SweepParameter};
use orchard_duo::{SeedPolicy, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for the stochastic commands.
    pub seed: Option<u64>,
    pub orchard1: OrchardParams<f64>,
    pub orchard2: OrchardParams<f64>,
    pub coupling: Coupling,
    pub controls: Controls,
    pub weights: Weights,
    pub integrator: Integrator,
    pub ga: Ga,
    pub sensitivity: Sensitivity,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            orchard1: OrchardParams::baseline(),
            orchard2: OrchardParams::baseline(),
            coupling: Coupling::default(),
            controls: Controls::default(),
            weights: Weights::default(),
            integrator: Integrator::default(),
            ga: Ga::default(),
            sensitivity: Sensitivity::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Coupling {
    pub phi12: f64,
}

impl Default for Coupling {
    fn default() -> Self {
        Self { phi12: 0.35 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Controls {
    pub strategy: StrategyKind,
    pub m1: f64,
    pub n1: f64,
    pub m2: f64,
    pub n2: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub infection_mechanical: [f64; 2],
    pub infection_chemical: [f64; 2],
    pub control_mechanical: [f64; 4],
    pub control_chemical: [f64; 4],
    pub w1: f64,
    pub w2: f64,
    pub t_i: f64,
    /// `null` ends the control window at the run's end time.
    pub t_f: Option<f64>,
}

impl Default for Weights {
    fn default() -> Self {
        let w = CostWeights::<f64>::default();
        Self {
            infection_mechanical: w.infection_mechanical,
            infection_chemical: w.infection_chemical,
            control_mechanical: w.control_mechanical,
            control_chemical: w.control_chemical,
            w1: w.w1,
            w2: w.w2,
            t_i: w.t_i,
            t_f: w.t_f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Integrator {
    pub dt_months: f64,
    pub horizon_months: f64,
    pub eps_inf: Option<f64>,
    pub clamp_tol: f64,
    /// Keep every `stride`-th step in `trajectory.csv`.
    pub stride: usize,
    pub stop_at_steady_state: bool,
    pub seed_policy: SeedPolicy,
}

impl Default for Integrator {
    fn default() -> Self {
        let o = IntegratorOptions::<f64>::default();
        Self {
            dt_months: 0.01,
            horizon_months: 240.0,
            eps_inf: o.eps_inf,
            clamp_tol: o.clamp_tol,
            stride: o.stride,
            stop_at_steady_state: o.stop_at_steady_state,
            seed_policy: SeedPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ga {
    pub population_size: usize,
    pub mating_pool_size: usize,
    pub mutation_prob: f64,
    pub max_generations: usize,
    pub r_obj: f64,
    pub r1_target: Option<f64>,
    pub r2_target: Option<f64>,
    pub feasibility_tol: Option<f64>,
    pub stall_generations: usize,
    pub stall_tol: f64,
    pub penalty_scale: Option<f64>,
}

impl Default for Ga {
    fn default() -> Self {
        let g = GaConfig::default();
        Self {
            population_size: g.population_size,
            mating_pool_size: g.mating_pool_size,
            mutation_prob: g.mutation_prob,
            max_generations: g.max_generations,
            r_obj: g.r_obj,
            r1_target: g.r1_target,
            r2_target: g.r2_target,
            feasibility_tol: g.feasibility_tol,
            stall_generations: g.stall_generations,
            stall_tol: g.stall_tol,
            penalty_scale: g.penalty_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sensitivity {
    /// Empty means the strategy's four knobs plus `phi12`, each over
    /// `[0, 1)`.
    pub parameters: Vec<Range>,
    pub n_samples: usize,
    pub n_bins: usize,
}

impl Default for Sensitivity {
    fn default() -> Self {
        Self {
            parameters: Vec::new(),
            n_samples: 10_000,
            n_bins: 50,
        }
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        reason: reason.into(),
    }
}

fn check(ok: bool, field: &str, reason: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(invalid(field, reason))
    }
}

fn check_orchard(p: &OrchardParams<f64>, section: &str) -> Result<(), CliError> {
    let f = |name: &str| format!("{section}.{name}");
    check(p.n_tau.is_finite() && p.n_tau >= 1.0, &f("n_tau"), "must be at least 1")?;
    for (name, v) in [
        ("mu_tau", p.mu_tau),
        ("mu_v", p.mu_v),
        ("sigma", p.sigma),
        ("omega", p.omega),
        ("lambda_v", p.lambda_v),
        ("b", p.b),
    ] {
        check(v.is_finite() && v > 0.0, &f(name), "must be finite and > 0")?;
    }
    for (name, v) in [("pi_tau", p.pi_tau), ("pi_v", p.pi_v)] {
        check((0.0..=1.0).contains(&v), &f(name), "must lie in [0, 1]")?;
    }
    Ok(())
}

fn check_unit_weight(v: f64, field: String) -> Result<(), CliError> {
    check(v > 0.0 && v <= 1.0, &field, "must lie in (0, 1]")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = if text.trim().is_empty() {
            RunConfig::default()
        } else {
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn strategy(&self) -> StrategyKind {
        self.controls.strategy
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_orchard(&self.orchard1, "orchard1")?;
        check_orchard(&self.orchard2, "orchard2")?;
        check(
            (0.0..=1.0).contains(&self.coupling.phi12),
            "coupling.phi12",
            "must lie in [0, 1]",
        )?;

        let c = &self.controls;
        let knobs = [
            ("m1", c.m1),
            ("n1", c.n1),
            ("m2", c.m2),
            ("n2", c.n2),
            ("p1", c.p1),
            ("q1", c.q1),
            ("p2", c.p2),
            ("q2", c.q2),
        ];
        for (name, v) in knobs {
            check(
                (0.0..1.0).contains(&v),
                &format!("controls.{name}"),
                "must lie in [0, 1)",
            )?;
        }
        let off: &[(&str, f64)] = match c.strategy {
            StrategyKind::Mechanical => &knobs[4..],
            StrategyKind::Chemical => &knobs[..4],
        };
        for (name, v) in off {
            check(
                *v == 0.0,
                &format!("controls.{name}"),
                &format!("must be 0 under {} control", c.strategy.name()),
            )?;
        }

        let w = &self.weights;
        for (k, v) in w.infection_mechanical.iter().enumerate() {
            check_unit_weight(*v, format!("weights.infection_mechanical[{k}]"))?;
        }
        for (k, v) in w.infection_chemical.iter().enumerate() {
            check_unit_weight(*v, format!("weights.infection_chemical[{k}]"))?;
        }
        for (k, v) in w.control_mechanical.iter().enumerate() {
            check_unit_weight(*v, format!("weights.control_mechanical[{k}]"))?;
        }
        for (k, v) in w.control_chemical.iter().enumerate() {
            check_unit_weight(*v, format!("weights.control_chemical[{k}]"))?;
        }
        check(w.w1 >= 0.0 && w.w1.is_finite(), "weights.w1", "must be finite and >= 0")?;
        check(w.w2 >= 0.0 && w.w2.is_finite(), "weights.w2", "must be finite and >= 0")?;
        check(w.t_i >= 0.0 && w.t_i.is_finite(), "weights.t_i", "must be finite and >= 0")?;
        if let Some(t_f) = w.t_f {
            check(t_f > w.t_i && t_f.is_finite(), "weights.t_f", "must be finite and > t_i")?;
        }

        let i = &self.integrator;
        check(
            i.dt_months > 0.0 && i.dt_months.is_finite(),
            "integrator.dt_months",
            "must be finite and > 0",
        )?;
        check(
            i.horizon_months >= i.dt_months && i.horizon_months.is_finite(),
            "integrator.horizon_months",
            "must be finite and >= dt_months",
        )?;
        if let Some(e) = i.eps_inf {
            check(e > 0.0, "integrator.eps_inf", "must be > 0")?;
        }
        check(i.clamp_tol >= 0.0, "integrator.clamp_tol", "must be >= 0")?;
        check(i.stride >= 1, "integrator.stride", "must be at least 1")?;

        let g = &self.ga;
        check(
            g.mating_pool_size >= 2 && g.mating_pool_size < g.population_size,
            "ga.mating_pool_size",
            "must satisfy 2 <= mating_pool_size < population_size",
        )?;
        check(
            (0.0..=1.0).contains(&g.mutation_prob),
            "ga.mutation_prob",
            "must lie in [0, 1]",
        )?;
        check(g.max_generations >= 1, "ga.max_generations", "must be at least 1")?;
        check(g.r_obj > 0.0 && g.r_obj.is_finite(), "ga.r_obj", "must be finite and > 0")?;
        if let (Some(a), Some(b)) = (g.r1_target, g.r2_target) {
            check(
                (a + b - g.r_obj).abs() <= 1e-9 * g.r_obj,
                "ga.r2_target",
                "r1_target + r2_target must equal r_obj",
            )?;
        }
        for (name, t) in [("ga.r1_target", g.r1_target), ("ga.r2_target", g.r2_target)] {
            if let Some(t) = t {
                check(t >= 0.0, name, "must be >= 0")?;
            }
        }
        if let Some(t) = g.feasibility_tol {
            check(t > 0.0, "ga.feasibility_tol", "must be > 0")?;
        }
        if let Some(p) = g.penalty_scale {
            check(p > 0.0, "ga.penalty_scale", "must be > 0")?;
        }

        let s = &self.sensitivity;
        check(s.n_samples >= 2, "sensitivity.n_samples", "must be at least 2")?;
        check(s.n_bins >= 1, "sensitivity.n_bins", "must be at least 1")?;
        for (k, r) in s.parameters.iter().enumerate() {
            let field = format!("sensitivity.parameters[{k}]");
            let name: SweepParameter = r.name.parse().map_err(|_| {
                invalid(
                    format!("{field}.name"),
                    "must be one of m1, n1, m2, n2, p1, q1, p2, q2, phi12",
                )
            })?;
            ParameterRange::new(name, r.low, r.high)
                .map_err(|_| invalid(field, "needs 0 <= low < high <= 1"))?;
        }

        // anything the library still rejects
        self.scenario()
            .validate()
            .map_err(|e| invalid("scenario", e.to_string()))?;
        Ok(())
    }

    pub fn scenario(&self) -> Scenario<f64> {
        let c = &self.controls;
        let (c1, c2) = match c.strategy {
            StrategyKind::Mechanical => (
                ControlSet::mechanical(c.m1, c.n1),
                ControlSet::mechanical(c.m2, c.n2),
            ),
            StrategyKind::Chemical => (
                ControlSet::chemical(c.p1, c.q1),
                ControlSet::chemical(c.p2, c.q2),
            ),
        };
        let mut s = Scenario::from_parts(
            self.orchard1,
            self.orchard2,
            self.coupling.phi12,
            c.strategy,
            c1,
            c2,
        );
        s.initial = default_initial_state_with(&s, self.integrator.seed_policy);
        s.horizon_months = self.integrator.horizon_months;
        s.dt_months = self.integrator.dt_months;
        s
    }

    pub fn integrator_options(&self) -> IntegratorOptions<f64> {
        let i = &self.integrator;
        IntegratorOptions {
            eps_inf: i.eps_inf,
            clamp_tol: i.clamp_tol,
            stride: i.stride,
            stop_at_steady_state: i.stop_at_steady_state,
            require_termination: false,
        }
    }

    pub fn cost_weights(&self) -> CostWeights<f64> {
        let w = &self.weights;
        CostWeights {
            infection_mechanical: w.infection_mechanical,
            infection_chemical: w.infection_chemical,
            control_mechanical: w.control_mechanical,
            control_chemical: w.control_chemical,
            w1: w.w1,
            w2: w.w2,
            t_i: w.t_i,
            t_f: w.t_f,
            strategy: None,
        }
    }

    /// GA settings; the run must terminate for final sizes to exist.
    pub fn ga_config(&self, seed: u64) -> GaConfig {
        let g = &self.ga;
        GaConfig {
            population_size: g.population_size,
            mating_pool_size: g.mating_pool_size,
            mutation_prob: g.mutation_prob,
            max_generations: g.max_generations,
            r_obj: g.r_obj,
            r1_target: g.r1_target,
            r2_target: g.r2_target,
            feasibility_tol: g.feasibility_tol,
            strategy: self.strategy(),
            seed,
            weights: self.cost_weights(),
            stall_generations: g.stall_generations,
            stall_tol: g.stall_tol,
            penalty_scale: g.penalty_scale,
            integrator: IntegratorOptions {
                require_termination: true,
                stop_at_steady_state: true,
                ..self.integrator_options()
            },
        }
    }

    pub fn sweep_ranges(&self) -> Vec<ParameterRange> {
        if self.sensitivity.parameters.is_empty() {
            let names: [SweepParameter; 5] = match self.strategy() {
                StrategyKind::Mechanical => [
                    SweepParameter::M1,
                    SweepParameter::N1,
                    SweepParameter::M2,
                    SweepParameter::N2,
                    SweepParameter::Phi12,
                ],
                StrategyKind::Chemical => [
                    SweepParameter::P1,
                    SweepParameter::Q1,
                    SweepParameter::P2,
                    SweepParameter::Q2,
                    SweepParameter::Phi12,
                ],
            };
            names
                .into_iter()
                .map(|name| ParameterRange {
                    name,
                    low: 0.0,
                    high: 1.0,
                })
                .collect()
        } else {
            self.sensitivity
                .parameters
                .iter()
                .map(|r| ParameterRange {
                    name: r.name.parse().expect("validated"),
                    low: r.low,
                    high: r.high,
                })
                .collect()
        }
    }
}
