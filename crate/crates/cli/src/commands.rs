//! The four commands and the dispatcher around them.

use std::path::Path;
use std::time::Instant;

use orchard_duo::analytics::{effectiveness_report, strategy_cost, EffectivenessReport, StrategyCost};
use orchard_duo::ga::{self, GaResult, Individual};
use orchard_duo::integrator::{integrate_with, summarize, EpidemicSummary};
use orchard_duo::model::STATE_NAMES;
use orchard_duo::reproduction::{
    build_ngm, char_poly_coeffs, derived_quantities, global_r0_closed, global_r0_spectral,
    local_r0, CharPolyCoeffs, DerivedQuantities, Mat6, INFECTED_NAMES,
};
use orchard_duo::sensitivity::sensitivity_run;
use orchard_duo::Orchard;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt_f64, OutputDir, RunManifest, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    R0,
    Sensitivity,
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::R0 => "r0",
            Command::Sensitivity => "sensitivity",
            Command::Optimize => "optimize",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Command::Sensitivity | Command::Optimize)
    }
}

#[derive(Debug, Serialize)]
struct SimulationReport {
    summary: EpidemicSummary<f64>,
    effectiveness: EffectivenessReport<f64>,
    cost: StrategyCost<f64>,
    cost_reduced: f64,
    cost_direct: f64,
    terminated_at_steady_state: bool,
}

fn simulate(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let scenario = config.scenario();
    let traj = integrate_with(&scenario, &config.integrator_options())?;
    let mut header = vec!["t"];
    header.extend(STATE_NAMES);
    let rows: Vec<Vec<String>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| {
            std::iter::once(*t)
                .chain(s.to_array())
                .map(fmt_f64)
                .collect()
        })
        .collect();
    out.csv("trajectory.csv", &header, &rows)?;

    let summary = summarize(&traj, &scenario);
    let cost = strategy_cost(&scenario, &config.cost_weights(), &summary)?;
    out.json(
        "summary.json",
        &SimulationReport {
            summary,
            effectiveness: effectiveness_report(&scenario, &summary)?,
            cost,
            cost_reduced: cost.reduced(),
            cost_direct: cost.direct(),
            terminated_at_steady_state: traj.terminated_at_steady_state,
        },
    )
}

#[derive(Debug, Serialize)]
struct R0Report {
    r10: f64,
    r20: f64,
    r_g0_closed: f64,
    r_g0_spectral: f64,
    coefficients: CharPolyCoeffs<f64>,
    derived: DerivedQuantities<f64>,
    labels: [&'static str; 6],
    f_matrix: Mat6<f64>,
    v_matrix: Mat6<f64>,
    k_matrix: Mat6<f64>,
}

fn r0(config: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = config.scenario();
    let ngm = build_ngm(&s)?;
    out.json(
        "r0.json",
        &R0Report {
            r10: local_r0(&s, Orchard::First)?,
            r20: local_r0(&s, Orchard::Second)?,
            r_g0_closed: global_r0_closed(&s)?,
            r_g0_spectral: global_r0_spectral(&s)?,
            coefficients: char_poly_coeffs(&s)?,
            derived: derived_quantities(&s)?,
            labels: INFECTED_NAMES,
            f_matrix: ngm.f_matrix,
            v_matrix: ngm.v_matrix,
            k_matrix: ngm.k_matrix,
        },
    )
}

fn sensitivity(config: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<(), CliError> {
    let ranges = config.sweep_ranges();
    let (result, _) = sensitivity_run(
        &config.scenario(),
        &ranges,
        config.sensitivity.n_samples,
        seed,
        config.sensitivity.n_bins,
    )?;
    let rows: Vec<Vec<String>> = result
        .names
        .iter()
        .zip(&result.coefficients)
        .map(|(n, c)| vec![n.clone(), fmt_f64(*c)])
        .collect();
    out.csv("prcc.csv", &["parameter", "prcc"], &rows)?;
    let h = result.histogram.as_ref().expect("sensitivity_run fills the histogram");
    let rows: Vec<Vec<String>> = h
        .counts
        .iter()
        .enumerate()
        .map(|(k, c)| vec![fmt_f64(h.edges[k]), fmt_f64(h.edges[k + 1]), c.to_string()])
        .collect();
    out.csv("histogram.csv", &["bin_low", "bin_high", "count"], &rows)
}

fn individual_row(generation: usize, ind: &Individual) -> Vec<String> {
    let mut row = vec![generation.to_string()];
    row.extend(ind.genes.iter().map(|g| fmt_f64(*g)));
    row.extend(
        [
            ind.r1_final,
            ind.r2_final,
            ind.cost,
            ind.ef1,
            ind.ef2,
            ind.objective_j,
            ind.fitness,
        ]
        .map(fmt_f64),
    );
    row.push(ind.feasible.to_string());
    row
}

#[derive(Debug, Serialize)]
struct BestReport<'a> {
    strategy: &'static str,
    gene_names: [&'static str; 4],
    final_best: &'a Individual,
    generations_run: usize,
    generations_to_target: Option<usize>,
    penalty_scale: f64,
}

fn optimize(config: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<(), CliError> {
    let strategy = config.strategy();
    let result: GaResult = ga::run(&config.scenario(), &config.ga_config(seed))?;
    let names = strategy.gene_names();
    let mut header = vec!["generation"];
    header.extend(names);
    header.extend(["r1_final", "r2_final", "cost", "ef1", "ef2", "objective_j", "fitness", "feasible"]);
    let rows: Vec<Vec<String>> = result
        .best_per_generation
        .iter()
        .enumerate()
        .map(|(g, ind)| individual_row(g, ind))
        .collect();
    out.csv("trace.csv", &header, &rows)?;

    let mut header = vec!["generation", "rank"];
    header.extend(names);
    let rows: Vec<Vec<String>> = result
        .population_genes
        .iter()
        .enumerate()
        .flat_map(|(g, pop)| {
            pop.iter().enumerate().map(move |(k, genes)| {
                let mut row = vec![g.to_string(), k.to_string()];
                row.extend(genes.iter().map(|x| fmt_f64(*x)));
                row
            })
        })
        .collect();
    out.csv("population.csv", &header, &rows)?;

    out.json(
        "best.json",
        &BestReport {
            strategy: strategy.name(),
            gene_names: names,
            final_best: &result.final_best,
            generations_run: result.best_per_generation.len() - 1,
            generations_to_target: result.generations_to_target,
            penalty_scale: result.penalty_scale,
        },
    )
}

/// Runs `command` with `config` and writes outputs plus the manifest into
/// `out_dir`. `seed` overrides the config's seed.
pub fn dispatch(
    command: Command,
    mut config: RunConfig,
    out_dir: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    if seed.is_some() {
        config.seed = seed;
    }
    config.validate()?;
    let seed = config.seed;
    if command.is_stochastic() && seed.is_none() {
        return Err(CliError::MissingSeed(command.name()));
    }
    let mut out = OutputDir::create(out_dir)?;

    let body = |out: &mut OutputDir| match command {
        Command::Simulate => simulate(&config, out),
        Command::R0 => r0(&config, out),
        Command::Sensitivity => sensitivity(&config, seed.expect("checked"), out),
        Command::Optimize => optimize(&config, seed.expect("checked"), out),
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Output(e.to_string()))?;
            pool.install(|| body(&mut out))?
        }
        None => body(&mut out)?,
    }

    let mut outputs = out.written().to_vec();
    outputs.push(MANIFEST_FILE.to_string());
    let manifest = RunManifest {
        command: command.name().to_string(),
        config,
        seed,
        threads,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        outputs,
    };
    out.json(MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}
