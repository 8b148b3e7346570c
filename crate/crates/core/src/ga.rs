//! Genetic algorithm over the four control genes of one strategy.
//!
//! Individuals are scored by a penalty on the distance of their final
//! roguing counts from the targets plus the objective `J`. Each generation
//! keeps the best individual unchanged, crosses it with the next best `N`,
//! fills the population with crosses of random non-elite pairs and mutates
//! every child.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{evaluate_objective, CostWeights};
use crate::error::{Error, Result};
use crate::integrator::{simulate_summary, IntegratorOptions};
use crate::model::{Scenario, StrategyKind};

/// Bits per gene in the chromosome.
pub const GENE_BITS: u32 = 16;
const GENE_LEVELS: f64 = (1u64 << GENE_BITS) as f64;
const GENE_MASK: u64 = (1 << GENE_BITS) - 1;
/// Largest representable gene, `1 - 2^-16`.
pub const GENE_MAX: f64 = 1.0 - 1.0 / GENE_LEVELS;

/// Penalty per tree of target miss, per unit of the objective's scale.
pub const PENALTY_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub mating_pool_size: usize,
    pub mutation_prob: f64,
    pub max_generations: usize,
    /// Target total of rogued trees over both orchards.
    pub r_obj: f64,
    pub r1_target: Option<f64>,
    pub r2_target: Option<f64>,
    /// Allowed miss on every target, in trees. `None` is 1% of `r_obj`.
    pub feasibility_tol: Option<f64>,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub weights: CostWeights<f64>,
    /// Stop once the feasible elite has not improved for this many
    /// generations.
    pub stall_generations: usize,
    pub stall_tol: f64,
    /// Penalty per tree of target miss beyond the tolerance. `None` is
    /// `1e3` times `|J|` of the uncontrolled template.
    pub penalty_scale: Option<f64>,
    pub integrator: IntegratorOptions<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            mating_pool_size: 20,
            mutation_prob: 0.1,
            max_generations: 30,
            r_obj: 2000.0,
            r1_target: None,
            r2_target: None,
            feasibility_tol: None,
            strategy: StrategyKind::Mechanical,
            seed: 0,
            weights: CostWeights::default(),
            stall_generations: 5,
            stall_tol: 1e-9,
            penalty_scale: None,
            integrator: IntegratorOptions {
                require_termination: true,
                ..IntegratorOptions::default()
            },
        }
    }
}

impl GaConfig {
    pub fn tolerance(&self) -> f64 {
        self.feasibility_tol.unwrap_or(0.01 * self.r_obj)
    }

    /// Fills in the penalty scale from the uncontrolled template.
    pub fn resolve(&self, template: &Scenario<f64>) -> GaConfig {
        let mut out = self.clone();
        if out.penalty_scale.is_none() {
            let base = evaluate([0.0; 4], template, self);
            let w_scale = if base.failure.is_none() && base.objective_j.is_finite() {
                base.objective_j.abs().max(1.0)
            } else {
                1.0
            };
            out.penalty_scale = Some(PENALTY_FACTOR * w_scale);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.mating_pool_size < 2 || self.mating_pool_size >= self.population_size {
            return bad(format!(
                "need 2 <= mating_pool_size < population_size, got {} and {}",
                self.mating_pool_size, self.population_size
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad(format!("mutation_prob {} outside [0, 1]", self.mutation_prob));
        }
        if self.max_generations == 0 {
            return bad("max_generations must be positive".into());
        }
        if !(self.r_obj > 0.0 && self.r_obj.is_finite()) {
            return bad(format!("r_obj {} must be positive", self.r_obj));
        }
        if !(self.tolerance() > 0.0) {
            return bad(format!("feasibility_tol {} must be positive", self.tolerance()));
        }
        if let (Some(a), Some(b)) = (self.r1_target, self.r2_target) {
            if (a + b - self.r_obj).abs() > 1e-9 * self.r_obj {
                return bad(format!(
                    "targets {a} + {b} do not add up to r_obj {}",
                    self.r_obj
                ));
            }
        }
        for t in [self.r1_target, self.r2_target].into_iter().flatten() {
            if !(t >= 0.0) {
                return bad(format!("target {t} must be nonnegative"));
            }
        }
        if !self.penalty_scale.is_none_or(|p| p > 0.0) {
            return bad("penalty_scale must be positive".into());
        }
        if let Some(w) = self.weights.strategy {
            if w != self.strategy {
                return Err(Error::StrategyMismatch {
                    weights: w.name(),
                    scenario: self.strategy.name(),
                });
            }
        }
        self.weights.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: [f64; 4],
    pub r1_final: f64,
    pub r2_final: f64,
    pub cost: f64,
    pub ef1: f64,
    pub ef2: f64,
    pub objective_j: f64,
    pub fitness: f64,
    pub feasible: bool,
    /// Set when the model could not be evaluated.
    pub failure: Option<String>,
}

impl Individual {
    fn failed(genes: [f64; 4], err: &Error) -> Self {
        Self {
            genes,
            r1_final: f64::NAN,
            r2_final: f64::NAN,
            cost: f64::NAN,
            ef1: f64::NAN,
            ef2: f64::NAN,
            objective_j: f64::MAX,
            fitness: f64::MAX,
            feasible: false,
            failure: Some(err.to_string()),
        }
    }

    /// Elite order: fitness, then `J`, then genes.
    fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.fitness
            .total_cmp(&other.fitness)
            .then(self.objective_j.total_cmp(&other.objective_j))
            .then_with(|| {
                self.genes
                    .iter()
                    .zip(&other.genes)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    }
}

/// Penalized fitness of an evaluated individual and whether it is feasible.
pub fn fitness(ind: &Individual, config: &GaConfig) -> (f64, bool) {
    if ind.failure.is_some() {
        return (f64::MAX, false);
    }
    let tol = config.tolerance();
    let miss = |value: f64, target: f64| ((value - target).abs() - tol).max(0.0);
    let mut penalty = miss(ind.r1_final + ind.r2_final, config.r_obj);
    if let Some(t) = config.r1_target {
        penalty += miss(ind.r1_final, t);
    }
    if let Some(t) = config.r2_target {
        penalty += miss(ind.r2_final, t);
    }
    let scale = config.penalty_scale.unwrap_or(PENALTY_FACTOR);
    let f = scale * penalty + ind.objective_j;
    if f.is_finite() {
        (f, penalty == 0.0)
    } else {
        (f64::MAX, false)
    }
}

/// Installs `genes` into the template, runs the model to termination and
/// scores the result. Model failures give an infeasible individual.
pub fn evaluate(genes: [f64; 4], template: &Scenario<f64>, config: &GaConfig) -> Individual {
    let mut scenario = template.clone().with_genes(genes);
    scenario.strategy = config.strategy;
    let run = || -> Result<Individual> {
        scenario.validate()?;
        let summary = simulate_summary(&scenario, &config.integrator)?;
        let obj = evaluate_objective(&scenario, &config.weights, &summary)?;
        Ok(Individual {
            genes,
            r1_final: summary.r1_final,
            r2_final: summary.r2_final,
            cost: obj.cost.reduced(),
            ef1: obj.ef1,
            ef2: obj.ef2,
            objective_j: obj.j,
            fitness: 0.0,
            feasible: false,
            failure: None,
        })
    };
    let mut ind = run().unwrap_or_else(|e| Individual::failed(genes, &e));
    let (f, feasible) = fitness(&ind, config);
    ind.fitness = f;
    ind.feasible = feasible;
    ind
}

/// Fixed-point code of a gene.
pub fn encode_gene(g: f64) -> u64 {
    ((g * GENE_LEVELS).floor().max(0.0) as u64).min(GENE_MASK)
}

pub fn decode_gene(code: u64) -> f64 {
    (code & GENE_MASK) as f64 / GENE_LEVELS
}

/// Snaps a gene onto the chromosome grid.
pub fn quantize(g: f64) -> f64 {
    decode_gene(encode_gene(g))
}

/// Four genes packed into 64 bits, gene 1 in the most significant bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chromosome(pub u64);

impl Chromosome {
    pub fn from_genes(genes: [f64; 4]) -> Self {
        Self(
            genes
                .iter()
                .fold(0u64, |acc, &g| (acc << GENE_BITS) | encode_gene(g)),
        )
    }

    pub fn genes(self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, g) in out.iter_mut().enumerate() {
            *g = decode_gene(self.0 >> (GENE_BITS * (3 - i as u32)));
        }
        out
    }
}

/// Bit mask covering positions `[a, b)` counted from the most significant
/// bit.
fn segment_mask(a: u32, b: u32) -> u64 {
    let len = b - a;
    if len == 0 {
        0
    } else if len == 64 {
        u64::MAX
    } else {
        ((1u64 << len) - 1) << (64 - b)
    }
}

/// Two-point crossover with explicit cut points `0 <= a < b <= 64`.
pub fn crossover_at(father: [f64; 4], mother: [f64; 4], a: u32, b: u32) -> ([f64; 4], [f64; 4]) {
    assert!(a < b && b <= 64, "cut points must satisfy a < b <= 64");
    let mask = segment_mask(a, b);
    let f = Chromosome::from_genes(father).0;
    let m = Chromosome::from_genes(mother).0;
    let c1 = (f & !mask) | (m & mask);
    let c2 = (m & !mask) | (f & mask);
    (Chromosome(c1).genes(), Chromosome(c2).genes())
}

/// Two-point crossover with distinct cut points drawn uniformly from
/// `0..=64`.
pub fn crossover<R: Rng + ?Sized>(
    father: [f64; 4],
    mother: [f64; 4],
    rng: &mut R,
) -> ([f64; 4], [f64; 4]) {
    let a = rng.random_range(0..=64u32);
    let mut b = rng.random_range(0..64u32);
    if b >= a {
        b += 1;
    }
    crossover_at(father, mother, a.min(b), a.max(b))
}

pub fn random_gene<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    decode_gene(rng.random_range(0..=GENE_MASK))
}

/// Redraws each gene with probability `prob`.
pub fn mutate<R: Rng + ?Sized>(genes: [f64; 4], prob: f64, rng: &mut R) -> [f64; 4] {
    let mut out = genes;
    for g in &mut out {
        if rng.random::<f64>() < prob {
            *g = random_gene(rng);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    /// Elite of generation 0, 1, ...
    pub best_per_generation: Vec<Individual>,
    pub final_best: Individual,
    /// First generation whose elite is feasible.
    pub generations_to_target: Option<usize>,
    /// Genes of the whole population, per generation.
    pub population_genes: Vec<Vec<[f64; 4]>>,
    /// Penalty per tree actually used.
    pub penalty_scale: f64,
}

impl GaResult {
    pub fn converged(&self) -> bool {
        self.final_best.feasible
    }
}

struct Evaluator<'a> {
    template: &'a Scenario<f64>,
    config: &'a GaConfig,
    cache: HashMap<u64, Individual>,
}

impl Evaluator<'_> {
    /// Evaluates in parallel, reusing earlier results for repeated genes.
    fn evaluate_all(&mut self, genes: &[[f64; 4]]) -> Vec<Individual> {
        let mut fresh: Vec<[f64; 4]> = Vec::new();
        for g in genes {
            let key = Chromosome::from_genes(*g).0;
            if !self.cache.contains_key(&key) && !fresh.iter().any(|f| f == g) {
                fresh.push(*g);
            }
        }
        let done: Vec<Individual> = fresh
            .par_iter()
            .map(|g| evaluate(*g, self.template, self.config))
            .collect();
        for ind in done {
            self.cache.insert(Chromosome::from_genes(ind.genes).0, ind);
        }
        genes
            .iter()
            .map(|g| self.cache[&Chromosome::from_genes(*g).0].clone())
            .collect()
    }
}

fn generation_rng(seed: u64, generation: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(generation as u64);
    rng
}

/// Runs the genetic algorithm.
///
/// The random stream of each generation is derived from the seed and the
/// generation number, and evaluation order does not touch it, so the result
/// does not depend on the number of threads.
pub fn run(template: &Scenario<f64>, config: &GaConfig) -> Result<GaResult> {
    config.validate()?;
    let mut template = template.clone();
    template.strategy = config.strategy;
    let config = &config.resolve(&template);
    let m = config.population_size;
    let mut eval = Evaluator {
        template: &template,
        config,
        cache: HashMap::new(),
    };

    let mut rng = generation_rng(config.seed, 0);
    let initial: Vec<[f64; 4]> = (0..m)
        .map(|_| std::array::from_fn(|_| random_gene(&mut rng)))
        .collect();
    let mut population = eval.evaluate_all(&initial);
    population.sort_by(Individual::rank_cmp);

    let mut best_per_generation = vec![population[0].clone()];
    let mut population_genes = vec![population.iter().map(|i| i.genes).collect::<Vec<_>>()];
    let mut generations_to_target = population[0].feasible.then_some(0);
    let mut stall = 0;

    for generation in 1..=config.max_generations {
        let mut rng = generation_rng(config.seed, generation);
        let elite = population[0].clone();
        let rest = &population[1..];
        let pool = &rest[..config.mating_pool_size];

        let mut children: Vec<[f64; 4]> = Vec::with_capacity(m - 1);
        for mate in pool {
            let (c1, c2) = crossover(elite.genes, mate.genes, &mut rng);
            children.push(mutate(c1, config.mutation_prob, &mut rng));
            children.push(mutate(c2, config.mutation_prob, &mut rng));
        }
        children.truncate(m - 1);
        while children.len() < m - 1 {
            let i = rng.random_range(0..rest.len());
            let mut j = rng.random_range(0..rest.len() - 1);
            if j >= i {
                j += 1;
            }
            let (c1, c2) = crossover(rest[i].genes, rest[j].genes, &mut rng);
            children.push(mutate(c1, config.mutation_prob, &mut rng));
            if children.len() < m - 1 {
                children.push(mutate(c2, config.mutation_prob, &mut rng));
            }
        }

        let mut next = Vec::with_capacity(m);
        next.push(elite.clone());
        next.extend(eval.evaluate_all(&children));
        next.sort_by(Individual::rank_cmp);
        population = next;

        let best = &population[0];
        if best.feasible && generations_to_target.is_none() {
            generations_to_target = Some(generation);
        }
        let improved = elite.fitness - best.fitness > config.stall_tol * elite.fitness.abs().max(1.0);
        stall = if improved { 0 } else { stall + 1 };
        best_per_generation.push(best.clone());
        population_genes.push(population.iter().map(|i| i.genes).collect());

        if best.feasible && stall >= config.stall_generations {
            break;
        }
    }

    Ok(GaResult {
        final_best: population[0].clone(),
        best_per_generation,
        generations_to_target,
        population_genes,
        penalty_scale: config.penalty_scale.unwrap_or(PENALTY_FACTOR),
    })
}
