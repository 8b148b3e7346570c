//! Latin hypercube sampling over control space and partial rank correlation
//! of the global reproduction number.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::reproduction::global_r0_closed;

/// A scenario knob that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    M1,
    N1,
    M2,
    N2,
    P1,
    Q1,
    P2,
    Q2,
    Phi12,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 9] = [
        Self::M1,
        Self::N1,
        Self::M2,
        Self::N2,
        Self::P1,
        Self::Q1,
        Self::P2,
        Self::Q2,
        Self::Phi12,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::M1 => "m1",
            Self::N1 => "n1",
            Self::M2 => "m2",
            Self::N2 => "n2",
            Self::P1 => "p1",
            Self::Q1 => "q1",
            Self::P2 => "p2",
            Self::Q2 => "q2",
            Self::Phi12 => "phi12",
        }
    }

    /// Overwrites this knob in `scenario`.
    pub fn apply(self, scenario: &mut Scenario<f64>, value: f64) {
        let c1 = &mut scenario.controls1;
        let c2 = &mut scenario.controls2;
        match self {
            Self::M1 => c1.m = value,
            Self::N1 => c1.n = value,
            Self::M2 => c2.m = value,
            Self::N2 => c2.n = value,
            Self::P1 => c1.p = value,
            Self::Q1 => c1.q = value,
            Self::P2 => c2.p = value,
            Self::Q2 => c2.q = value,
            Self::Phi12 => scenario.phi12 = value,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown sweep parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub name: SweepParameter,
    pub low: f64,
    pub high: f64,
}

impl ParameterRange {
    pub fn new(name: SweepParameter, low: f64, high: f64) -> Result<Self> {
        let r = Self { name, low, high };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = || Error::InvalidRange {
            name: self.name.name().to_string(),
            low: self.low,
            high: self.high,
        };
        if !(self.low.is_finite() && self.high.is_finite() && self.low < self.high) {
            return Err(bad());
        }
        // half-open sampling keeps values below `high`, so `high = 1` is fine
        // for the controls too
        if self.low < 0.0 || self.high > 1.0 {
            return Err(bad());
        }
        Ok(())
    }

    fn edge(&self, k: usize, n: usize) -> f64 {
        if k == n {
            self.high
        } else {
            self.low + (self.high - self.low) * (k as f64 / n as f64)
        }
    }

    /// Index of the equal-width stratum holding `value` out of `n`.
    pub fn stratum_of(&self, value: f64, n: usize) -> Option<usize> {
        if !(value >= self.low && value < self.high) {
            return None;
        }
        let guess = (((value - self.low) / (self.high - self.low)) * n as f64) as usize;
        let guess = guess.min(n - 1);
        // rounding can put the guess one stratum off
        (guess.saturating_sub(1)..=(guess + 1).min(n - 1))
            .find(|&k| value >= self.edge(k, n) && value < self.edge(k + 1, n))
    }
}

/// Rows are samples, columns follow `ranges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub ranges: Vec<ParameterRange>,
    pub rows: Vec<Vec<f64>>,
    pub seed: u64,
}

impl SampleMatrix {
    pub fn names(&self) -> Vec<&'static str> {
        self.ranges.iter().map(|r| r.name.name()).collect()
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_params(&self) -> usize {
        self.ranges.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

fn next_below(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else if x < 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        -f64::from_bits(1)
    }
}

pub fn lhs_sample(ranges: &[ParameterRange], n_samples: usize, seed: u64) -> Result<SampleMatrix> {
    if ranges.is_empty() {
        return Err(Error::ConfigInvalid("no parameter ranges given".into()));
    }
    if n_samples < 2 {
        return Err(Error::ConfigInvalid(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    for r in ranges {
        r.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; ranges.len()]; n_samples];
    let mut perm: Vec<usize> = (0..n_samples).collect();
    for (j, range) in ranges.iter().enumerate() {
        perm.shuffle(&mut rng);
        for (i, &k) in perm.iter().enumerate() {
            let lo = range.edge(k, n_samples);
            let hi = range.edge(k + 1, n_samples);
            let u: f64 = rng.random();
            let v = lo + u * (hi - lo);
            rows[i][j] = if v >= hi { next_below(hi).max(lo) } else { v.max(lo) };
        }
    }
    Ok(SampleMatrix {
        ranges: ranges.to_vec(),
        rows,
        seed,
    })
}

/// Ranks starting at 1, ties share their average rank.
pub fn rank_average(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Residuals of the least-squares fit of `y` on `x` (with intercept).
/// `x` holds centered columns, `y` must be centered as well.
fn residuals(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if x.ncols() == 0 {
        return Ok(y.clone());
    }
    let xtx = x.tr_mul(x);
    let xty = x.tr_mul(y);
    let beta = match xtx.clone().cholesky() {
        Some(ch) => ch.solve(&xty),
        None => xtx
            .lu()
            .solve(&xty)
            .ok_or_else(|| Error::DegenerateColumn("collinear regressors".into()))?,
    };
    Ok(y - x * beta)
}

/// Equal-width histogram over `[min, max]` of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `n_bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(values: &[f64], n_bins: usize) -> Result<Histogram> {
    if n_bins == 0 {
        return Err(Error::ConfigInvalid("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::ConfigInvalid("histogram of an empty sample".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::ConfigInvalid("non-finite value in histogram sample".into()));
    }
    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|k| if k == n_bins { hi } else { lo + width * k as f64 })
        .collect();
    let mut counts = vec![0; n_bins];
    for &v in values {
        let k = if width > 0.0 {
            (((v - lo) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrccResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub n_samples: usize,
    pub output_name: String,
    pub histogram: Option<Histogram>,
}

impl PrccResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }
}

/// Partial rank correlation of each sampled parameter with `outputs`.
pub fn prcc(samples: &SampleMatrix, outputs: &[f64]) -> Result<PrccResult> {
    let n = samples.n_samples();
    let k = samples.n_params();
    if outputs.len() != n {
        return Err(Error::ConfigInvalid(format!(
            "{} outputs for {} samples",
            outputs.len(),
            n
        )));
    }
    let centered = |v: Vec<f64>| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        DVector::from_iterator(v.len(), v.into_iter().map(|x| x - mean))
    };
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let c = centered(rank_average(&samples.column(j)));
        if c.iter().all(|&x| x == 0.0) {
            return Err(Error::DegenerateColumn(samples.ranges[j].name.to_string()));
        }
        cols.push(c);
    }
    let y = centered(rank_average(outputs));
    if y.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateColumn("output".into()));
    }

    let mut coefficients = Vec::with_capacity(k);
    for j in 0..k {
        let others: Vec<&DVector<f64>> = (0..k).filter(|&i| i != j).map(|i| &cols[i]).collect();
        let x = DMatrix::from_fn(n, others.len(), |r, c| others[c][r]);
        let ex = residuals(&x, &cols[j])?;
        let ey = residuals(&x, &y)?;
        coefficients.push(pearson(ex.as_slice(), ey.as_slice()));
    }
    Ok(PrccResult {
        names: samples.names().into_iter().map(String::from).collect(),
        coefficients,
        n_samples: n,
        output_name: "global_r0".into(),
        histogram: None,
    })
}

/// Samples the ranges, evaluates the closed-form global reproduction number
/// of each sample and correlates.
///
/// Results do not depend on the number of rayon threads.
pub fn sensitivity_run(
    template: &Scenario<f64>,
    ranges: &[ParameterRange],
    n_samples: usize,
    seed: u64,
    n_bins: usize,
) -> Result<(PrccResult, Vec<f64>)> {
    template.validate()?;
    let samples = lhs_sample(ranges, n_samples, seed)?;
    let outputs: Vec<f64> = samples
        .rows
        .par_iter()
        .map(|row| {
            let mut s = template.clone();
            for (range, &v) in ranges.iter().zip(row) {
                range.name.apply(&mut s, v);
            }
            s.validate()?;
            global_r0_closed(&s)
        })
        .collect::<Result<_>>()?;
    let mut result = prcc(&samples, &outputs)?;
    result.histogram = Some(histogram(&outputs, n_bins)?);
    Ok((result, outputs))
}
