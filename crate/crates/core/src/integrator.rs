//! Fixed-step RK4 integration of the model with steady-state detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{idx, Orchard, Scenario, SystemState, VectorField, STATE_NAMES};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions<T> {
    /// Infectious threshold below which the epidemic counts as over.
    /// `None` means `1e-6 * max(N1, N2)`.
    pub eps_inf: Option<T>,
    /// Negative components above `-clamp_tol` are reset to zero; anything
    /// more negative is an error.
    pub clamp_tol: T,
    /// Store every `stride`-th step (the last state is always stored).
    pub stride: usize,
    /// Stop as soon as all infectious compartments drop below `eps_inf`.
    pub stop_at_steady_state: bool,
    /// Fail with `NonConvergence` if the horizon is reached first.
    pub require_termination: bool,
}

impl<T: Scalar> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self {
            eps_inf: None,
            clamp_tol: T::default_clamp_tol(),
            stride: 1,
            stop_at_steady_state: true,
            require_termination: false,
        }
    }
}

impl<T: Scalar> IntegratorOptions<T> {
    pub fn threshold(&self, scenario: &Scenario<T>) -> T {
        self.eps_inf.unwrap_or_else(|| {
            T::lit(1e-6) * scenario.orchard1.n_tau.max(scenario.orchard2.n_tau)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<SystemState<T>>,
    pub terminated_at_steady_state: bool,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(&T, &SystemState<T>)> {
        self.times.last().zip(self.states.last())
    }
}

/// Final sizes, peaks and cumulative infection of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicSummary<T> {
    pub r1_final: T,
    pub r2_final: T,
    pub s1_final: T,
    pub s2_final: T,
    pub a1_peak: T,
    pub a1_peak_time: T,
    pub i1_peak: T,
    pub i1_peak_time: T,
    pub a2_peak: T,
    pub a2_peak_time: T,
    pub i2_peak: T,
    pub i2_peak_time: T,
    /// `∫ (A1 + I1) dt` in tree-months, including the tail estimate.
    pub cumulative_infectious_1: T,
    pub cumulative_infectious_2: T,
    /// Largest infectious share `I_v / (S_v + I_v)` of each psyllid
    /// population over the run.
    pub peak_vector_prevalence_1: T,
    pub peak_vector_prevalence_2: T,
    pub end_time: T,
    pub terminated: bool,
}

impl<T: Scalar> EpidemicSummary<T> {
    pub fn r_final(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.r1_final,
            Orchard::Second => self.r2_final,
        }
    }

    pub fn s_final(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.s1_final,
            Orchard::Second => self.s2_final,
        }
    }

    pub fn cumulative_infectious(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.cumulative_infectious_1,
            Orchard::Second => self.cumulative_infectious_2,
        }
    }

    pub fn peak_vector_prevalence(&self, orchard: Orchard) -> T {
        match orchard {
            Orchard::First => self.peak_vector_prevalence_1,
            Orchard::Second => self.peak_vector_prevalence_2,
        }
    }
}

/// Streaming accumulator for peaks and trapezoid integrals. Shared by
/// [`summarize`] and [`simulate_summary`] so both agree bit for bit on the
/// same grid.
#[derive(Debug, Clone, Copy)]
struct SummaryAccumulator<T> {
    peaks: [(T, T); 4],
    integral: [T; 2],
    prevalence: [T; 2],
    prev: Option<(T, [T; 2])>,
    before_prev: Option<(T, [T; 2])>,
}

impl<T: Scalar> SummaryAccumulator<T> {
    fn new() -> Self {
        Self {
            peaks: [(T::zero(), T::zero()); 4],
            integral: [T::zero(); 2],
            prevalence: [T::zero(); 2],
            prev: None,
            before_prev: None,
        }
    }

    fn push(&mut self, t: T, x: &[T; 12]) {
        let watched = [idx::A1T, idx::I1T, idx::A2T, idx::I2T];
        for (slot, &k) in self.peaks.iter_mut().zip(watched.iter()) {
            if x[k] > slot.0 {
                *slot = (x[k], t);
            }
        }
        for (k, (s, i)) in [(idx::S1V, idx::I1V), (idx::S2V, idx::I2V)].into_iter().enumerate() {
            let total = x[s] + x[i];
            if total > T::zero() {
                self.prevalence[k] = self.prevalence[k].max(x[i] / total);
            }
        }
        let sick = [x[idx::A1T] + x[idx::I1T], x[idx::A2T] + x[idx::I2T]];
        if let Some((t0, y0)) = self.prev {
            let half = T::lit(0.5) * (t - t0);
            for k in 0..2 {
                self.integral[k] = self.integral[k] + half * (y0[k] + sick[k]);
            }
        }
        self.before_prev = self.prev;
        self.prev = Some((t, sick));
    }

    fn finish(self, last: &[T; 12], end_time: T, terminated: bool) -> EpidemicSummary<T> {
        let mut integral = self.integral;
        if terminated {
            // exponential tail beyond the stop time
            if let (Some((t1, y1)), Some((t0, y0))) = (self.prev, self.before_prev) {
                for k in 0..2 {
                    if y1[k] > T::zero() && y0[k] > y1[k] {
                        let rate = (y0[k] / y1[k]).ln() / (t1 - t0);
                        if rate.is_finite() && rate > T::zero() {
                            integral[k] = integral[k] + y1[k] / rate;
                        }
                    }
                }
            }
        }
        let [(a1, a1t), (i1, i1t), (a2, a2t), (i2, i2t)] = self.peaks;
        EpidemicSummary {
            r1_final: last[idx::R1T],
            r2_final: last[idx::R2T],
            s1_final: last[idx::S1T],
            s2_final: last[idx::S2T],
            a1_peak: a1,
            a1_peak_time: a1t,
            i1_peak: i1,
            i1_peak_time: i1t,
            a2_peak: a2,
            a2_peak_time: a2t,
            i2_peak: i2,
            i2_peak_time: i2t,
            cumulative_infectious_1: integral[0],
            cumulative_infectious_2: integral[1],
            peak_vector_prevalence_1: self.prevalence[0],
            peak_vector_prevalence_2: self.prevalence[1],
            end_time,
            terminated,
        }
    }
}

#[inline]
fn rk4_step<T: Scalar>(field: &VectorField<T>, x: &[T; 12], dt: T) -> [T; 12] {
    let half = T::lit(0.5) * dt;
    let axpy = |base: &[T; 12], k: &[T; 12], h: T| {
        let mut out = *base;
        for i in 0..12 {
            out[i] = base[i] + h * k[i];
        }
        out
    };
    let k1 = field.eval(x);
    let k2 = field.eval(&axpy(x, &k1, half));
    let k3 = field.eval(&axpy(x, &k2, half));
    let k4 = field.eval(&axpy(x, &k3, dt));
    let two = T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let mut out = *x;
    for i in 0..12 {
        out[i] = x[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    out
}

fn clamp_state<T: Scalar>(x: &mut [T; 12], clamp_tol: T, time: T) -> Result<()> {
    for (k, v) in x.iter_mut().enumerate() {
        if !v.is_finite() || *v < -clamp_tol {
            return Err(Error::NonFiniteState {
                component: STATE_NAMES[k],
                value: v.as_f64(),
                time: time.as_f64(),
            });
        }
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    Ok(())
}

fn below_threshold<T: Scalar>(x: &[T; 12], eps: T) -> bool {
    idx::INFECTIOUS.iter().all(|&k| x[k] < eps)
}

/// Drives RK4 from `t = 0` and hands every accepted state to `visit`.
/// Returns the last state, its time and whether the steady state fired.
fn march<T: Scalar>(
    scenario: &Scenario<T>,
    options: &IntegratorOptions<T>,
    mut visit: impl FnMut(usize, T, &[T; 12], bool),
) -> Result<([T; 12], T, bool)> {
    scenario.validate()?;
    let field = VectorField::new(scenario)?;
    let eps = options.threshold(scenario);
    let dt = scenario.dt_months;
    let horizon = scenario.horizon_months;

    // full steps plus one shorter step if the horizon is not a multiple of dt
    let ratio = horizon / dt;
    let mut full_steps = ratio.floor();
    if ratio - full_steps > T::one() - T::lit(1e-9) {
        full_steps = full_steps + T::one();
    }
    let n_full = full_steps.to_usize().unwrap_or(usize::MAX);
    let remainder = horizon - full_steps * dt;
    let has_partial = remainder > dt * T::lit(1e-9);
    let n_steps = n_full + usize::from(has_partial);

    let mut x = scenario.initial.to_array();
    let mut t = T::zero();
    visit(0, t, &x, n_steps == 0);

    for step in 1..=n_steps {
        let h = if step > n_full { remainder } else { dt };
        x = rk4_step(&field, &x, h);
        t = if step > n_full {
            horizon
        } else {
            T::from_usize(step).unwrap_or_else(T::max_value) * dt
        };
        clamp_state(&mut x, options.clamp_tol, t)?;
        let done = options.stop_at_steady_state && below_threshold(&x, eps);
        visit(step, t, &x, done || step == n_steps);
        if done {
            return Ok((x, t, true));
        }
    }
    if options.require_termination && !below_threshold(&x, eps) {
        return Err(Error::NonConvergence {
            horizon: horizon.as_f64(),
            threshold: eps.as_f64(),
        });
    }
    let settled = below_threshold(&x, eps);
    Ok((x, t, settled))
}

/// Integrates with default options.
pub fn integrate<T: Scalar>(scenario: &Scenario<T>) -> Result<Trajectory<T>> {
    integrate_with(scenario, &IntegratorOptions::default())
}

pub fn integrate_with<T: Scalar>(
    scenario: &Scenario<T>,
    options: &IntegratorOptions<T>,
) -> Result<Trajectory<T>> {
    let stride = options.stride.max(1);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let (_, _, terminated) = march(scenario, options, |step, t, x, last| {
        if step % stride == 0 || last {
            times.push(t);
            states.push(SystemState::from_array(*x));
        }
    })?;
    Ok(Trajectory {
        times,
        states,
        terminated_at_steady_state: terminated,
    })
}

/// Summary statistics over the stored grid of a trajectory.
///
/// # Panics
///
/// Panics if the trajectory is empty.
pub fn summarize<T: Scalar>(trajectory: &Trajectory<T>, _scenario: &Scenario<T>) -> EpidemicSummary<T> {
    assert!(!trajectory.is_empty(), "cannot summarize an empty trajectory");
    let mut acc = SummaryAccumulator::new();
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        acc.push(*t, &s.to_array());
    }
    let (end, last) = trajectory.last().expect("non-empty");
    acc.finish(&last.to_array(), *end, trajectory.terminated_at_steady_state)
}

/// Integrates and summarizes in one pass without storing the trajectory.
///
/// Equivalent to `summarize(integrate_with(..))` with `stride = 1`.
pub fn simulate_summary<T: Scalar>(
    scenario: &Scenario<T>,
    options: &IntegratorOptions<T>,
) -> Result<EpidemicSummary<T>> {
    let mut acc = SummaryAccumulator::new();
    let (last, end, terminated) = march(scenario, options, |_, t, x, _| acc.push(t, x))?;
    Ok(acc.finish(&last, end, terminated))
}
