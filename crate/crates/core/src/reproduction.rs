//! Next-generation matrix and basic reproduction numbers.
//!
//! Infected compartments are ordered `x = (A1, I1, I1v, A2, I2, I2v)`. The
//! transmission matrix `F` and transition matrix `V` are Jacobians of the
//! new-infection and transfer terms at the disease-free equilibrium, and the
//! next-generation matrix is `K = -F V⁻¹`.
//!
//! `det(K - λI)` has two structurally zero rows (symptomatic trees produce no
//! new infections directly) and a bipartite tree/vector pattern, so it factors
//! as `λ² (λ⁴ - b λ² + c)` with
//!
//! ```text
//! b = φ11² R10² + (1 + θ12 φ12²) R20²
//! c = φ11² R10² R20²
//! ```
//!
//! and the global reproduction number is the largest root,
//! `ρ(K) = sqrt((b + sqrt(b² - 4c)) / 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{disease_free_equilibrium, Orchard, Scenario};
use crate::scalar::Scalar;

/// Dense 6×6 matrix, row-major.
pub type Mat6<T> = [[T; 6]; 6];

/// Row/column labels of the next-generation matrices.
pub const INFECTED_NAMES: [&str; 6] = ["A1t", "I1t", "I1v", "A2t", "I2t", "I2v"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities<T> {
    /// Disease-free psyllid population `Λ1 / μ̂1v`.
    pub n_v0_1: T,
    pub n_v0_2: T,
    /// `N⁰1v / μ̂1v`.
    pub growth_ratio_1: T,
    pub growth_ratio_2: T,
    /// `growth_ratio_1 / growth_ratio_2`.
    pub delta: T,
    /// `N⁰1v μ̂2v / (N⁰2v μ̂1v)`; algebraically equal to `delta`.
    pub theta12: T,
}

pub fn derived_quantities<T: Scalar>(scenario: &Scenario<T>) -> Result<DerivedQuantities<T>> {
    let r1 = scenario.rates(Orchard::First)?;
    let r2 = scenario.rates(Orchard::Second)?;
    let n_v0_1 = scenario.orchard1.lambda_v / r1.mu_v_hat;
    let n_v0_2 = scenario.orchard2.lambda_v / r2.mu_v_hat;
    let growth_ratio_1 = n_v0_1 / r1.mu_v_hat;
    let growth_ratio_2 = n_v0_2 / r2.mu_v_hat;
    Ok(DerivedQuantities {
        n_v0_1,
        n_v0_2,
        growth_ratio_1,
        growth_ratio_2,
        delta: growth_ratio_1 / growth_ratio_2,
        theta12: (n_v0_1 * r2.mu_v_hat) / (n_v0_2 * r1.mu_v_hat),
    })
}

/// Reproduction number of an orchard in isolation (no dispersal).
pub fn local_r0<T: Scalar>(scenario: &Scenario<T>, orchard: Orchard) -> Result<T> {
    Ok(local_r0_squared(scenario, orchard)?.sqrt())
}

pub(crate) fn local_r0_squared<T: Scalar>(scenario: &Scenario<T>, orchard: Orchard) -> Result<T> {
    let p = scenario.params(orchard);
    let r = scenario.rates(orchard)?;
    if r.r_tau_hat == T::zero() {
        return Err(Error::DivisionByZero("roguing rate is zero"));
    }
    let n_v0 = p.lambda_v / r.mu_v_hat;
    Ok(r.beta_tau_hat / (p.sigma + p.mu_tau) * (r.beta_v_hat / r.mu_v_hat) * (n_v0 / p.n_tau)
        * (p.sigma / r.r_tau_hat + T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NgmMatrices<T> {
    pub f_matrix: Mat6<T>,
    pub v_matrix: Mat6<T>,
    pub k_matrix: Mat6<T>,
}

pub fn build_ngm<T: Scalar>(scenario: &Scenario<T>) -> Result<NgmMatrices<T>> {
    scenario.validate()?;
    let dfe = disease_free_equilibrium(scenario)?;
    let (o1, o2) = (&scenario.orchard1, &scenario.orchard2);
    let r1 = scenario.rates(Orchard::First)?;
    let r2 = scenario.rates(Orchard::Second)?;
    let (phi11, phi12) = (scenario.phi11(), scenario.phi12);
    let z = T::zero();

    let mut f = [[z; 6]; 6];
    // A1: orchard-1 trees bitten by resident psyllids
    f[0][2] = r1.beta_tau_hat * phi11 * dfe.s1t / o1.n_tau;
    // I1v: orchard-1 psyllids feeding at home and in orchard 2
    let home = r1.beta_v_hat * phi11 * dfe.s1v / o1.n_tau;
    let away = r2.beta_v_hat * phi12 * dfe.s1v / o2.n_tau;
    f[2][0] = home;
    f[2][1] = home;
    f[2][3] = away;
    f[2][4] = away;
    // A2: bitten by resident and visiting psyllids
    f[3][2] = r2.beta_tau_hat * phi12 * dfe.s2t / o2.n_tau;
    f[3][5] = r2.beta_tau_hat * dfe.s2t / o2.n_tau;
    // I2v
    let res2 = r2.beta_v_hat * dfe.s2v / o2.n_tau;
    f[5][3] = res2;
    f[5][4] = res2;

    let mut v = [[z; 6]; 6];
    v[0][0] = -(o1.sigma + o1.mu_tau);
    v[1][0] = o1.sigma;
    v[1][1] = -r1.r_tau_hat;
    v[2][2] = -r1.mu_v_hat;
    v[3][3] = -(o2.sigma + o2.mu_tau);
    v[4][3] = o2.sigma;
    v[4][4] = -r2.r_tau_hat;
    v[5][5] = -r2.mu_v_hat;

    let v_inv = lower_triangular_inverse(&v).ok_or(Error::SingularTransition)?;
    let fv = mat_mul(&f, &v_inv);
    let mut k = [[z; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            k[i][j] = -fv[i][j];
        }
    }
    Ok(NgmMatrices {
        f_matrix: f,
        v_matrix: v,
        k_matrix: k,
    })
}

#[allow(clippy::needless_range_loop)]
fn lower_triangular_inverse<T: Scalar>(l: &Mat6<T>) -> Option<Mat6<T>> {
    let mut inv = [[T::zero(); 6]; 6];
    for col in 0..6 {
        // forward substitution for L y = e_col
        for row in 0..6 {
            if l[row][row] == T::zero() || !l[row][row].is_finite() {
                return None;
            }
            let mut acc = if row == col { T::one() } else { T::zero() };
            for k in 0..row {
                acc = acc - l[row][k] * inv[k][col];
            }
            inv[row][col] = acc / l[row][row];
        }
    }
    Some(inv)
}

pub(crate) fn mat_mul<T: Scalar>(a: &Mat6<T>, b: &Mat6<T>) -> Mat6<T> {
    let mut out = [[T::zero(); 6]; 6];
    for i in 0..6 {
        for k in 0..6 {
            let aik = a[i][k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..6 {
                out[i][j] = out[i][j] + aik * b[k][j];
            }
        }
    }
    out
}

fn mat_vec<T: Scalar>(a: &Mat6<T>, v: &[T; 6]) -> [T; 6] {
    let mut out = [T::zero(); 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i] = out[i] + a[i][j] * v[j];
        }
    }
    out
}

fn max_abs<T: Scalar>(v: impl IntoIterator<Item = T>) -> T {
    v.into_iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Default relative tolerance and iteration cap of [`spectral_radius`].
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;
/// `(1 + δ)^(2^60)` is huge for any `δ` above rounding, so after this many
/// squarings only eigenvalues equal to machine precision remain mixed.
pub const MIN_SQUARINGS: usize = 60;

/// Perron root of a nonnegative 6×6 matrix by power iteration.
///
/// The next-generation matrix has eigenvalues in `±λ` pairs, so the plain
/// power method oscillates. The iteration therefore runs on `K²` and squares
/// the iteration matrix after every step: after `k` steps the iterate is
/// `(K²)^(2^k) 1`, which separates nearly equal eigenvalues in a few dozen
/// steps. The estimate is `‖K² v‖∞ / ‖v‖∞` and the loop stops when two
/// consecutive estimates agree to `tol` relative, but never before
/// [`MIN_SQUARINGS`] steps: without dispersal `K` is block diagonal, the
/// estimate is exact for whichever block holds the largest entry of `v`, and
/// it would otherwise settle on the smaller local number while the larger
/// one is still catching up.
pub fn spectral_radius<T: Scalar>(k: &Mat6<T>, tol: T, max_iter: usize) -> Result<T> {
    let k2 = mat_mul(k, k);
    let scale = max_abs(k2.iter().flatten().copied());
    if scale == T::zero() {
        return Ok(T::zero());
    }
    let mut power = k2;
    let mut previous: Option<T> = None;
    for step in 0..max_iter.max(MIN_SQUARINGS + 1) {
        let w = mat_vec(&power, &[T::one(); 6]);
        let norm = max_abs(w);
        if norm == T::zero() {
            // nilpotent part swallowed everything
            return Ok(T::zero());
        }
        let v = w.map(|x| x / norm);
        let estimate = max_abs(mat_vec(&k2, &v)) / max_abs(v);
        if let (Some(prev), true) = (previous, step >= MIN_SQUARINGS) {
            if (estimate - prev).abs() <= tol * estimate {
                return Ok(estimate.sqrt());
            }
        }
        previous = Some(estimate);

        let squared = mat_mul(&power, &power);
        let m = max_abs(squared.iter().flatten().copied());
        if m == T::zero() {
            return Ok(estimate.sqrt());
        }
        power = squared.map(|row| row.map(|x| x / m));
    }
    Err(Error::EigenNonConvergence {
        iterations: max_iter,
    })
}

/// Global reproduction number as the spectral radius of `K`.
pub fn global_r0_spectral<T: Scalar>(scenario: &Scenario<T>) -> Result<T> {
    let ngm = build_ngm(scenario)?;
    spectral_radius(&ngm.k_matrix, T::lit(POWER_TOL), POWER_MAX_ITER)
}

/// Coefficients of `det(K - λI) = λ⁶ - b λ⁴ + c λ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPolyCoeffs<T> {
    pub b: T,
    /// Nonnegative; the polynomial carries it with a `+` sign.
    pub c: T,
    /// `b² - 4c`, evaluated without cancellation.
    pub discriminant: T,
}

impl<T: Scalar> CharPolyCoeffs<T> {
    /// The `λ²` coefficient in the `λ⁶ - bλ⁴ - c'λ²` convention, i.e. `-c`.
    pub fn c_signed(&self) -> T {
        -self.c
    }

    pub fn eval(&self, lambda: T) -> T {
        let l2 = lambda * lambda;
        l2 * (l2 * l2 - self.b * l2 + self.c)
    }
}

pub fn char_poly_coeffs<T: Scalar>(scenario: &Scenario<T>) -> Result<CharPolyCoeffs<T>> {
    let d = derived_quantities(scenario)?;
    let r10_sq = local_r0_squared(scenario, Orchard::First)?;
    let r20_sq = local_r0_squared(scenario, Orchard::Second)?;
    let phi11 = scenario.phi11();
    let phi12 = scenario.phi12;
    let home = phi11 * phi11 * r10_sq;
    let crossing = d.theta12 * phi12 * phi12 * r20_sq;
    let second = r20_sq + crossing;
    let gap = home - second;
    Ok(CharPolyCoeffs {
        b: home + second,
        c: home * r20_sq,
        discriminant: gap * gap + T::lit(4.0) * home * crossing,
    })
}

/// Largest root of the characteristic polynomial.
pub fn global_r0_from_coeffs<T: Scalar>(coeffs: &CharPolyCoeffs<T>) -> T {
    let half = T::lit(0.5);
    (half * (coeffs.b + coeffs.discriminant.sqrt())).sqrt()
}

/// Relative disagreement above which the closed form is rejected.
pub const CLOSED_FORM_CHECK_TOL: f64 = 1e-6;

/// Global reproduction number from the closed form, cross-checked against
/// the spectral radius.
pub fn global_r0_closed<T: Scalar>(scenario: &Scenario<T>) -> Result<T> {
    let closed = global_r0_from_coeffs(&char_poly_coeffs(scenario)?);
    let spectral = global_r0_spectral(scenario)?;
    let tol = T::lit(CLOSED_FORM_CHECK_TOL).max(T::epsilon().sqrt());
    if (closed - spectral).abs() > tol * (T::one() + spectral) {
        return Err(Error::InconsistentClosedForm {
            closed: closed.as_f64(),
            spectral: spectral.as_f64(),
        });
    }
    Ok(closed)
}
