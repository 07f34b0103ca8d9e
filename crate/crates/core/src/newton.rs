//! Reference NFT eigenvalue estimator: Newton search on `a(λ)` with
//! forward-backward transfer-matrix propagation.
//!
//! Each grid interval is split in two halves, each propagated with the exact
//! exponential of the constant-potential Zakharov-Shabat generator at the
//! neighbouring sample (trapezoidal weights on the endpoint samples). The
//! left Jost solution is carried forward from `t_min`, the right one
//! backward from `t_max`, and both meet at the sample nearest the energy
//! median of the pulse. `∂/∂λ` is carried alongside by the chain rule.
//! Vectors are renormalized every step and their log scale is tracked
//! separately.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::SampledPulse;

const J: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default Newton step tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Scattering data at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringEval {
    pub lambda: Complex64,
    pub a: Complex64,
    /// `da/dλ`.
    pub a_prime: Complex64,
    /// `φ_2/ψ_2` at the matching point; equals `b(λ)` when `λ` is an eigenvalue.
    pub b: Complex64,
}

type Mat2 = [[Complex64; 2]; 2];
type Vec2 = [Complex64; 2];

fn mul(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `exp(A h)` and its λ-derivative for `A = [[-jλ, q], [-q*, jλ]]`.
fn step_matrix(lambda: Complex64, q: Complex64, h: f64) -> (Mat2, Mat2) {
    let k_sq = -lambda * lambda - q.norm_sqr();
    let k = k_sq.sqrt();
    let kh = k * h;
    // c = cosh(kh), s = sinh(kh)/k, ds_term = (h c − s)/k²; all even in k.
    let (c, s, ds_term) = if kh.norm() < 1e-3 {
        let x = k_sq * h * h;
        (
            ONE + x / 2.0 + x * x / 24.0,
            h * (ONE + x / 6.0 + x * x / 120.0),
            h * h * h * (ONE / 3.0 + x / 30.0),
        )
    } else {
        let c = kh.cosh();
        let s = kh.sinh() / k;
        (c, s, (h * c - s) / k_sq)
    };
    let dc = -lambda * h * s;
    let ds = -lambda * ds_term;
    let a = [[-J * lambda, q], [-q.conj(), J * lambda]];
    let t = [[c + s * a[0][0], s * a[0][1]], [s * a[1][0], c + s * a[1][1]]];
    let dt = [
        [dc + ds * a[0][0] - J * s, ds * a[0][1]],
        [ds * a[1][0], dc + ds * a[1][1] + J * s],
    ];
    (t, dt)
}

/// Jost vector with its λ-derivative, stored as `e^{log_scale} (v, v_λ)`.
struct Carried {
    v: Vec2,
    dv: Vec2,
    log_scale: Complex64,
}

impl Carried {
    fn advance(&mut self, t: &Mat2, dt: &Mat2) {
        let v = mul(t, &self.v);
        let a = mul(dt, &self.v);
        let b = mul(t, &self.dv);
        let dv = [a[0] + b[0], a[1] + b[1]];
        let n = v[0].norm().max(v[1].norm());
        if n > 0.0 && n.is_finite() {
            self.v = [v[0] / n, v[1] / n];
            self.dv = [dv[0] / n, dv[1] / n];
            self.log_scale += n.ln();
        } else {
            self.v = v;
            self.dv = dv;
        }
    }
}

/// Sample index nearest the median of the cumulative energy.
pub fn matching_index(pulse: &SampledPulse) -> usize {
    let q = pulse.samples();
    let total: f64 = q.iter().map(|x| x.norm_sqr()).sum();
    if total == 0.0 {
        return q.len() / 2;
    }
    let mut acc = 0.0;
    for (i, x) in q.iter().enumerate() {
        acc += x.norm_sqr();
        if acc >= 0.5 * total {
            return i;
        }
    }
    q.len() - 1
}

/// `a(λ)`, `a_λ(λ)` and `b` by forward-backward propagation.
pub fn scattering(pulse: &SampledPulse, lambda: Complex64) -> Result<ScatteringEval> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::Validation(format!("spectral parameter {lambda} is not finite")));
    }
    let grid = pulse.grid();
    let q = pulse.samples();
    let h = grid.sample_period();
    let last = q.len() - 1;
    let mid = matching_index(pulse);

    // Consecutive half-interval steps at the same sample merge into one
    // full step, leaving half steps only where a sweep starts or stops.
    let t0 = grid.time(0);
    let mut left = Carried { v: [ONE, ZERO], dv: [-J * t0, ZERO], log_scale: -J * lambda * t0 };
    if mid > 0 {
        let (t, dt) = step_matrix(lambda, q[0], 0.5 * h);
        left.advance(&t, &dt);
        for &qi in &q[1..mid] {
            let (t, dt) = step_matrix(lambda, qi, h);
            left.advance(&t, &dt);
        }
        let (t, dt) = step_matrix(lambda, q[mid], 0.5 * h);
        left.advance(&t, &dt);
    }

    let t1 = grid.time(last);
    let mut right = Carried { v: [ZERO, ONE], dv: [ZERO, J * t1], log_scale: J * lambda * t1 };
    if mid < last {
        let (t, dt) = step_matrix(lambda, q[last], -0.5 * h);
        right.advance(&t, &dt);
        for &qi in q[mid + 1..last].iter().rev() {
            let (t, dt) = step_matrix(lambda, qi, -h);
            right.advance(&t, &dt);
        }
        let (t, dt) = step_matrix(lambda, q[mid], -0.5 * h);
        right.advance(&t, &dt);
    }
    let (p, dp, r, dr) = (left.v, left.dv, right.v, right.dv);
    let wronskian = p[0] * r[1] - p[1] * r[0];
    let d_wronskian = dp[0] * r[1] + p[0] * dr[1] - dp[1] * r[0] - p[1] * dr[0];
    let scale = (left.log_scale + right.log_scale).exp();
    let ratio = (left.log_scale - right.log_scale).exp();
    let a = scale * wronskian;
    let a_prime = scale * d_wronskian;
    let b = ratio * p[1] / r[1];
    if !(a.re.is_finite() && a.im.is_finite() && a_prime.re.is_finite() && a_prime.im.is_finite()) {
        return Err(Error::ScatteringOverflow(lambda));
    }
    Ok(ScatteringEval { lambda, a, a_prime, b })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult {
    pub eigenvalue: Complex64,
    pub iterations: usize,
    /// Iterates that crossed into the lower half plane and were mirrored back.
    pub reflections: usize,
}

/// Newton iteration `λ ← λ − a/a_λ` from `start`.
pub fn newton_refine(
    pulse: &SampledPulse,
    start: Complex64,
    max_iter: usize,
    tol: f64,
) -> Result<NewtonResult> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    if start.im <= 0.0 {
        return Err(Error::Validation(format!("initial guess {start} is not in the upper half plane")));
    }
    let mut lambda = start;
    let mut reflections = 0;
    let mut tol_a = None;
    for it in 1..=max_iter {
        let eval = scattering(pulse, lambda)?;
        let tol_a = *tol_a.get_or_insert(1e-10 * eval.a.norm());
        if eval.a.norm() <= tol_a && it > 1 {
            return Ok(NewtonResult { eigenvalue: lambda, iterations: it - 1, reflections });
        }
        if !(eval.a_prime.norm() >= 1e-12) {
            return Err(Error::FlatDerivative(lambda));
        }
        let delta = eval.a / eval.a_prime;
        let mut next = lambda - delta;
        if next.im <= 0.0 {
            next.im = next.im.abs();
            reflections += 1;
        }
        lambda = next;
        if delta.norm() < tol {
            return Ok(NewtonResult { eigenvalue: lambda, iterations: it, reflections });
        }
    }
    Err(Error::NewtonNoConvergence { iterations: max_iter, last: lambda })
}

/// `Q_d = b(λ)/a_λ(λ)` at a converged eigenvalue.
pub fn discrete_amplitude(pulse: &SampledPulse, lambda_hat: Complex64) -> Result<Complex64> {
    let eval = scattering(pulse, lambda_hat)?;
    if eval.a_prime.norm() < 1e-12 {
        return Err(Error::FlatDerivative(lambda_hat));
    }
    Ok(eval.b / eval.a_prime)
}
