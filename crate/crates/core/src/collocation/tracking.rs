//! Local eigen-solver for `S + S̃` near a simple eigenvalue of `S`.
//!
//! Writing the perturbed pair as `(λ + μ, a + e)` with `b e = 0`, the
//! eigen-equation becomes the bordered system
//!
//! ```text
//!     [ S − λI   a ] [  e ]   [ −S̃ (a + e) + μ e ]
//!     [   b      0 ] [ −μ ] = [         0         ]
//! ```
//!
//! The bordered matrix depends only on the noiseless pair, so it is inverted
//! once and the right-hand side is iterated to a fixed point. Each sweep adds
//! one order of the perturbation series and costs one dense mat-vec plus an
//! FFT-based `S̃` product. The first sweep is exactly the first-order shift.

use faer::linalg::solvers::Solve;
use faer::{Col, Mat};
use num_complex::Complex64;

use super::{CollocationOperator, FourierEigenpair, StructuredOperator};
use crate::error::{Error, Result};

const ANDERSON_DEPTH: usize = 6;

/// Anderson mixing over the last `depth` fixed-point evaluations.
struct Anderson {
    depth: usize,
    last: Option<(Vec<Complex64>, Vec<Complex64>)>,
    d_f: Vec<Vec<Complex64>>,
    d_g: Vec<Vec<Complex64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self { depth, last: None, d_f: Vec::new(), d_g: Vec::new() }
    }

    /// Next iterate from the current point `x` and its image `g = G(x)`.
    fn next(&mut self, x: &[Complex64], g: Vec<Complex64>) -> Vec<Complex64> {
        let f: Vec<Complex64> = g.iter().zip(x).map(|(g, x)| g - x).collect();
        if let Some((f_prev, g_prev)) = self.last.take() {
            if self.d_f.len() == self.depth {
                self.d_f.remove(0);
                self.d_g.remove(0);
            }
            self.d_f.push(f.iter().zip(&f_prev).map(|(a, b)| a - b).collect());
            self.d_g.push(g.iter().zip(&g_prev).map(|(a, b)| a - b).collect());
        }
        let out = match self.mixing_weights(&f) {
            Some(gamma) => {
                let mut out = g.clone();
                for (w, dg) in gamma.iter().zip(&self.d_g) {
                    for (o, d) in out.iter_mut().zip(dg) {
                        *o -= w * d;
                    }
                }
                out
            }
            None => g.clone(),
        };
        self.last = Some((f, g));
        out
    }

    /// Least-squares `γ = argmin ‖f − ΔF γ‖` through the normal equations.
    fn mixing_weights(&mut self, f: &[Complex64]) -> Option<Vec<Complex64>> {
        let m = self.d_f.len();
        if m == 0 {
            return None;
        }
        let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>();
        let mut gram = Mat::from_fn(m, m, |i, j| dot(&self.d_f[i], &self.d_f[j]));
        let scale = (0..m).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
        if !(scale > 0.0) {
            self.d_f.clear();
            self.d_g.clear();
            return None;
        }
        for i in 0..m {
            gram[(i, i)] += 1e-12 * scale;
        }
        let rhs = Col::from_fn(m, |i| dot(&self.d_f[i], f));
        let gamma = gram.partial_piv_lu().solve(&rhs);
        let gamma: Vec<Complex64> = (0..m).map(|i| gamma[i]).collect();
        gamma.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(gamma)
    }
}

/// Fixed-point iteration around one noiseless eigenpair of `S`.
#[derive(Debug, Clone)]
pub struct EigenTracker {
    eigenvalue: Complex64,
    vector: Vec<Complex64>,
    base: StructuredOperator,
    base_norm: f64,
    bordered_inverse: Mat<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrackOutcome {
    Converged { eigenvalue: Complex64, iterations: usize, residual: f64 },
    /// Iteration diverged or stalled; a global solve is needed.
    Lost { iterations: usize },
}

impl EigenTracker {
    pub fn new(op: &CollocationOperator, pair: &FourierEigenpair) -> Result<Self> {
        let dim = op.dim();
        if pair.vector().len() != dim {
            return Err(Error::Dimension { expected: dim, actual: pair.vector().len() });
        }
        let lam = pair.eigenvalue;
        let a = pair.vector();
        let b = pair.left_vector();
        let dense = op.to_dense();
        let bordered = Mat::from_fn(dim + 1, dim + 1, |r, c| match (r < dim, c < dim) {
            (true, true) => {
                if r == c {
                    dense[(r, c)] - lam
                } else {
                    dense[(r, c)]
                }
            }
            (true, false) => a[r],
            (false, true) => b[c],
            (false, false) => Complex64::new(0.0, 0.0),
        });
        let inverse = {
            use faer::linalg::solvers::DenseSolveCore;
            bordered.partial_piv_lu().inverse()
        };
        let finite = (0..dim + 1).all(|c| (0..dim + 1).all(|r| inverse[(r, c)].is_finite()));
        if !finite {
            return Err(Error::IllConditionedEigenpair(0.0));
        }
        Ok(Self {
            eigenvalue: lam,
            vector: a.to_vec(),
            base: StructuredOperator::new(op),
            base_norm: op.norm_bound(),
            bordered_inverse: inverse,
        })
    }

    pub fn eigenvalue(&self) -> Complex64 {
        self.eigenvalue
    }

    /// One sweep from `e = 0, μ = 0`: the first-order shift `b S̃ a / (b a)`.
    pub fn first_order(&self, noise: &StructuredOperator) -> Complex64 {
        let dim = self.vector.len();
        let s = noise.apply(&self.vector);
        let rhs = Col::from_fn(dim + 1, |r| if r == dim { Complex64::new(0.0, 0.0) } else { -s[r] });
        let sol = &self.bordered_inverse * &rhs;
        -sol[dim]
    }

    /// Iterates until `|Δμ| <= tol` and verifies the backward error of the
    /// result against `S + S̃`. The fixed-point sweeps are Anderson-accelerated.
    pub fn track(&self, noise: &StructuredOperator, tol: f64, max_iter: usize) -> TrackOutcome {
        self.track_batch(&[noise], tol, max_iter).pop().expect("one outcome per noise operator")
    }

    /// [`track`](Self::track) for several independent perturbations at once,
    /// sharing each product with the bordered inverse.
    pub fn track_batch(&self, noises: &[&StructuredOperator], tol: f64, max_iter: usize) -> Vec<TrackOutcome> {
        let dim = self.vector.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut states: Vec<Vec<Complex64>> = vec![vec![zero; dim + 1]; noises.len()];
        let mut mixers: Vec<Anderson> = noises.iter().map(|_| Anderson::new(ANDERSON_DEPTH)).collect();
        let mut outcomes: Vec<Option<TrackOutcome>> = vec![None; noises.len()];
        for it in 1..=max_iter {
            let active: Vec<usize> = (0..noises.len()).filter(|&i| outcomes[i].is_none()).collect();
            if active.is_empty() {
                break;
            }
            let mut rhs = Mat::<Complex64>::zeros(dim + 1, active.len());
            for (col, &i) in active.iter().enumerate() {
                let (e, mu) = states[i].split_at(dim);
                let x: Vec<Complex64> = self.vector.iter().zip(e).map(|(a, e)| a + e).collect();
                let s = noises[i].apply(&x);
                for r in 0..dim {
                    rhs[(r, col)] = -s[r] + mu[0] * e[r];
                }
            }
            let sol = &self.bordered_inverse * &rhs;
            for (col, &i) in active.iter().enumerate() {
                let mu_prev = states[i][dim];
                let mu_new = -sol[(dim, col)];
                if !(mu_new.re.is_finite() && mu_new.im.is_finite()) {
                    outcomes[i] = Some(TrackOutcome::Lost { iterations: it });
                    continue;
                }
                let mut g: Vec<Complex64> = (0..dim).map(|r| sol[(r, col)]).collect();
                g.push(mu_new);
                if (mu_new - mu_prev).norm() <= tol {
                    let lam = self.eigenvalue + mu_new;
                    let x: Vec<Complex64> = self.vector.iter().zip(&g).map(|(a, e)| a + e).collect();
                    let residual = self.residual(noises[i], &x, lam);
                    let x_norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                    if residual <= 1e-10 * self.base_norm.max(1.0) * x_norm {
                        outcomes[i] = Some(TrackOutcome::Converged { eigenvalue: lam, iterations: it, residual });
                        continue;
                    }
                }
                states[i] = mixers[i].next(&states[i], g);
            }
        }
        outcomes.into_iter().map(|o| o.unwrap_or(TrackOutcome::Lost { iterations: max_iter })).collect()
    }

    fn residual(&self, noise: &StructuredOperator, x: &[Complex64], lam: Complex64) -> f64 {
        let sx = self.base.apply(x);
        let nx = noise.apply(x);
        sx.iter()
            .zip(&nx)
            .zip(x)
            .map(|((s, n), xi)| (s + n - lam * xi).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}
