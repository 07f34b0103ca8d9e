//! Fourier-collocation (FC) form of the Zakharov-Shabat eigenproblem.
//!
//! With `q_m = Σ c_n e^{jn2πm/M}` and the Jost solutions expanded in the same
//! basis, the ZSS becomes the `2M × 2M` matrix eigenproblem `S a = λ a` with
//!
//! ```text
//!     S = [  Ω    Γ ]      Ω = -(2π/L) diag(-N..N)
//!         [ -Γᴴ  -Ω ]      Γ[m,n] = -j c_{m-n}   (|m-n| <= N)
//! ```

mod toeplitz;
mod tracking;

use faer::Mat;
use num_complex::Complex64;

use crate::darboux::JostSolution;
use crate::error::{Error, Result};
use crate::signal::{centered_dft, FourierCoefficients, SampledPulse, TimeGrid};

pub use toeplitz::StructuredOperator;
pub use tracking::{EigenTracker, TrackOutcome};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Candidates with `Im λ` at or below this are treated as continuum clutter.
pub const DEFAULT_IM_THRESHOLD: f64 = 0.05;

/// `S` (or its noise part `S̃`, which has `Ω = 0`) in block form.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationOperator {
    omega: Vec<f64>,
    coeffs: FourierCoefficients,
}

impl CollocationOperator {
    /// Order `M` of each block.
    pub fn block_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.coeffs.len()
    }

    pub fn coeffs(&self) -> &FourierCoefficients {
        &self.coeffs
    }

    pub fn period(&self) -> f64 {
        self.coeffs.period()
    }

    /// Diagonal of `Ω`, ascending `n`.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn is_perturbation(&self) -> bool {
        self.omega.iter().all(|&w| w == 0.0)
    }

    /// `Γ[m, n]` with block-local indices `0..M` (frequency `m - N`, `n - N`).
    pub fn gamma(&self, row: usize, col: usize) -> Complex64 {
        -J * self.coeffs.get(row as isize - col as isize)
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let m = self.block_len();
        Mat::from_fn(2 * m, 2 * m, |r, c| match (r < m, c < m) {
            (true, true) => diag(r, c, self.omega[r]),
            (true, false) => self.gamma(r, c - m),
            (false, true) => -self.gamma(c, r - m).conj(),
            (false, false) => diag(r, c, -self.omega[r - m]),
        })
    }

    /// Upper bound on the spectral norm: `max|Ω| + Σ|c_n|`.
    pub fn norm_bound(&self) -> f64 {
        let omega = self.omega.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        omega + self.coeffs.as_slice().iter().map(|c| c.norm()).sum::<f64>()
    }

    /// `S x` through FFT-based Toeplitz products.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        StructuredOperator::new(self).apply(x)
    }
}

fn diag(r: usize, c: usize, v: f64) -> Complex64 {
    if r == c {
        Complex64::new(v, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Builds `S` from the Fourier coefficients of the pulse.
pub fn assemble_operator(coeffs: &FourierCoefficients) -> Result<CollocationOperator> {
    if coeffs.len() % 2 == 0 {
        return Err(Error::EvenSampleCount(coeffs.len()));
    }
    let half = coeffs.half_len() as isize;
    let step = std::f64::consts::TAU / coeffs.period();
    let omega = (-half..=half).map(|n| -step * n as f64).collect();
    Ok(CollocationOperator { omega, coeffs: coeffs.clone() })
}

/// Builds `S̃`: zero diagonal blocks, `Γ̃` from the noise coefficients.
pub fn assemble_perturbation(noise: &FourierCoefficients) -> Result<CollocationOperator> {
    if noise.len() % 2 == 0 {
        return Err(Error::EvenSampleCount(noise.len()));
    }
    Ok(CollocationOperator { omega: vec![0.0; noise.len()], coeffs: noise.clone() })
}

/// `S` of a sampled pulse.
pub fn pulse_operator(pulse: &SampledPulse) -> Result<CollocationOperator> {
    assemble_operator(&centered_dft(pulse)?)
}

/// Eigenvalue `λ` with its right eigenvector `a = (a_1; a_2)`, unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierEigenpair {
    pub eigenvalue: Complex64,
    vector: Vec<Complex64>,
}

impl FourierEigenpair {
    /// Normalizes `vector` to unit Euclidean norm.
    pub fn new(eigenvalue: Complex64, vector: Vec<Complex64>) -> Result<Self> {
        if vector.len() % 2 != 0 || (vector.len() / 2) % 2 == 0 {
            return Err(Error::Validation(format!(
                "eigenvector length must be 2M with odd M, got {}",
                vector.len()
            )));
        }
        let norm = vector.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateNormalization);
        }
        Ok(Self { eigenvalue, vector: vector.into_iter().map(|v| v / norm).collect() })
    }

    /// Keeps the caller's scaling.
    pub fn unnormalized(eigenvalue: Complex64, vector: Vec<Complex64>) -> Self {
        Self { eigenvalue, vector }
    }

    /// DFT of Jost solution samples, `a_{k,i}[n] = DFT(v_{k,i})[n]`.
    pub fn from_jost(jost: &JostSolution, grid: &TimeGrid) -> Result<Self> {
        let v1 = centered_dft(&SampledPulse::new(*grid, jost.v1.clone())?)?;
        let v2 = centered_dft(&SampledPulse::new(*grid, jost.v2.clone())?)?;
        let mut vector = v1.as_slice().to_vec();
        vector.extend_from_slice(v2.as_slice());
        Self::new(jost.eigenvalue, vector)
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn block_len(&self) -> usize {
        self.vector.len() / 2
    }

    pub fn first_half(&self) -> &[Complex64] {
        &self.vector[..self.block_len()]
    }

    pub fn second_half(&self) -> &[Complex64] {
        &self.vector[self.block_len()..]
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self { eigenvalue: self.eigenvalue, vector: self.vector.iter().map(|v| v * alpha).collect() }
    }

    /// Row vector `b = (b_1, b_2)` with `b_1[m] = a_2[-m]`, `b_2[m] = a_1[-m]`;
    /// a left eigenvector of `S` for the same eigenvalue.
    pub fn left_vector(&self) -> Vec<Complex64> {
        let mut b: Vec<Complex64> = self.second_half().iter().rev().copied().collect();
        b.extend(self.first_half().iter().rev());
        b
    }

    /// `‖S a − λ a‖ / ‖a‖`.
    pub fn residual(&self, op: &CollocationOperator) -> f64 {
        let sa = op.apply(&self.vector);
        let num: f64 = sa
            .iter()
            .zip(&self.vector)
            .map(|(s, a)| (s - self.eigenvalue * a).norm_sqr())
            .sum::<f64>()
            .sqrt();
        num / self.vector.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// All `2M` eigenpairs of the dense operator.
pub fn solve_eigenproblem(op: &CollocationOperator) -> Result<Vec<FourierEigenpair>> {
    let dense = op.to_dense();
    let evd = dense
        .eigen()
        .map_err(|_| Error::EigenNoConvergence { converged: 0, total: op.dim() })?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    (0..op.dim())
        .map(|k| {
            let v: Vec<Complex64> = (0..op.dim()).map(|r| vectors[(r, k)]).collect();
            FourierEigenpair::new(values[k], v)
        })
        .collect()
}

/// All `2M` eigenvalues, without eigenvectors.
pub fn solve_eigenvalues(op: &CollocationOperator) -> Result<Vec<Complex64>> {
    op.to_dense()
        .eigenvalues()
        .map_err(|_| Error::EigenNoConvergence { converged: 0, total: op.dim() })
}

/// One-to-one nearest matching of `refs` against the candidates with
/// `Im λ > im_threshold`. Pairs are accepted greedily in order of increasing
/// distance, ties going to the larger `Im λ`. Returns, per reference, the
/// index into `candidates`.
pub fn match_eigenvalues(
    candidates: &[Complex64],
    refs: &[Complex64],
    im_threshold: f64,
) -> Result<Vec<usize>> {
    let mut pairs: Vec<(f64, f64, usize, usize)> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.im > im_threshold)
        .flat_map(|(ci, c)| refs.iter().enumerate().map(move |(ri, r)| ((c - r).norm(), c.im, ci, ri)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));

    let mut assigned: Vec<Option<usize>> = vec![None; refs.len()];
    let mut taken = vec![false; candidates.len()];
    for (_, _, ci, ri) in pairs {
        if assigned[ri].is_none() && !taken[ci] {
            assigned[ri] = Some(ci);
            taken[ci] = true;
        }
    }
    let missing: Vec<Complex64> =
        refs.iter().zip(&assigned).filter(|(_, a)| a.is_none()).map(|(r, _)| *r).collect();
    if !missing.is_empty() {
        return Err(Error::MissingEigenvalue(missing));
    }
    Ok(assigned.into_iter().map(|a| a.unwrap()).collect())
}

/// Physical eigenpairs matched to `refs`, in `refs` order.
pub fn extract_discrete_spectrum(
    pairs: &[FourierEigenpair],
    refs: &[Complex64],
) -> Result<Vec<FourierEigenpair>> {
    let values: Vec<Complex64> = pairs.iter().map(|p| p.eigenvalue).collect();
    let idx = match_eigenvalues(&values, refs, DEFAULT_IM_THRESHOLD)?;
    Ok(idx.into_iter().map(|i| pairs[i].clone()).collect())
}
