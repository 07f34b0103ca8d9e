//! First-order eigenvalue statistics of the collocation operator under noise.
//!
//! For a simple eigenpair `S a = λ a` with left row vector `b` (index
//! reversal of `a`), a perturbation `S̃` moves the eigenvalue by
//! `λ̃ = b S̃ a / (b a)` to first order. Because `S̃` is linear in the noise
//! coefficients `c̃_n`, `(Re λ̃, Im λ̃)` is a real linear map `D` of
//! `(Re c̃, Im c̃)`, and i.i.d. circular noise gives the covariance
//! `C = σ²/(2M) D Dᵀ`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::collocation::{CollocationOperator, FourierEigenpair};
use crate::error::{Error, Result};
use crate::signal::FourierCoefficients;

/// `r[n] = (1/g) Σ_p a[p] a[n−p]` for `n = −N..=N`; entries of `a` outside
/// `−N..=N` are zero.
pub fn jost_autocorrelation(a_half: &[Complex64], g: Complex64) -> Result<Vec<Complex64>> {
    if g == Complex64::new(0.0, 0.0) || !(g.re.is_finite() && g.im.is_finite()) {
        return Err(Error::DegenerateNormalization);
    }
    let m = a_half.len();
    if m % 2 == 0 {
        return Err(Error::EvenSampleCount(m));
    }
    let half = (m - 1) / 2;
    let len = (2 * m - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    buf[..m].copy_from_slice(a_half);
    planner.plan_fft_forward(len).process(&mut buf);
    let scale = 1.0 / (len as f64 * g);
    for b in buf.iter_mut() {
        *b = *b * *b * scale;
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    // stored index of lag n is n + 2N
    Ok(buf[half..half + m].to_vec())
}

/// `g = 2 Σ_n a_1[n] a_2[−n]`, the left-right product `b a`.
pub fn normalization(pair: &FourierEigenpair) -> Complex64 {
    let a1 = pair.first_half();
    let a2 = pair.second_half();
    2.0 * a1.iter().zip(a2.iter().rev()).map(|(x, y)| x * y).sum::<Complex64>()
}

/// `λ̃ = (b_1 Γ̃ a_2 − b_2 Γ̃ᴴ a_1) / (b_1 a_1 + b_2 a_2)`.
pub fn first_order_shift(pair: &FourierEigenpair, noise_op: &CollocationOperator) -> Result<Complex64> {
    let a = pair.vector();
    if a.len() != noise_op.dim() {
        return Err(Error::Dimension { expected: noise_op.dim(), actual: a.len() });
    }
    let b = pair.left_vector();
    let den: Complex64 = b.iter().zip(a).map(|(x, y)| x * y).sum();
    let a_norm_sq: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    if den.norm() < 1e-12 * a_norm_sq {
        return Err(Error::IllConditionedEigenpair(den.norm()));
    }
    // S̃ a = (Γ̃ a_2 ; −Γ̃ᴴ a_1)
    let sa = noise_op.apply(a);
    let num: Complex64 = b.iter().zip(&sa).map(|(x, y)| x * y).sum();
    Ok(num / den)
}

/// Real `2K × 2M` map from `(Re c̃, Im c̃)` to `(ξ_1..ξ_K, η_1..η_K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityMatrix {
    eigenvalues: usize,
    block_len: usize,
    /// Row-major.
    data: Vec<f64>,
}

impl SensitivityMatrix {
    pub fn rows(&self) -> usize {
        2 * self.eigenvalues
    }

    pub fn cols(&self) -> usize {
        2 * self.block_len
    }

    pub fn eigenvalue_count(&self) -> usize {
        self.eigenvalues
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols()..(row + 1) * self.cols()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// First-order shifts `(ξ, η)` for the given noise coefficients.
    pub fn apply(&self, noise: &FourierCoefficients) -> Result<Vec<f64>> {
        if noise.len() != self.block_len {
            return Err(Error::Dimension { expected: self.block_len, actual: noise.len() });
        }
        let x: Vec<f64> = noise
            .as_slice()
            .iter()
            .map(|c| c.re)
            .chain(noise.as_slice().iter().map(|c| c.im))
            .collect();
        Ok((0..self.rows()).map(|r| self.row(r).iter().zip(&x).map(|(d, v)| d * v).sum()).collect())
    }

    /// Complex shifts `λ̃_k = ξ_k + jη_k`.
    pub fn shifts(&self, noise: &FourierCoefficients) -> Result<Vec<Complex64>> {
        let v = self.apply(noise)?;
        let k = self.eigenvalues;
        Ok((0..k).map(|i| Complex64::new(v[i], v[k + i])).collect())
    }
}

/// Rows `[Im(r̄₂ + r₁), Re(r̄₂ − r₁)]` for `ξ_k` and `[Re(−r̄₂ − r₁), Im(r̄₂ − r₁)]`
/// for `η_k`, with `r̄₂[n] = r₂[−n]`.
pub fn build_sensitivity(pairs: &[FourierEigenpair]) -> Result<SensitivityMatrix> {
    let Some(first) = pairs.first() else {
        return Err(Error::Validation("no eigenpairs given".into()));
    };
    let m = first.block_len();
    let k = pairs.len();
    let mut data = vec![0.0; 2 * k * 2 * m];
    for (idx, pair) in pairs.iter().enumerate() {
        if pair.block_len() != m {
            return Err(Error::Dimension { expected: m, actual: pair.block_len() });
        }
        let g = normalization(pair);
        let r1 = jost_autocorrelation(pair.first_half(), g)?;
        let r2 = jost_autocorrelation(pair.second_half(), g)?;
        let xi = idx * 2 * m;
        let eta = (k + idx) * 2 * m;
        for n in 0..m {
            let r2_bar = r2[m - 1 - n];
            let plus = r2_bar + r1[n];
            let minus = r2_bar - r1[n];
            data[xi + n] = plus.im;
            data[xi + m + n] = minus.re;
            data[eta + n] = -plus.re;
            data[eta + m + n] = minus.im;
        }
    }
    Ok(SensitivityMatrix { eigenvalues: k, block_len: m, data })
}

/// Covariance of `(ξ_1..ξ_K, η_1..η_K)`, row-major `2K × 2K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigCovariance {
    pub dim: usize,
    pub sigma_sq: f64,
    pub samples: usize,
    pub matrix: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EigCovariance {
    pub fn new(dim: usize, matrix: Vec<f64>, sigma_sq: f64, samples: usize) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::Shape(format!("expected {dim}x{dim} entries, got {}", matrix.len())));
        }
        Ok(Self { dim, sigma_sq, samples, matrix, warnings: Vec::new() })
    }

    pub fn eigenvalue_count(&self) -> usize {
        self.dim / 2
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.iter().map(|v| v * v).sum()
    }

    /// `Var(ξ_k)` and `Var(η_k)`.
    pub fn variances(&self, k: usize) -> (f64, f64) {
        let kk = self.eigenvalue_count();
        (self.get(k, k), self.get(kk + k, kk + k))
    }

    /// Flags first-order theory as unreliable when two eigenvalues are within
    /// ten standard deviations of each other.
    pub fn check_separation(&mut self, eigenvalues: &[Complex64]) {
        let kk = self.eigenvalue_count();
        if eigenvalues.len() != kk {
            return;
        }
        let spread = (0..kk)
            .map(|k| {
                let (a, b) = self.variances(k);
                (a + b).sqrt()
            })
            .fold(0.0, f64::max);
        for i in 0..kk {
            for j in i + 1..kk {
                let gap = (eigenvalues[i] - eigenvalues[j]).norm();
                if gap < 10.0 * spread {
                    let msg = format!(
                        "eigenvalues {} and {} are {gap:.3e} apart, within 10x the shift scale {spread:.3e}",
                        eigenvalues[i], eigenvalues[j]
                    );
                    log::warn!("{msg}");
                    self.warnings.push(msg);
                }
            }
        }
    }
}

/// `C = σ²/(2M) D Dᵀ`.
pub fn analytic_covariance(d: &SensitivityMatrix, sigma_sq: f64, m: usize) -> Result<EigCovariance> {
    if m != d.block_len() {
        return Err(Error::Shape(format!(
            "sensitivity matrix has {} columns, expected 2M = {}",
            d.cols(),
            2 * m
        )));
    }
    if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
        return Err(Error::Validation(format!("noise variance must be >= 0, got {sigma_sq}")));
    }
    let rows = d.rows();
    let scale = sigma_sq / (2.0 * m as f64);
    let mut c = vec![0.0; rows * rows];
    for i in 0..rows {
        for j in i..rows {
            let v = scale * d.row(i).iter().zip(d.row(j)).map(|(a, b)| a * b).sum::<f64>();
            c[i * rows + j] = v;
            c[j * rows + i] = v;
        }
    }
    EigCovariance::new(rows, c, sigma_sq, m)
}

#[cfg(test)]
mod tests;
