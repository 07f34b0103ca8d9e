use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{centered_dft, SampledPulse};
use crate::error::{Error, Result};

/// Per-sample complex noise variance `σ²` and the seed of its stream family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_sq: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_sq: f64, seed: u64) -> Result<Self> {
        if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
            return Err(Error::Validation(format!("noise variance must be >= 0, got {sigma_sq}")));
        }
        Ok(Self { sigma_sq, seed })
    }

    /// Generator for one trial: ChaCha keyed by `seed`, stream `trial`.
    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    /// The `M` noise samples of one trial.
    pub fn realization(&self, len: usize, trial: u64) -> Vec<Complex64> {
        let std = (0.5 * self.sigma_sq).sqrt();
        let mut rng = self.rng(trial);
        (0..len)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(std * re, std * im)
            })
            .collect()
    }
}

/// `q̂_m = q_m + q̃_m` with circularly symmetric Gaussian `q̃_m` of variance `σ²`.
pub fn add_awgn(pulse: &SampledPulse, noise: &NoiseSpec, trial: u64) -> Result<SampledPulse> {
    if !(noise.sigma_sq >= 0.0) {
        return Err(Error::Validation(format!("noise variance must be >= 0, got {}", noise.sigma_sq)));
    }
    if noise.sigma_sq == 0.0 {
        return Ok(pulse.clone());
    }
    let noisy = pulse
        .samples()
        .iter()
        .zip(noise.realization(pulse.len(), trial))
        .map(|(q, n)| q + n)
        .collect();
    SampledPulse::new(*pulse.grid(), noisy)
}

/// Linear SNR `Σ_n |c_n|² / (M σ_c²)` with `σ_c² = σ²/M`.
pub fn snr(pulse: &SampledPulse, sigma_sq: f64) -> Result<f64> {
    if sigma_sq == 0.0 {
        return Err(Error::InfiniteSnr);
    }
    if !(sigma_sq > 0.0) {
        return Err(Error::Validation(format!("noise variance must be > 0, got {sigma_sq}")));
    }
    let m = pulse.len() as f64;
    let sigma_c_sq = sigma_sq / m;
    Ok(centered_dft(pulse)?.energy() / (m * sigma_c_sq))
}

/// `σ²` that puts `pulse` at the requested SNR.
pub fn sigma_sq_for_snr_db(pulse: &SampledPulse, snr_db: f64) -> f64 {
    pulse.mean_power() / db_to_linear(snr_db)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
