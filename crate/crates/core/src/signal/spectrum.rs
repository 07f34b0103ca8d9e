use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum pairwise eigenvalue distance accepted by [`DiscreteSpectrum::new`].
pub const DEFAULT_SEPARATION: f64 = 1e-6;

/// One discrete-spectrum point `(λ_k, Q_d(λ_k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEntry {
    pub eigenvalue: Complex64,
    pub amplitude: Complex64,
}

impl SpectralEntry {
    pub fn new(eigenvalue: Complex64, amplitude: Complex64) -> Self {
        Self { eigenvalue, amplitude }
    }
}

/// K distinct upper-half-plane eigenvalues with nonzero amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSpectrum {
    entries: Vec<SpectralEntry>,
}

impl DiscreteSpectrum {
    pub fn new(entries: Vec<SpectralEntry>) -> Result<Self> {
        Self::with_separation(entries, DEFAULT_SEPARATION)
    }

    pub fn with_separation(entries: Vec<SpectralEntry>, min_separation: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("discrete spectrum is empty".into()));
        }
        for e in &entries {
            let finite = [e.eigenvalue.re, e.eigenvalue.im, e.amplitude.re, e.amplitude.im]
                .iter()
                .all(|x| x.is_finite());
            if !finite {
                return Err(Error::Validation(format!("non-finite spectral entry {e:?}")));
            }
            if e.eigenvalue.im <= 0.0 {
                return Err(Error::Validation(format!(
                    "eigenvalue {} is not in the upper half plane",
                    e.eigenvalue
                )));
            }
            if e.amplitude == Complex64::new(0.0, 0.0) {
                return Err(Error::Validation(format!(
                    "amplitude of eigenvalue {} is zero",
                    e.eigenvalue
                )));
            }
        }
        for (i, a) in entries.iter().enumerate() {
            for b in &entries[i + 1..] {
                if (a.eigenvalue - b.eigenvalue).norm() <= min_separation {
                    return Err(Error::DegenerateSpectrum(a.eigenvalue, b.eigenvalue));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[SpectralEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.eigenvalue).collect()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.amplitude).collect()
    }

    /// Energy `4 Σ Im λ_k` of the corresponding multi-soliton.
    pub fn soliton_energy(&self) -> f64 {
        4.0 * self.entries.iter().map(|e| e.eigenvalue.im).sum::<f64>()
    }
}

/// Lossless fiber evolution: eigenvalues are fixed and
/// `Q_d(z) = Q_d(0) e^{4jλ²z}`.
pub fn evolve_discrete_spectrum(spectrum: &DiscreteSpectrum, z: f64) -> DiscreteSpectrum {
    let j4z = Complex64::new(0.0, 4.0 * z);
    let entries = spectrum
        .entries
        .iter()
        .map(|e| SpectralEntry {
            eigenvalue: e.eigenvalue,
            amplitude: e.amplitude * (j4z * e.eigenvalue * e.eigenvalue).exp(),
        })
        .collect();
    DiscreteSpectrum { entries }
}
