//! Operating point of the two-soliton validation experiment.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::signal::{DiscreteSpectrum, SpectralEntry, TimeGrid};

pub const HALF_WINDOW: f64 = 12.4842;
pub const SAMPLES: usize = 256;
pub const SIGMA_SQ: f64 = 0.014362;
pub const SNR_DB: f64 = 10.0;
pub const TRIALS: usize = 12288;
pub const PHASE_POINTS: usize = 64;

pub const AMPLITUDES: [f64; 2] = [1.8, 3.6];

pub fn eigenvalues() -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.3), Complex64::new(0.0, 0.6)]
}

/// `Q_d(0.3j) = 1.8`, `Q_d(0.6j) = 3.6 e^{jφ}` with `φ = 2π·phase_turns`.
pub fn two_soliton(phase_turns: f64) -> DiscreteSpectrum {
    let lam = eigenvalues();
    DiscreteSpectrum::new(vec![
        SpectralEntry::new(lam[0], Complex64::new(AMPLITUDES[0], 0.0)),
        SpectralEntry::new(lam[1], Complex64::from_polar(AMPLITUDES[1], TAU * phase_turns)),
    ])
    .expect("reference spectrum is valid")
}

/// The 256-sample window extended to 257 samples.
pub fn grid() -> TimeGrid {
    TimeGrid::odd(-HALF_WINDOW, HALF_WINDOW, SAMPLES).expect("reference grid is valid").0
}

/// `len` samples spanning exactly `±HALF_WINDOW`.
pub fn grid_with(len: usize) -> TimeGrid {
    TimeGrid::new(-HALF_WINDOW, HALF_WINDOW, len).expect("reference grid is valid")
}

/// `count` phases uniformly covering `[0, 1)` turns.
pub fn uniform_phases(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / count as f64).collect()
}
