//! Sampled signals on a uniform time grid, their centered DFT, noise
//! injection and SNR bookkeeping, and the noiseless evolution of a discrete
//! nonlinear spectrum.

mod dft;
mod grid;
mod noise;
mod spectrum;

pub use dft::{centered_dft, centered_idft, FourierCoefficients};
pub use grid::{SampledPulse, TimeGrid};
pub use noise::{add_awgn, db_to_linear, linear_to_db, sigma_sq_for_snr_db, snr, NoiseSpec};
pub use spectrum::{evolve_discrete_spectrum, DiscreteSpectrum, SpectralEntry, DEFAULT_SEPARATION};
