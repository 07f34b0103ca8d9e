//! Multi-soliton pulses, their nonlinear Fourier eigenvalues, and the joint
//! Gaussian statistics of those eigenvalues under additive white noise.
//!
//! * [`signal`]: grids, sampled pulses, centered DFT, AWGN and SNR.
//! * [`darboux`]: K-soliton synthesis together with its Jost solutions.
//! * [`collocation`]: Fourier-collocation operator and eigen-solver.
//! * [`perturbation`]: first-order eigenvalue shifts and analytic covariance.
//! * [`newton`]: forward-backward transfer-matrix scattering and Newton search.
//! * [`experiments`]: Monte-Carlo sweeps comparing empirical and analytic covariance.

pub mod collocation;
pub mod darboux;
pub mod error;
pub mod experiments;
pub mod newton;
pub mod perturbation;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
