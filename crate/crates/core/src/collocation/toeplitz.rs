use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::CollocationOperator;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// `S x` in `O(M log M)`: both Toeplitz blocks are applied as linear
/// convolutions through a zero-padded FFT.
#[derive(Clone)]
pub struct StructuredOperator {
    omega: Vec<f64>,
    /// FFT of `c_n` padded to `len`.
    gamma_hat: Vec<Complex64>,
    /// FFT of `conj(c_{-n})` padded to `len`.
    gamma_adj_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StructuredOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StructuredOperator")
            .field("block_len", &self.omega.len())
            .field("fft_len", &self.gamma_hat.len())
            .finish()
    }
}

impl StructuredOperator {
    pub fn new(op: &CollocationOperator) -> Self {
        let m = op.block_len();
        let len = (2 * m - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let c = op.coeffs().as_slice();
        let mut gamma_hat = vec![Complex64::new(0.0, 0.0); len];
        gamma_hat[..m].copy_from_slice(c);
        forward.process(&mut gamma_hat);
        let mut gamma_adj_hat = vec![Complex64::new(0.0, 0.0); len];
        for (dst, src) in gamma_adj_hat.iter_mut().zip(c.iter().rev()) {
            *dst = src.conj();
        }
        forward.process(&mut gamma_adj_hat);
        Self { omega: op.omega().to_vec(), gamma_hat, gamma_adj_hat, forward, inverse }
    }

    pub fn block_len(&self) -> usize {
        self.omega.len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let m = self.omega.len();
        assert_eq!(x.len(), 2 * m, "vector length must be 2M");
        let half = (m - 1) / 2;
        let (a1, a2) = x.split_at(m);
        let conv_c_a2 = self.convolve(&self.gamma_hat, a2);
        let conv_d_a1 = self.convolve(&self.gamma_adj_hat, a1);
        let mut y = Vec::with_capacity(2 * m);
        for i in 0..m {
            y.push(self.omega[i] * a1[i] - J * conv_c_a2[i + half]);
        }
        for i in 0..m {
            y.push(-J * conv_d_a1[i + half] - self.omega[i] * a2[i]);
        }
        y
    }

    fn convolve(&self, kernel_hat: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let len = kernel_hat.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[..x.len()].copy_from_slice(x);
        self.forward.process(&mut buf);
        let scale = 1.0 / len as f64;
        for (b, k) in buf.iter_mut().zip(kernel_hat) {
            *b *= k * scale;
        }
        self.inverse.process(&mut buf);
        buf
    }
}
