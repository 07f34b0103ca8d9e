use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling grid with both window endpoints included.
///
/// `Ts = (t_max - t_min) / (M - 1)` and the collocation period is `L = M Ts`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    len: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, len: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_min >= t_max {
            return Err(Error::Validation(format!(
                "time window must satisfy t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if len < 3 {
            return Err(Error::Validation(format!("need at least 3 samples, got {len}")));
        }
        Ok(Self { t_min, t_max, len })
    }

    /// Builds a grid with an odd sample count. An even request is extended by
    /// one sample at `t_max + Ts`; the returned flag reports the extension.
    pub fn odd(t_min: f64, t_max: f64, len: usize) -> Result<(Self, bool)> {
        let grid = Self::new(t_min, t_max, len)?;
        if grid.is_odd() {
            return Ok((grid, false));
        }
        let ts = grid.sample_period();
        let extended = Self::new(t_min, t_max + ts, len + 1)?;
        log::info!(
            "even sample count {len} extended to {} (new t_max = {})",
            len + 1,
            extended.t_max
        );
        Ok((extended, true))
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_odd(&self) -> bool {
        self.len % 2 == 1
    }

    /// N in `M = 2N + 1`.
    pub fn half_len(&self) -> usize {
        (self.len - 1) / 2
    }

    pub fn sample_period(&self) -> f64 {
        (self.t_max - self.t_min) / (self.len - 1) as f64
    }

    /// Periodic-extension length `L = M Ts`.
    pub fn period(&self) -> f64 {
        self.len as f64 * self.sample_period()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.t_min + self.t_max)
    }

    /// Time of the `i`-th stored sample (`i = 0..M`).
    pub fn time(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.sample_period()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.time(i)).collect()
    }

    /// Halves the sample period on the same window.
    pub fn refined(&self) -> Self {
        Self { len: 2 * self.len - 1, ..*self }
    }
}

/// Complex samples `q_m` on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulse {
    grid: TimeGrid,
    samples: Vec<Complex64>,
}

impl SampledPulse {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension { expected: grid.len(), actual: samples.len() });
        }
        if let Some(i) = samples.iter().position(|q| !(q.re.is_finite() && q.im.is_finite())) {
            return Err(Error::Validation(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f(t)` on the grid.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.times().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Trapezoidal estimate of `∫|q|² dt`.
    pub fn energy(&self) -> f64 {
        let ts = self.grid.sample_period();
        let n = self.samples.len();
        let inner: f64 = self.samples.iter().map(|q| q.norm_sqr()).sum();
        ts * (inner - 0.5 * (self.samples[0].norm_sqr() + self.samples[n - 1].norm_sqr()))
    }

    /// Mean power per sample, `Σ|q_m|² / M`.
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|q| q.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Largest magnitude at either window edge.
    pub fn boundary_magnitude(&self) -> f64 {
        self.samples[0].norm().max(self.samples[self.samples.len() - 1].norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().map(|q| q * factor).collect() }
    }
}
