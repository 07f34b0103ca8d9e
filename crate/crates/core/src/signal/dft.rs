use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{SampledPulse, TimeGrid};
use crate::error::{Error, Result};

/// Fourier-series coefficients `c_n`, `n = -N..=N`, stored in ascending `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    pub(crate) coeffs: Vec<Complex64>,
    pub(crate) period: f64,
}

impl FourierCoefficients {
    pub fn new(coeffs: Vec<Complex64>, period: f64) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::EvenSampleCount(coeffs.len()));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Validation(format!("period must be positive, got {period}")));
        }
        Ok(Self { coeffs, period })
    }

    pub fn zeros(len: usize, period: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], period)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn half_len(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `c_n` for `|n| <= N`, zero outside.
    pub fn get(&self, n: isize) -> Complex64 {
        let half = self.half_len() as isize;
        if n.abs() > half {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + half) as usize]
        }
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `c_n = (1/M) Σ_m q_m e^{-j n 2π m / M}` with both indices centered on zero.
pub fn centered_dft(pulse: &SampledPulse) -> Result<FourierCoefficients> {
    let grid = pulse.grid();
    let m = grid.len();
    if m % 2 == 0 {
        return Err(Error::EvenSampleCount(m));
    }
    let half = grid.half_len();
    let mut buf = pulse.samples().to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let coeffs = (0..m)
        .map(|idx| {
            let n = idx as isize - half as isize;
            let bin = n.rem_euclid(m as isize) as usize;
            let phase = TAU * (n as f64) * (half as f64) / m as f64;
            buf[bin] * Complex64::from_polar(scale, phase)
        })
        .collect();
    FourierCoefficients::new(coeffs, grid.period())
}

/// Synthesis `q_m = Σ_n c_n e^{j n 2π m / M}`; inverse of [`centered_dft`].
pub fn centered_idft(coeffs: &FourierCoefficients, grid: &TimeGrid) -> Result<SampledPulse> {
    let m = grid.len();
    if coeffs.len() != m {
        return Err(Error::Dimension { expected: m, actual: coeffs.len() });
    }
    let half = coeffs.half_len();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (idx, c) in coeffs.as_slice().iter().enumerate() {
        let n = idx as isize - half as isize;
        let bin = n.rem_euclid(m as isize) as usize;
        let phase = -TAU * (n as f64) * (half as f64) / m as f64;
        buf[bin] = c * Complex64::from_polar(1.0, phase);
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    SampledPulse::new(*grid, buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(m: usize) -> TimeGrid {
        TimeGrid::new(-1.0, 1.0, m).unwrap()
    }

    fn tone(m: usize, k: f64) -> SampledPulse {
        let half = (m / 2) as f64;
        let samples = (0..m)
            .map(|i| Complex64::from_polar(1.0, TAU * k * (i as f64 - half) / m as f64))
            .collect();
        SampledPulse::new(grid(m), samples).unwrap()
    }

    /// Direct O(M²) evaluation of the defining sum.
    fn naive_dft(q: &[Complex64]) -> Vec<Complex64> {
        let m = q.len();
        let half = (m / 2) as isize;
        (-half..=half)
            .map(|n| {
                q.iter()
                    .enumerate()
                    .map(|(i, qm)| {
                        let mm = i as isize - half;
                        qm * Complex64::from_polar(1.0, -TAU * (n * mm) as f64 / m as f64)
                    })
                    .sum::<Complex64>()
                    / m as f64
            })
            .collect()
    }

    #[test]
    fn constant_signal_has_only_dc() {
        let p = SampledPulse::new(grid(5), vec![Complex64::new(1.0, 0.0); 5]).unwrap();
        let c = centered_dft(&p).unwrap();
        for n in -2..=2 {
            let expected = if n == 0 { 1.0 } else { 0.0 };
            assert!((c.get(n) - expected).norm() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn single_tone_lands_in_bin_one() {
        let c = centered_dft(&tone(5, 1.0)).unwrap();
        for n in -2..=2 {
            let expected = if n == 1 { 1.0 } else { 0.0 };
            assert!((c.get(n) - expected).norm() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn idft_of_impulses() {
        let g = grid(5);
        let mut dc = vec![Complex64::new(0.0, 0.0); 5];
        dc[2] = Complex64::new(1.0, 0.0);
        let p = centered_idft(&FourierCoefficients::new(dc, 5.0).unwrap(), &g).unwrap();
        assert!(p.samples().iter().all(|q| (q - 1.0).norm() < 1e-15));

        let mut one = vec![Complex64::new(0.0, 0.0); 5];
        one[3] = Complex64::new(1.0, 0.0);
        let p = centered_idft(&FourierCoefficients::new(one, 5.0).unwrap(), &g).unwrap();
        for (a, b) in p.samples().iter().zip(tone(5, 1.0).samples()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn fft_path_matches_defining_sum() {
        let q: Vec<Complex64> =
            (0..33).map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
        let c = centered_dft(&SampledPulse::new(grid(33), q.clone()).unwrap()).unwrap();
        for (a, b) in c.as_slice().iter().zip(naive_dft(&q)) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn even_length_is_rejected() {
        let p = SampledPulse::zeros(grid(4));
        assert!(matches!(centered_dft(&p), Err(Error::EvenSampleCount(4))));
        let c = FourierCoefficients::zeros(5, 1.0).unwrap();
        assert!(matches!(centered_idft(&c, &grid(7)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn period_follows_grid() {
        let g = TimeGrid::new(-12.4842, 12.4842, 257).unwrap();
        let c = centered_dft(&SampledPulse::zeros(g)).unwrap();
        assert!((c.period() - 257.0 * 2.0 * 12.4842 / 256.0).abs() < 1e-12);
    }

    fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), len)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn parseval_holds(q in complex_vec(257)) {
            let p = SampledPulse::new(grid(257), q).unwrap();
            let c = centered_dft(&p).unwrap();
            let time: f64 = p.samples().iter().map(|x| x.norm_sqr()).sum();
            let freq = 257.0 * c.energy();
            prop_assert!((time - freq).abs() <= 1e-12 * time);
        }

        #[test]
        fn round_trip(q in complex_vec(65)) {
            let p = SampledPulse::new(grid(65), q).unwrap();
            let back = centered_idft(&centered_dft(&p).unwrap(), p.grid()).unwrap();
            let scale = p.max_abs();
            for (a, b) in p.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).norm() <= 1e-12 * scale);
            }
        }
    }
}
