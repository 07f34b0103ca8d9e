use super::*;
use crate::collocation::{
    assemble_operator, assemble_perturbation, extract_discrete_spectrum, match_eigenvalues,
    pulse_operator, solve_eigenproblem, solve_eigenvalues, DEFAULT_IM_THRESHOLD,
};
use crate::darboux::synthesize_multisoliton;
use crate::experiments::reference;
use crate::signal::{centered_dft, NoiseSpec, SampledPulse, TimeGrid};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Fixture {
    op: CollocationOperator,
    pairs: Vec<FourierEigenpair>,
}

fn fixture(phase: f64) -> Fixture {
    let (pulse, _) = synthesize_multisoliton(&reference::two_soliton(phase), &reference::grid_with(257)).unwrap();
    let op = pulse_operator(&pulse).unwrap();
    let pairs = extract_discrete_spectrum(&solve_eigenproblem(&op).unwrap(), &reference::eigenvalues()).unwrap();
    Fixture { op, pairs }
}

fn noise_coeffs(m: usize, period: f64, sigma_sq: f64, seed: u64, trial: u64) -> FourierCoefficients {
    let spec = NoiseSpec::new(sigma_sq, seed).unwrap();
    let grid = TimeGrid::new(-1.0, 1.0, m).unwrap();
    let noise = SampledPulse::new(grid, spec.realization(m, trial)).unwrap();
    let c = centered_dft(&noise).unwrap();
    FourierCoefficients::new(c.as_slice().to_vec(), period).unwrap()
}

fn scaled(c: &FourierCoefficients, eps: f64) -> FourierCoefficients {
    FourierCoefficients::new(c.as_slice().iter().map(|v| v * eps).collect(), c.period()).unwrap()
}

/// Direct double loop over the defining sum.
fn brute_autocorrelation(a: &[Complex64], g: Complex64) -> Vec<Complex64> {
    let m = a.len() as isize;
    let half = (m - 1) / 2;
    let at = |i: isize| if i.abs() <= half { a[(i + half) as usize] } else { c(0.0, 0.0) };
    (-half..=half)
        .map(|n| (-half..=half).map(|p| at(p) * at(n - p)).sum::<Complex64>() / g)
        .collect()
}

#[test]
fn autocorrelation_of_impulse() {
    let mut a = vec![c(0.0, 0.0); 7];
    a[3] = c(1.0, 0.0);
    let r = jost_autocorrelation(&a, c(1.0, 0.0)).unwrap();
    for (i, v) in r.iter().enumerate() {
        let expected = if i == 3 { 1.0 } else { 0.0 };
        assert!((v - expected).norm() < 1e-15);
    }
}

#[test]
fn autocorrelation_of_two_taps() {
    // a[0] = a[1] = 1 → r[0] = 1, r[1] = 2, r[2] = 1
    let mut a = vec![c(0.0, 0.0); 7];
    a[3] = c(1.0, 0.0);
    a[4] = c(1.0, 0.0);
    let r = jost_autocorrelation(&a, c(1.0, 0.0)).unwrap();
    let expected = [0.0, 0.0, 0.0, 1.0, 2.0, 1.0, 0.0];
    for (v, e) in r.iter().zip(expected) {
        assert!((v - e).norm() < 1e-14);
    }
}

#[test]
fn autocorrelation_matches_brute_force() {
    let fx = fixture(0.3);
    for pair in &fx.pairs {
        let g = normalization(pair);
        for half in [pair.first_half(), pair.second_half()] {
            let fast = jost_autocorrelation(half, g).unwrap();
            let slow = brute_autocorrelation(half, g);
            let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() <= 1e-13 * scale.max(1.0));
            }
        }
    }
}

#[test]
fn zero_normalization_is_rejected() {
    assert!(matches!(
        jost_autocorrelation(&[c(1.0, 0.0); 3], c(0.0, 0.0)),
        Err(Error::DegenerateNormalization)
    ));
    let zero = FourierEigenpair::unnormalized(c(0.0, 0.5), vec![c(0.0, 0.0); 6]);
    assert!(matches!(build_sensitivity(&[zero]), Err(Error::DegenerateNormalization)));
}

#[test]
fn shift_denominator_equals_g() {
    let fx = fixture(0.7);
    for pair in &fx.pairs {
        let b = pair.left_vector();
        let den: Complex64 = b.iter().zip(pair.vector()).map(|(x, y)| x * y).sum();
        let g = normalization(pair);
        assert!((den - g).norm() <= 1e-12 * g.norm());
    }
}

#[test]
fn zero_noise_gives_zero_shift() {
    let fx = fixture(0.0);
    let zero = assemble_perturbation(&FourierCoefficients::zeros(257, fx.op.period()).unwrap()).unwrap();
    for pair in &fx.pairs {
        assert_eq!(first_order_shift(pair, &zero).unwrap(), c(0.0, 0.0));
    }
}

#[test]
fn shift_is_invariant_to_eigenvector_scaling() {
    let fx = fixture(0.1);
    let noise = assemble_perturbation(&noise_coeffs(257, fx.op.period(), 0.01, 4, 0)).unwrap();
    for pair in &fx.pairs {
        let base = first_order_shift(pair, &noise).unwrap();
        for alpha in [c(3.0, -2.0), c(1e-3, 0.0), c(0.0, 17.0)] {
            let other = first_order_shift(&pair.scaled(alpha), &noise).unwrap();
            assert!((other - base).norm() <= 1e-12 * base.norm());
        }
    }
}

#[test]
fn sensitivity_rows_reproduce_the_shift_formula() {
    for phase in [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875] {
        let fx = fixture(phase);
        let d = build_sensitivity(&fx.pairs).unwrap();
        assert_eq!((d.rows(), d.cols()), (4, 514));
        for trial in 0..100 {
            let noise = noise_coeffs(257, fx.op.period(), 0.014362, 21, trial);
            let noise_op = assemble_perturbation(&noise).unwrap();
            let via_d = d.shifts(&noise).unwrap();
            for (k, pair) in fx.pairs.iter().enumerate() {
                let direct = first_order_shift(pair, &noise_op).unwrap();
                let dev = (via_d[k] - direct).norm() / direct.norm();
                assert!(dev <= 1e-12, "phase {phase} trial {trial} k {k}: {dev:e}");
            }
        }
    }
}

#[test]
fn real_time_domain_noise_is_consistent() {
    let (pulse, jost) =
        synthesize_multisoliton(&crate::signal::DiscreteSpectrum::new(vec![crate::signal::SpectralEntry::new(c(0.0, 0.5), c(0.0, 1.0))]).unwrap(), &TimeGrid::new(-15.0, 15.0, 201).unwrap())
            .unwrap();
    let op = pulse_operator(&pulse).unwrap();
    let pair = FourierEigenpair::from_jost(&jost.solutions()[0], pulse.grid()).unwrap();
    let d = build_sensitivity(std::slice::from_ref(&pair)).unwrap();
    assert_eq!((d.rows(), d.cols()), (2, 402));
    assert!(d.as_slice().iter().all(|v| v.is_finite()));
    // real samples → c̃_{-n} = conj(c̃_n)
    let spec = NoiseSpec::new(0.02, 8).unwrap();
    let real: Vec<Complex64> = spec.realization(201, 0).iter().map(|v| c(v.re, 0.0)).collect();
    let coeffs = centered_dft(&SampledPulse::new(*pulse.grid(), real).unwrap()).unwrap();
    for n in 0..=100 {
        assert!((coeffs.get(-n) - coeffs.get(n).conj()).norm() < 1e-15);
    }
    let direct = first_order_shift(&pair, &assemble_perturbation(&coeffs).unwrap()).unwrap();
    let via_d = d.shifts(&coeffs).unwrap()[0];
    assert!((direct - via_d).norm() <= 1e-12 * direct.norm());
    assert_eq!(op.dim(), 402);
}

#[test]
fn first_order_shift_predicts_small_perturbations() {
    let fx = fixture(0.0);
    let base = centered_dft(
        &synthesize_multisoliton(&reference::two_soliton(0.0), &reference::grid_with(257)).unwrap().0,
    )
    .unwrap();
    let noise = noise_coeffs(257, fx.op.period(), reference::SIGMA_SQ, 5, 0);
    let mut residuals = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let small = scaled(&noise, eps);
        let sum: Vec<Complex64> =
            base.as_slice().iter().zip(small.as_slice()).map(|(a, b)| a + b).collect();
        let perturbed = assemble_operator(&FourierCoefficients::new(sum, base.period()).unwrap()).unwrap();
        let values = solve_eigenvalues(&perturbed).unwrap();
        let idx = match_eigenvalues(&values, &reference::eigenvalues(), DEFAULT_IM_THRESHOLD).unwrap();
        let noise_op = assemble_perturbation(&small).unwrap();
        let mut worst: f64 = 0.0;
        for (pair, &i) in fx.pairs.iter().zip(&idx) {
            let shift = first_order_shift(pair, &noise_op).unwrap();
            let r = (values[i] - pair.eigenvalue - shift).norm();
            if eps == 1e-4 {
                assert!(r / shift.norm() <= 1e-2, "relative residual {}", r / shift.norm());
            }
            worst = worst.max(r);
        }
        residuals.push(worst);
    }
    // second-order remainder: two decades of ε → four decades of residual
    let slope = (residuals[0] / residuals[2]).log10() / 2.0;
    assert!((slope - 2.0).abs() < 0.2, "slope {slope}, residuals {residuals:?}");
}

#[test]
fn covariance_properties() {
    let fx = fixture(0.0);
    let d = build_sensitivity(&fx.pairs).unwrap();
    let zero = analytic_covariance(&d, 0.0, 257).unwrap();
    assert!(zero.matrix.iter().all(|&v| v == 0.0));

    let one = analytic_covariance(&d, 0.01, 257).unwrap();
    let two = analytic_covariance(&d, 0.02, 257).unwrap();
    for (a, b) in one.matrix.iter().zip(&two.matrix) {
        assert_eq!(2.0 * a, *b);
    }
    for i in 0..4 {
        for j in 0..4 {
            assert!((one.get(i, j) - one.get(j, i)).abs() <= 1e-14);
        }
    }
    let mat = faer::Mat::from_fn(4, 4, |i, j| one.get(i, j));
    let min_eig = mat
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .unwrap()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    assert!(min_eig >= -1e-12 * one.trace());
    assert!(matches!(analytic_covariance(&d, 0.01, 129), Err(Error::Shape(_))));
}

#[test]
fn imaginary_parts_are_noisier() {
    for phase in [0.0, 0.25, 0.5] {
        let fx = fixture(phase);
        let cov = analytic_covariance(&build_sensitivity(&fx.pairs).unwrap(), reference::SIGMA_SQ, 257).unwrap();
        for k in 0..2 {
            let (re, im) = cov.variances(k);
            assert!(im > re, "phase {phase}, k {k}: Var(eta) {im} <= Var(xi) {re}");
        }
    }
}

#[test]
fn covariance_ignores_eigenvector_scaling() {
    let fx = fixture(0.4);
    let base = analytic_covariance(&build_sensitivity(&fx.pairs).unwrap(), 0.02, 257).unwrap();
    let rescaled: Vec<FourierEigenpair> = fx
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| p.scaled(Complex64::from_polar(0.1 + 5.0 * i as f64, 1.0 + i as f64)))
        .collect();
    let other = analytic_covariance(&build_sensitivity(&rescaled).unwrap(), 0.02, 257).unwrap();
    let scale = base.frobenius_sq().sqrt();
    for (a, b) in base.matrix.iter().zip(&other.matrix) {
        assert!((a - b).abs() <= 1e-12 * scale);
    }
}

#[test]
fn near_degenerate_eigenvalues_are_flagged() {
    let mut cov = EigCovariance::new(4, vec![1e-2, 0.0, 0.0, 0.0, 0.0, 1e-2, 0.0, 0.0, 0.0, 0.0, 1e-2, 0.0, 0.0, 0.0, 0.0, 1e-2], 1.0, 5).unwrap();
    cov.check_separation(&[c(0.0, 0.3), c(0.0, 0.6)]);
    assert_eq!(cov.warnings.len(), 1);
    let mut quiet = EigCovariance::new(4, vec![1e-6, 0.0, 0.0, 0.0, 0.0, 1e-6, 0.0, 0.0, 0.0, 0.0, 1e-6, 0.0, 0.0, 0.0, 0.0, 1e-6], 1.0, 5).unwrap();
    quiet.check_separation(&[c(0.0, 0.3), c(0.0, 0.6)]);
    assert!(quiet.warnings.is_empty());
}
