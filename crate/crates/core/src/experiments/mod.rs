//! Monte-Carlo validation of the analytic eigenvalue covariance.
//!
//! Every sweep point synthesizes the noiseless K-soliton, evaluates the
//! analytic covariance, then draws `trials` noise realizations. Each
//! realization feeds both estimators: Fourier collocation (local refinement
//! of the noiseless FC eigenpairs, with a dense fallback) and the
//! forward-backward Newton search started from the true eigenvalues.
//!
//! Noise for trial `t` of point `p` comes from a ChaCha stream keyed by
//! `(base_seed, p)` with stream number `t`, so results do not depend on
//! thread count or scheduling.

mod output;
pub mod reference;
mod stats;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::{
    assemble_perturbation, extract_discrete_spectrum, match_eigenvalues, pulse_operator, solve_eigenproblem,
    solve_eigenvalues, EigenTracker, FourierEigenpair, StructuredOperator, TrackOutcome, DEFAULT_IM_THRESHOLD,
};
use crate::darboux::synthesize_multisoliton;
use crate::error::{Error, Result};
use crate::newton::{newton_refine, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::perturbation::{analytic_covariance, build_sensitivity, EigCovariance};
use crate::signal::{centered_dft, sigma_sq_for_snr_db, snr, linear_to_db, DiscreteSpectrum, NoiseSpec, SampledPulse, SpectralEntry, TimeGrid};

pub use output::{csv_header, write_csv};

/// Points whose failure rate exceeds this are flagged.
pub const FAILURE_FLAG_RATE: f64 = 0.05;

const TRACK_TOL: f64 = 1e-12;
const TRACK_MAX_ITER: usize = 60;
const FC_BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fc,
    Ns,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fc => "fc",
            Method::Ns => "ns",
        }
    }
}

/// Which eigenvectors feed the sensitivity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticBasis {
    /// Eigenvectors of the noiseless collocation matrix.
    #[default]
    Fc,
    /// DFT of the Darboux Jost solutions.
    Darboux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Phase,
    Snr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    SnrDb(f64),
    SigmaSq(f64),
}

impl NoiseLevel {
    pub fn sigma_sq(self, pulse: &SampledPulse) -> f64 {
        match self {
            NoiseLevel::SnrDb(db) => sigma_sq_for_snr_db(pulse, db),
            NoiseLevel::SigmaSq(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEstimate {
    pub trial: usize,
    pub eigenvalues: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEnsemble {
    pub method: Method,
    pub sigma_sq: f64,
    pub base_seed: u64,
    pub trials: Vec<TrialEstimate>,
    pub failures: Vec<TrialFailure>,
}

impl TrialEnsemble {
    pub fn requested(&self) -> usize {
        self.trials.len() + self.failures.len()
    }

    pub fn failure_rate(&self) -> f64 {
        match self.requested() {
            0 => 0.0,
            n => self.failures.len() as f64 / n as f64,
        }
    }

    /// Per-component deviation columns `(ξ_1..ξ_K, η_1..η_K)`.
    fn deviation_columns(&self, reference: &[Complex64]) -> Result<Vec<Vec<f64>>> {
        let k = reference.len();
        let mut cols = vec![Vec::with_capacity(self.trials.len()); 2 * k];
        for t in &self.trials {
            if t.eigenvalues.len() != k {
                return Err(Error::Dimension { expected: k, actual: t.eigenvalues.len() });
            }
            for (i, (est, r)) in t.eigenvalues.iter().zip(reference).enumerate() {
                let d = est - r;
                cols[i].push(d.re);
                cols[k + i].push(d.im);
            }
        }
        Ok(cols)
    }
}

/// Unbiased sample covariance of `(ξ, η)` about the sample mean.
pub fn empirical_covariance(ensemble: &TrialEnsemble, reference: &[Complex64]) -> Result<EigCovariance> {
    let n = ensemble.trials.len();
    if n < 2 {
        return Err(Error::TooFewTrials(n));
    }
    let cols = ensemble.deviation_columns(reference)?;
    EigCovariance::new(cols.len(), stats::sample_covariance(&cols), ensemble.sigma_sq, n)
}

/// Sample mean of `λ̂_k − λ_k`.
pub fn mean_offset(ensemble: &TrialEnsemble, reference: &[Complex64]) -> Result<Vec<Complex64>> {
    if ensemble.trials.is_empty() {
        return Err(Error::TooFewTrials(0));
    }
    let cols = ensemble.deviation_columns(reference)?;
    let k = reference.len();
    Ok((0..k).map(|i| Complex64::new(stats::mean(&cols[i]), stats::mean(&cols[k + i]))).collect())
}

/// Per-component skewness and excess kurtosis of `(ξ, η)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeMoments {
    pub skewness: Vec<f64>,
    pub excess_kurtosis: Vec<f64>,
}

pub fn shape_moments(ensemble: &TrialEnsemble, reference: &[Complex64]) -> Result<ShapeMoments> {
    let n = ensemble.trials.len();
    if n < 2 {
        return Err(Error::TooFewTrials(n));
    }
    let (skewness, excess_kurtosis) =
        ensemble.deviation_columns(reference)?.iter().map(|c| stats::shape_moments(c)).unzip();
    Ok(ShapeMoments { skewness, excess_kurtosis })
}

/// `‖Ĉ − C‖²_F / ‖C‖²_F`.
pub fn nmse(estimate: &EigCovariance, reference: &EigCovariance) -> Result<f64> {
    if estimate.dim != reference.dim {
        return Err(Error::Shape(format!(
            "covariances are {0}x{0} and {1}x{1}",
            estimate.dim, reference.dim
        )));
    }
    let denom = reference.frobenius_sq();
    if !(denom > 0.0) {
        return Err(Error::ZeroReference);
    }
    let num: f64 = estimate.matrix.iter().zip(&reference.matrix).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(num / denom)
}

/// Seed of the noise stream family of one sweep point.
pub fn point_seed(base_seed: u64, point_index: usize) -> u64 {
    // splitmix64 finalizer over the combined key
    let mut z = base_seed ^ (point_index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noiseless quantities shared by all trials of one point.
pub struct PreparedPoint {
    pub pulse: SampledPulse,
    /// True eigenvalues of the synthesized spectrum.
    pub reference: Vec<Complex64>,
    /// Matched noiseless FC eigenpairs, in reference order.
    pub fc_pairs: Vec<FourierEigenpair>,
    pub analytic_pairs: Vec<FourierEigenpair>,
    trackers: Vec<EigenTracker>,
}

impl PreparedPoint {
    pub fn new(spectrum: &DiscreteSpectrum, grid: &TimeGrid, basis: AnalyticBasis) -> Result<Self> {
        let (pulse, jost) = synthesize_multisoliton(spectrum, grid)?;
        let reference = spectrum.eigenvalues();
        let op = pulse_operator(&pulse)?;
        let fc_pairs = extract_discrete_spectrum(&solve_eigenproblem(&op)?, &reference)?;
        let analytic_pairs = match basis {
            AnalyticBasis::Fc => fc_pairs.clone(),
            AnalyticBasis::Darboux => jost
                .solutions()
                .iter()
                .map(|sol| FourierEigenpair::from_jost(sol, grid))
                .collect::<Result<_>>()?,
        };
        let trackers = fc_pairs.iter().map(|p| EigenTracker::new(&op, p)).collect::<Result<_>>()?;
        Ok(Self { pulse, reference, fc_pairs, analytic_pairs, trackers })
    }

    pub fn fc_eigenvalues(&self) -> Vec<Complex64> {
        self.fc_pairs.iter().map(|p| p.eigenvalue).collect()
    }

    pub fn analytic_covariance(&self, sigma_sq: f64) -> Result<EigCovariance> {
        let d = build_sensitivity(&self.analytic_pairs)?;
        let mut c = analytic_covariance(&d, sigma_sq, self.pulse.len())?;
        c.check_separation(&self.reference);
        Ok(c)
    }

    /// FC estimate for one noise realization.
    pub fn fc_trial(&self, noise: &[Complex64]) -> Result<Vec<Complex64>> {
        self.fc_trials(&[noise.to_vec()]).pop().expect("one result per realization")
    }

    /// FC estimates for a batch of realizations.
    pub fn fc_trials(&self, noises: &[Vec<Complex64>]) -> Vec<Result<Vec<Complex64>>> {
        let ops: Vec<Result<StructuredOperator>> = noises
            .iter()
            .map(|n| {
                let noise_pulse = SampledPulse::new(*self.pulse.grid(), n.clone())?;
                Ok(StructuredOperator::new(&assemble_perturbation(&centered_dft(&noise_pulse)?)?))
            })
            .collect();
        let ready: Vec<usize> = (0..noises.len()).filter(|&i| ops[i].is_ok()).collect();
        let refs: Vec<&StructuredOperator> = ready.iter().map(|&i| ops[i].as_ref().unwrap()).collect();
        let tracked: Vec<Vec<TrackOutcome>> =
            self.trackers.iter().map(|t| t.track_batch(&refs, TRACK_TOL, TRACK_MAX_ITER)).collect();
        let mut out: Vec<Result<Vec<Complex64>>> = ops
            .into_iter()
            .map(|op| op.map(|_| Vec::new()))
            .collect();
        for (slot, &i) in ready.iter().enumerate() {
            let mut values = Vec::with_capacity(self.trackers.len());
            for per_tracker in &tracked {
                match per_tracker[slot] {
                    TrackOutcome::Converged { eigenvalue, .. } => values.push(eigenvalue),
                    TrackOutcome::Lost { .. } => break,
                }
            }
            out[i] = if values.len() < self.trackers.len() {
                self.fc_trial_dense(&noises[i])
            } else if values.iter().any(|l| l.im <= 0.0) {
                Err(Error::MissingEigenvalue(values))
            } else {
                Ok(values)
            };
        }
        out
    }

    fn fc_trial_dense(&self, noise: &[Complex64]) -> Result<Vec<Complex64>> {
        log::debug!("local FC refinement lost track; solving densely");
        let noisy: Vec<Complex64> = self.pulse.samples().iter().zip(noise).map(|(q, n)| q + n).collect();
        let op = pulse_operator(&SampledPulse::new(*self.pulse.grid(), noisy)?)?;
        let values = solve_eigenvalues(&op)?;
        let idx = match_eigenvalues(&values, &self.fc_eigenvalues(), DEFAULT_IM_THRESHOLD)?;
        Ok(idx.into_iter().map(|i| values[i]).collect())
    }

    /// NS estimate for one noise realization, started from the true eigenvalues.
    pub fn ns_trial(&self, noise: &[Complex64]) -> Result<Vec<Complex64>> {
        let noisy: Vec<Complex64> = self.pulse.samples().iter().zip(noise).map(|(q, n)| q + n).collect();
        let pulse = SampledPulse::new(*self.pulse.grid(), noisy)?;
        let mut out = Vec::with_capacity(self.reference.len());
        for &start in &self.reference {
            out.push(newton_refine(&pulse, start, DEFAULT_MAX_ITER, DEFAULT_TOL)?.eigenvalue);
        }
        // each root must be nearer its own starting eigenvalue than any other
        for (i, est) in out.iter().enumerate() {
            let own = (est - self.reference[i]).norm();
            if self.reference.iter().enumerate().any(|(j, r)| j != i && (est - r).norm() < own) {
                return Err(Error::MissingEigenvalue(out));
            }
        }
        Ok(out)
    }

    /// Runs `trials` realizations of `noise` through `method`.
    pub fn run_trials(&self, method: Method, noise: &NoiseSpec, trials: usize) -> TrialEnsemble {
        let len = self.pulse.len();
        let indices: Vec<usize> = (0..trials).collect();
        // batch composition depends only on trial indices, keeping results
        // independent of the thread count
        let results: Vec<(usize, Result<Vec<Complex64>>)> = indices
            .par_chunks(FC_BATCH)
            .flat_map_iter(|chunk| {
                let noises: Vec<Vec<Complex64>> = chunk.iter().map(|&t| noise.realization(len, t as u64)).collect();
                let estimates = match method {
                    Method::Fc => self.fc_trials(&noises),
                    Method::Ns => noises.iter().map(|n| self.ns_trial(n)).collect(),
                };
                chunk.iter().copied().zip(estimates).collect::<Vec<_>>()
            })
            .collect();
        let mut ensemble = TrialEnsemble {
            method,
            sigma_sq: noise.sigma_sq,
            base_seed: noise.seed,
            trials: Vec::new(),
            failures: Vec::new(),
        };
        for (trial, r) in results {
            match r {
                Ok(eigenvalues) => ensemble.trials.push(TrialEstimate { trial, eigenvalues }),
                Err(e) => ensemble.failures.push(TrialFailure { trial, reason: e.to_string() }),
            }
        }
        ensemble
    }
}

/// Inputs of a phase or SNR sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: TimeGrid,
    /// Spectrum at zero phase.
    pub spectrum: Vec<SpectralEntry>,
    /// Entry whose amplitude is rotated by `e^{j2πφ}`.
    pub phase_entry: usize,
    pub axis: SweepAxis,
    /// Phases in turns for a phase sweep, SNRs in dB for an SNR sweep.
    pub values: Vec<f64>,
    /// Noise of a phase sweep.
    pub noise: NoiseLevel,
    /// Phases (turns) averaged over at each SNR.
    pub phases: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub analytic_basis: AnalyticBasis,
    /// Worker threads; `None` uses all cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl SweepConfig {
    /// The two-soliton phase sweep at `trials` trials per point.
    pub fn reference_phase_sweep(trials: usize, base_seed: u64) -> Self {
        Self {
            grid: reference::grid(),
            spectrum: reference::two_soliton(0.0).entries().to_vec(),
            phase_entry: 1,
            axis: SweepAxis::Phase,
            values: reference::uniform_phases(reference::PHASE_POINTS),
            noise: NoiseLevel::SigmaSq(reference::SIGMA_SQ),
            phases: vec![0.0],
            trials,
            base_seed,
            methods: vec![Method::Fc, Method::Ns],
            analytic_basis: AnalyticBasis::Fc,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = TimeGrid::new(self.grid.t_min(), self.grid.t_max(), self.grid.len())?;
        if !g.is_odd() {
            return Err(Error::EvenSampleCount(g.len()));
        }
        DiscreteSpectrum::new(self.spectrum.clone())?;
        if self.phase_entry >= self.spectrum.len() {
            return Err(Error::IndexOutOfRange { index: self.phase_entry, len: self.spectrum.len() });
        }
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if self.values.iter().chain(&self.phases).any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if self.axis == SweepAxis::Snr && self.phases.is_empty() {
            return Err(Error::Config("an SNR sweep needs at least one phase".into()));
        }
        if let NoiseLevel::SigmaSq(s) = self.noise {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Config(format!("noise variance must be >= 0, got {s}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be positive".into()));
        }
        Ok(())
    }

    pub fn spectrum_at(&self, phase_turns: f64) -> Result<DiscreteSpectrum> {
        let mut entries = self.spectrum.clone();
        let rot = Complex64::from_polar(1.0, std::f64::consts::TAU * phase_turns);
        entries[self.phase_entry].amplitude *= rot;
        DiscreteSpectrum::new(entries)
    }
}

/// One estimator at one `(axis value, phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub successes: usize,
    pub failures: usize,
    pub flagged: bool,
    pub empirical: Option<EigCovariance>,
    pub nmse: Option<f64>,
    pub mean_offset: Option<Vec<Complex64>>,
    pub moments: Option<ShapeMoments>,
    /// First few failure messages.
    pub failure_samples: Vec<TrialFailure>,
    pub error: Option<String>,
}

impl MethodOutcome {
    fn from_ensemble(ensemble: &TrialEnsemble, reference: &[Complex64], analytic: Option<&EigCovariance>) -> Self {
        let empirical = empirical_covariance(ensemble, reference);
        let error = empirical.as_ref().err().map(|e| e.to_string());
        let empirical = empirical.ok();
        let nmse = match (&empirical, analytic) {
            (Some(e), Some(a)) => nmse(e, a).ok(),
            _ => None,
        };
        Self {
            method: ensemble.method,
            successes: ensemble.trials.len(),
            failures: ensemble.failures.len(),
            flagged: ensemble.failure_rate() > FAILURE_FLAG_RATE,
            empirical,
            nmse,
            mean_offset: mean_offset(ensemble, reference).ok(),
            moments: shape_moments(ensemble, reference).ok(),
            failure_samples: ensemble.failures.iter().take(5).cloned().collect(),
            error,
        }
    }
}

/// All results at one phase of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOutcome {
    pub phase_turns: f64,
    pub point_index: usize,
    pub seed: u64,
    pub sigma_sq: f64,
    pub snr_db: Option<f64>,
    pub reference: Vec<Complex64>,
    pub fc_noiseless: Vec<Complex64>,
    pub analytic: Option<EigCovariance>,
    pub methods: Vec<MethodOutcome>,
    pub error: Option<String>,
}

impl PhaseOutcome {
    pub fn method(&self, method: Method) -> Option<&MethodOutcome> {
        self.methods.iter().find(|m| m.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub phases: Vec<PhaseOutcome>,
    /// NMSE averaged over phases.
    pub nmse_fc: Option<f64>,
    pub nmse_ns: Option<f64>,
    pub failures_fc: usize,
    pub failures_ns: usize,
    pub flagged: bool,
}

impl SweepPoint {
    fn from_phases(axis_value: f64, phases: Vec<PhaseOutcome>) -> Self {
        let avg = |m: Method| {
            let v: Vec<f64> = phases.iter().filter_map(|p| p.method(m).and_then(|o| o.nmse)).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let failures = |m: Method| phases.iter().filter_map(|p| p.method(m)).map(|o| o.failures).sum();
        let flagged = phases.iter().any(|p| p.error.is_some() || p.methods.iter().any(|m| m.flagged));
        Self {
            axis_value,
            nmse_fc: avg(Method::Fc),
            nmse_ns: avg(Method::Ns),
            failures_fc: failures(Method::Fc),
            failures_ns: failures(Method::Ns),
            flagged,
            phases,
        }
    }

    /// Phase average of the analytic covariance, if every phase has one.
    pub fn mean_analytic(&self) -> Option<Vec<f64>> {
        mean_matrix(self.phases.iter().map(|p| p.analytic.as_ref()))
    }

    pub fn mean_empirical(&self, method: Method) -> Option<Vec<f64>> {
        mean_matrix(self.phases.iter().map(|p| p.method(method).and_then(|o| o.empirical.as_ref())))
    }
}

fn mean_matrix<'a>(items: impl Iterator<Item = Option<&'a EigCovariance>>) -> Option<Vec<f64>> {
    let items: Option<Vec<&EigCovariance>> = items.collect();
    let items = items?;
    let first = items.first()?;
    let mut acc = vec![0.0; first.matrix.len()];
    for c in &items {
        if c.matrix.len() != acc.len() {
            return None;
        }
        for (a, v) in acc.iter_mut().zip(&c.matrix) {
            *a += v;
        }
    }
    let n = items.len() as f64;
    Some(acc.into_iter().map(|a| a / n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub eigenvalue_count: usize,
    pub points: Vec<SweepPoint>,
}

/// Runs one `(phase, noise)` point.
pub fn run_point(config: &SweepConfig, phase_turns: f64, noise: NoiseLevel, point_index: usize) -> PhaseOutcome {
    let seed = point_seed(config.base_seed, point_index);
    let mut outcome = PhaseOutcome {
        phase_turns,
        point_index,
        seed,
        sigma_sq: f64::NAN,
        snr_db: None,
        reference: Vec::new(),
        fc_noiseless: Vec::new(),
        analytic: None,
        methods: Vec::new(),
        error: None,
    };
    let prepared = config
        .spectrum_at(phase_turns)
        .and_then(|s| PreparedPoint::new(&s, &config.grid, config.analytic_basis));
    let prepared = match prepared {
        Ok(p) => p,
        Err(e) => {
            log::warn!("point {point_index} (phase {phase_turns}): {e}");
            outcome.error = Some(e.to_string());
            return outcome;
        }
    };
    let sigma_sq = noise.sigma_sq(&prepared.pulse);
    outcome.sigma_sq = sigma_sq;
    outcome.snr_db = snr(&prepared.pulse, sigma_sq).ok().map(linear_to_db);
    outcome.reference = prepared.reference.clone();
    outcome.fc_noiseless = prepared.fc_eigenvalues();
    match prepared.analytic_covariance(sigma_sq) {
        Ok(c) => outcome.analytic = Some(c),
        Err(e) => outcome.error = Some(e.to_string()),
    }
    let spec = match NoiseSpec::new(sigma_sq, seed) {
        Ok(s) => s,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return outcome;
        }
    };
    for &method in &config.methods {
        let ensemble = prepared.run_trials(method, &spec, config.trials);
        let m = MethodOutcome::from_ensemble(&ensemble, &prepared.reference, outcome.analytic.as_ref());
        if m.flagged {
            log::warn!(
                "point {point_index}: {} failed {} of {} trials",
                method.name(),
                m.failures,
                config.trials
            );
        }
        outcome.methods.push(m);
    }
    outcome
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn log_point(axis: &str, p: &SweepPoint) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    log::info!(
        "{axis} {:.4}: nmse fc {} ns {} failures fc {} ns {}{}",
        p.axis_value,
        fmt(p.nmse_fc),
        fmt(p.nmse_ns),
        p.failures_fc,
        p.failures_ns,
        if p.flagged { " [flagged]" } else { "" }
    );
}

/// Sweeps the phase of one amplitude at fixed noise.
pub fn run_phase_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    with_threads(config.threads, || {
        let points = config
            .values
            .iter()
            .enumerate()
            .map(|(i, &phase)| {
                let p = SweepPoint::from_phases(phase, vec![run_point(config, phase, config.noise, i)]);
                log_point("phase", &p);
                p
            })
            .collect();
        SweepResult { axis: SweepAxis::Phase, eigenvalue_count: config.spectrum.len(), points }
    })
}

/// Sweeps SNR, averaging each point over `config.phases`.
pub fn run_snr_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let per_point = config.phases.len();
    with_threads(config.threads, || {
        let points = config
            .values
            .iter()
            .enumerate()
            .map(|(i, &db)| {
                let phases = config
                    .phases
                    .iter()
                    .enumerate()
                    .map(|(j, &phase)| run_point(config, phase, NoiseLevel::SnrDb(db), i * per_point + j))
                    .collect();
                let p = SweepPoint::from_phases(db, phases);
                log_point("snr", &p);
                p
            })
            .collect();
        SweepResult { axis: SweepAxis::Snr, eigenvalue_count: config.spectrum.len(), points }
    })
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    match config.axis {
        SweepAxis::Phase => run_phase_sweep(config),
        SweepAxis::Snr => run_snr_sweep(config),
    }
}
