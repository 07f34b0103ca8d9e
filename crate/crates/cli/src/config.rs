//! TOML experiment configuration.
//!
//! The file is parsed into a raw form that remembers source spans, checked,
//! and resolved into [`ExperimentConfig`], which is what every output embeds.
//! Serializing a resolved config and parsing it again gives the same config.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use nfteig::experiments::{reference, AnalyticBasis, Method, NoiseLevel, SweepAxis, SweepConfig};
use nfteig::signal::{DiscreteSpectrum, SpectralEntry, TimeGrid};
use nfteig::Complex64;
use serde::{Deserialize, Serialize};
use toml::Spanned;

pub const DEFAULT_TRIALS: usize = 2048;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

/// One eigenvalue `re + j·im` with amplitude `q_mag·e^{j2π·q_phase}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub re: f64,
    pub im: f64,
    pub q_mag: f64,
    /// Turns.
    #[serde(default)]
    pub q_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    /// Phases in turns, or SNRs in dB.
    #[serde(default)]
    pub values: Vec<f64>,
    /// Phases (turns) averaged at each SNR.
    #[serde(default)]
    pub phases: Vec<f64>,
    /// Entry whose amplitude phase is swept; defaults to the last one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_entry: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("."), stem: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    base_seed: Option<u64>,
    trials: Option<usize>,
    methods: Option<Spanned<Vec<Method>>>,
    analytic_basis: Option<AnalyticBasis>,
    threads: Option<Spanned<usize>>,
    grid: Option<Spanned<GridConfig>>,
    spectrum: Option<Spanned<Vec<Spanned<EntryConfig>>>>,
    noise: Option<Spanned<NoiseConfig>>,
    sweep: Option<Spanned<SweepSection>>,
    output: Option<OutputConfig>,
}

/// Fully resolved configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub base_seed: u64,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub analytic_basis: AnalyticBasis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    pub spectrum: Vec<EntryConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub output: OutputConfig,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }

    fn at(src: &str, span: Range<usize>, message: impl Into<String>) -> Self {
        let line = src[..span.start.min(src.len())].matches('\n').count() + 1;
        Self { line: Some(line), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn parse(src: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| {
            let mut err = ConfigError::new(e.message().to_string());
            if let Some(span) = e.span() {
                err = ConfigError::at(src, span, e.message().to_string());
            }
            err
        })?;

        let methods = match raw.methods {
            Some(m) => {
                let span = m.span();
                let mut list = m.into_inner();
                if list.is_empty() {
                    return Err(ConfigError::at(src, span, "methods must name at least one of fc, ns"));
                }
                let mut seen = Vec::new();
                list.retain(|m| {
                    let fresh = !seen.contains(m);
                    seen.push(*m);
                    fresh
                });
                list
            }
            None => vec![Method::Fc, Method::Ns],
        };

        let threads = match overrides.threads.or(raw.threads.as_ref().map(|t| *t.get_ref())) {
            Some(0) => {
                return Err(match &raw.threads {
                    Some(t) if overrides.threads.is_none() => ConfigError::at(src, t.span(), "threads must be positive"),
                    _ => ConfigError::new("--threads must be positive"),
                })
            }
            t => t,
        };

        let grid = match raw.grid {
            Some(g) => {
                let span = g.span();
                let g = g.into_inner();
                TimeGrid::new(g.t_min, g.t_max, g.samples).map_err(|e| ConfigError::at(src, span, format!("grid: {e}")))?;
                Some(g)
            }
            None => None,
        };

        let mut spectrum = Vec::new();
        if let Some(list) = raw.spectrum {
            if list.get_ref().is_empty() {
                return Err(ConfigError::at(src, list.span(), "spectrum must contain at least one entry"));
            }
            let mut checked: Vec<SpectralEntry> = Vec::new();
            for item in list.into_inner() {
                let span = item.span();
                let e = item.into_inner();
                let finite = [e.re, e.im, e.q_mag, e.q_phase].iter().all(|v| v.is_finite());
                if !finite {
                    return Err(ConfigError::at(src, span, "spectrum entry has a non-finite value"));
                }
                if e.im <= 0.0 {
                    return Err(ConfigError::at(src, span, format!("eigenvalue {}{:+}j is not in the upper half plane", e.re, e.im)));
                }
                if e.q_mag <= 0.0 {
                    return Err(ConfigError::at(src, span, format!("amplitude magnitude must be positive, got {}", e.q_mag)));
                }
                checked.push(e.entry());
                DiscreteSpectrum::new(checked.clone()).map_err(|err| ConfigError::at(src, span.clone(), err.to_string()))?;
                spectrum.push(e);
            }
        }

        let noise = match raw.noise {
            Some(n) => {
                let span = n.span();
                let n = n.into_inner();
                match (n.snr_db, n.sigma_sq) {
                    (Some(_), Some(_)) | (None, None) => {
                        return Err(ConfigError::at(src, span, "noise needs exactly one of snr_db, sigma_sq"))
                    }
                    (Some(db), None) if !db.is_finite() => {
                        return Err(ConfigError::at(src, span, "snr_db must be finite"))
                    }
                    (None, Some(s)) if !(s.is_finite() && s >= 0.0) => {
                        return Err(ConfigError::at(src, span, format!("sigma_sq must be >= 0, got {s}")))
                    }
                    _ => Some(n),
                }
            }
            None => None,
        };

        let sweep = match raw.sweep {
            Some(s) => {
                let span = s.span();
                let mut s = s.into_inner();
                if s.values.is_empty() {
                    match s.axis {
                        SweepAxis::Phase => s.values = reference::uniform_phases(reference::PHASE_POINTS),
                        SweepAxis::Snr => return Err(ConfigError::at(src, span, "an SNR sweep needs values (dB)")),
                    }
                }
                if s.phases.is_empty() && s.axis == SweepAxis::Snr {
                    s.phases = vec![0.0];
                }
                if s.values.iter().chain(&s.phases).any(|v| !v.is_finite()) {
                    return Err(ConfigError::at(src, span, "sweep values must be finite"));
                }
                if !spectrum.is_empty() {
                    let entry = s.phase_entry.unwrap_or(spectrum.len() - 1);
                    if entry >= spectrum.len() {
                        return Err(ConfigError::at(
                            src,
                            span,
                            format!("phase_entry {entry} out of range for {} spectrum entries", spectrum.len()),
                        ));
                    }
                    s.phase_entry = Some(entry);
                }
                Some(s)
            }
            None => None,
        };

        let mut output = raw.output.unwrap_or_default();
        if let Some(dir) = &overrides.out {
            output.dir = dir.clone();
        }

        let base_seed = overrides.seed.or(raw.base_seed).unwrap_or(DEFAULT_SEED);
        if base_seed > i64::MAX as u64 {
            return Err(ConfigError::new(format!("base_seed must be at most {}", i64::MAX)));
        }

        Ok(Self {
            base_seed,
            trials: overrides.trials.or(raw.trials).unwrap_or(DEFAULT_TRIALS),
            methods,
            analytic_basis: raw.analytic_basis.unwrap_or_default(),
            threads,
            grid,
            spectrum,
            noise,
            sweep,
            output,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved config is representable in TOML")
    }

    /// Grid actually used: an even sample count gains one sample.
    pub fn time_grid(&self) -> Result<(TimeGrid, bool), ConfigError> {
        let g = self.grid.as_ref().ok_or_else(|| ConfigError::new("missing [grid] section"))?;
        TimeGrid::odd(g.t_min, g.t_max, g.samples).map_err(|e| ConfigError::new(format!("grid: {e}")))
    }

    pub fn discrete_spectrum(&self) -> Result<DiscreteSpectrum, ConfigError> {
        if self.spectrum.is_empty() {
            return Err(ConfigError::new("missing [[spectrum]] entries"));
        }
        DiscreteSpectrum::new(self.spectrum.iter().map(EntryConfig::entry).collect())
            .map_err(|e| ConfigError::new(format!("spectrum: {e}")))
    }

    pub fn noise_level(&self) -> Result<NoiseLevel, ConfigError> {
        match self.noise.as_ref().ok_or_else(|| ConfigError::new("missing [noise] section"))? {
            NoiseConfig { snr_db: Some(db), .. } => Ok(NoiseLevel::SnrDb(*db)),
            NoiseConfig { sigma_sq: Some(s), .. } => Ok(NoiseLevel::SigmaSq(*s)),
            _ => Err(ConfigError::new("noise needs exactly one of snr_db, sigma_sq")),
        }
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, ConfigError> {
        let sweep = self.sweep.as_ref().ok_or_else(|| ConfigError::new("missing [sweep] section"))?;
        let (grid, _) = self.time_grid()?;
        let spectrum = self.discrete_spectrum()?;
        let noise = match sweep.axis {
            SweepAxis::Phase => self.noise_level()?,
            // per-point SNR replaces it
            SweepAxis::Snr => self.noise_level().unwrap_or(NoiseLevel::SigmaSq(0.0)),
        };
        let cfg = SweepConfig {
            grid,
            spectrum: spectrum.entries().to_vec(),
            phase_entry: sweep.phase_entry.unwrap_or(spectrum.len() - 1),
            axis: sweep.axis,
            values: sweep.values.clone(),
            noise,
            phases: sweep.phases.clone(),
            trials: self.trials,
            base_seed: self.base_seed,
            methods: self.methods.clone(),
            analytic_basis: self.analytic_basis,
            threads: self.threads,
        };
        cfg.validate().map_err(|e| ConfigError::new(format!("sweep: {e}")))?;
        Ok(cfg)
    }

    pub fn stem<'a>(&'a self, default: &'a str) -> &'a str {
        self.output.stem.as_deref().unwrap_or(default)
    }
}

impl EntryConfig {
    pub fn entry(&self) -> SpectralEntry {
        SpectralEntry::new(Complex64::new(self.re, self.im), Complex64::from_polar(self.q_mag, TAU * self.q_phase))
    }
}
