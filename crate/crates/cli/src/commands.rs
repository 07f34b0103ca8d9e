use std::fs;
use std::path::{Path, PathBuf};

use nfteig::collocation::{extract_discrete_spectrum, pulse_operator, solve_eigenproblem, DEFAULT_IM_THRESHOLD};
use nfteig::darboux::synthesize_multisoliton;
use nfteig::experiments::{run_sweep, write_csv, PreparedPoint, SweepResult};
use nfteig::newton::{discrete_amplitude, newton_refine, scattering, DEFAULT_MAX_ITER, DEFAULT_TOL};
use nfteig::signal::{linear_to_db, snr, SampledPulse, SpectralEntry, TimeGrid};
use nfteig::Complex64;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{write_failed, CliError};

#[derive(Debug, Serialize)]
struct GridMeta {
    t_min: f64,
    t_max: f64,
    samples: usize,
    sample_period: f64,
    period: f64,
    /// An even requested count was extended by one sample.
    extended: bool,
}

impl GridMeta {
    fn new(grid: &TimeGrid, extended: bool) -> Self {
        Self {
            t_min: grid.t_min(),
            t_max: grid.t_max(),
            samples: grid.len(),
            sample_period: grid.sample_period(),
            period: grid.period(),
            extended,
        }
    }
}

/// Config header written in front of every CSV: the resolved TOML, one
/// `# `-prefixed line per TOML line.
fn csv_preamble(cfg: &ExperimentConfig) -> String {
    let mut out = String::from("# nfteig resolved config (TOML)\n");
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn output_path(cfg: &ExperimentConfig, stem: &str, ext: &str) -> Result<PathBuf, CliError> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| write_failed(dir, e))?;
    Ok(dir.join(format!("{}.{ext}", cfg.stem(stem))))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| write_failed(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| write_failed(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

#[derive(Serialize)]
struct PulseMeta<'a> {
    config: &'a ExperimentConfig,
    config_toml: String,
    base_seed: u64,
    grid: GridMeta,
    spectrum: Vec<SpectralEntry>,
    energy: f64,
    boundary_magnitude: f64,
    max_abs: f64,
}

pub fn synthesize(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let (grid, extended) = cfg.time_grid()?;
    let spectrum = cfg.discrete_spectrum()?;
    let (pulse, _) = synthesize_multisoliton(&spectrum, &grid)?;

    let csv_path = output_path(cfg, "pulse", "csv")?;
    let mut buf = csv_preamble(cfg).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let rows = grid.times().into_iter().zip(pulse.samples());
        let io = |e: csv::Error| write_failed(&csv_path, e);
        w.write_record(["t", "re", "im"]).map_err(io)?;
        for (t, q) in rows {
            w.write_record([t.to_string(), q.re.to_string(), q.im.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| write_failed(&csv_path, e))?;
    }
    write_bytes(&csv_path, &buf)?;

    let meta = PulseMeta {
        config: cfg,
        config_toml: cfg.to_toml(),
        base_seed: cfg.base_seed,
        grid: GridMeta::new(&grid, extended),
        spectrum: spectrum.entries().to_vec(),
        energy: pulse.energy(),
        boundary_magnitude: pulse.boundary_magnitude(),
        max_abs: pulse.max_abs(),
    };
    log::info!("energy {:.6}, boundary magnitude {:.3e}", meta.energy, meta.boundary_magnitude);
    write_json(&output_path(cfg, "pulse", "json")?, &meta)
}

/// Reads a `t, re, im` CSV; `#` lines are skipped.
pub fn read_pulse(path: &Path) -> Result<SampledPulse, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            return Err(bad(format!("line {line}: expected 3 columns (t, re, im), got {}", record.len())));
        }
        let mut vals = [0.0f64; 3];
        for (v, field) in vals.iter_mut().zip(record.iter()) {
            *v = field.parse().map_err(|_| bad(format!("line {line}: cannot parse '{field}' as a number")))?;
            if !v.is_finite() {
                return Err(bad(format!("line {line}: non-finite value '{field}'")));
            }
        }
        times.push(vals[0]);
        samples.push(Complex64::new(vals[1], vals[2]));
    }
    if times.len() < 3 {
        return Err(bad(format!("need at least 3 samples, got {}", times.len())));
    }
    let grid = TimeGrid::new(times[0], times[times.len() - 1], times.len()).map_err(|e| bad(e.to_string()))?;
    let ts = grid.sample_period();
    if let Some(i) = times.iter().enumerate().position(|(i, t)| (t - grid.time(i)).abs() > 1e-6 * ts) {
        return Err(bad(format!("sample {i} at t = {} is off the uniform grid", times[i])));
    }
    SampledPulse::new(grid, samples).map_err(|e| bad(e.to_string()))
}

#[derive(Debug, Default, Serialize)]
struct NftEntry {
    reference: Option<Complex64>,
    fc: Option<Complex64>,
    /// `‖S a − λ a‖ / ‖a‖` of the FC eigenpair.
    fc_residual: Option<f64>,
    ns: Option<Complex64>,
    ns_iterations: Option<usize>,
    /// `|a(λ)|` at the NS root.
    ns_residual: Option<f64>,
    amplitude: Option<Complex64>,
    /// `|λ_FC − λ_NS|`.
    disagreement: Option<f64>,
    ns_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct NftReport<'a> {
    config: Option<&'a ExperimentConfig>,
    input: String,
    grid: GridMeta,
    fc_error: Option<String>,
    eigenvalues: Vec<NftEntry>,
}

fn fmt_c(z: Option<Complex64>) -> String {
    z.map(|z| format!("{:.8}{:+.8}j", z.re, z.im)).unwrap_or_else(|| "-".into())
}

/// Both estimators on a pulse file. References, when given, come from the
/// config spectrum; otherwise every FC eigenvalue above the continuum
/// threshold is reported.
pub fn nft(input: &Path, cfg: Option<&ExperimentConfig>, out_cfg: &ExperimentConfig) -> Result<(), CliError> {
    let pulse = read_pulse(input)?;
    let refs: Option<Vec<Complex64>> =
        cfg.filter(|c| !c.spectrum.is_empty()).map(|c| c.spectrum.iter().map(|e| e.entry().eigenvalue).collect());

    let mut entries: Vec<NftEntry> = Vec::new();
    let fc = pulse_operator(&pulse).and_then(|op| {
        let pairs = solve_eigenproblem(&op)?;
        let found = match &refs {
            Some(r) => extract_discrete_spectrum(&pairs, r)?,
            None => {
                let mut found: Vec<_> = pairs.into_iter().filter(|p| p.eigenvalue.im > DEFAULT_IM_THRESHOLD).collect();
                found.sort_by(|a, b| a.eigenvalue.im.total_cmp(&b.eigenvalue.im));
                found
            }
        };
        Ok(found.into_iter().map(|p| (p.eigenvalue, p.residual(&op))).collect::<Vec<_>>())
    });
    let fc_error = match fc {
        Ok(found) => {
            for (i, (lam, res)) in found.into_iter().enumerate() {
                entries.push(NftEntry {
                    reference: refs.as_ref().map(|r| r[i]),
                    fc: Some(lam),
                    fc_residual: Some(res),
                    ..Default::default()
                });
            }
            None
        }
        Err(e) => {
            log::warn!("FC: {e}");
            if let Some(r) = &refs {
                entries = r.iter().map(|&l| NftEntry { reference: Some(l), ..Default::default() }).collect();
            }
            Some(e.to_string())
        }
    };

    for e in entries.iter_mut() {
        let start = e.fc.or(e.reference).expect("every entry has a starting point");
        let refined = newton_refine(&pulse, start, DEFAULT_MAX_ITER, DEFAULT_TOL).and_then(|r| {
            let a = scattering(&pulse, r.eigenvalue)?.a.norm();
            let q = discrete_amplitude(&pulse, r.eigenvalue)?;
            Ok((r, a, q))
        });
        match refined {
            Ok((r, a, q)) => {
                e.ns = Some(r.eigenvalue);
                e.ns_iterations = Some(r.iterations);
                e.ns_residual = Some(a);
                e.amplitude = Some(q);
                e.disagreement = e.fc.map(|f| (f - r.eigenvalue).norm());
            }
            Err(err) => {
                log::warn!("NS from {start}: {err}");
                e.ns_error = Some(err.to_string());
            }
        }
    }

    if entries.is_empty() {
        println!("no discrete spectrum found");
    } else {
        println!("{:>3}  {:>36}  {:>36}  {:>36}  {:>10}  {:>36}", "k", "reference", "fc", "ns", "|fc-ns|", "amplitude");
        for (k, e) in entries.iter().enumerate() {
            println!(
                "{k:>3}  {:>36}  {:>36}  {:>36}  {:>10}  {:>36}",
                fmt_c(e.reference),
                fmt_c(e.fc),
                fmt_c(e.ns),
                e.disagreement.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "-".into()),
                fmt_c(e.amplitude)
            );
        }
    }
    if let Some(err) = &fc_error {
        println!("fc: {err}");
    }

    let all_failed = !entries.is_empty() && fc_error.is_some() && entries.iter().all(|e| e.ns.is_none());
    let report = NftReport {
        config: cfg,
        input: input.display().to_string(),
        grid: GridMeta::new(pulse.grid(), false),
        fc_error,
        eigenvalues: entries,
    };
    write_json(&output_path(out_cfg, "nft", "json")?, &report)?;
    if all_failed {
        return Err(CliError::Numerical("both methods failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct CovarianceReport<'a> {
    config: &'a ExperimentConfig,
    config_toml: String,
    base_seed: u64,
    grid: GridMeta,
    eigenvalues: Vec<Complex64>,
    fc_eigenvalues: Vec<Complex64>,
    sigma_sq: f64,
    snr_db: Option<f64>,
    covariance: nfteig::perturbation::EigCovariance,
}

pub fn covariance(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let (grid, extended) = cfg.time_grid()?;
    let spectrum = cfg.discrete_spectrum()?;
    let noise = cfg.noise_level()?;
    let prepared = PreparedPoint::new(&spectrum, &grid, cfg.analytic_basis)?;
    let sigma_sq = noise.sigma_sq(&prepared.pulse);
    let cov = prepared.analytic_covariance(sigma_sq)?;
    let report = CovarianceReport {
        config: cfg,
        config_toml: cfg.to_toml(),
        base_seed: cfg.base_seed,
        grid: GridMeta::new(&grid, extended),
        eigenvalues: prepared.reference.clone(),
        fc_eigenvalues: prepared.fc_eigenvalues(),
        sigma_sq,
        snr_db: snr(&prepared.pulse, sigma_sq).ok().map(linear_to_db),
        covariance: cov,
    };
    write_json(&output_path(cfg, "covariance", "json")?, &report)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a ExperimentConfig,
    config_toml: String,
    base_seed: u64,
    grid: GridMeta,
    result: &'a SweepResult,
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let sweep_cfg = cfg.sweep_config()?;
    let (_, extended) = cfg.time_grid()?;
    let result = run_sweep(&sweep_cfg)?;

    let csv_path = output_path(cfg, "sweep", "csv")?;
    let mut buf = csv_preamble(cfg).into_bytes();
    write_csv(&result, &mut buf).map_err(|e| write_failed(&csv_path, e))?;
    write_bytes(&csv_path, &buf)?;
    let report = SweepReport {
        config: cfg,
        config_toml: cfg.to_toml(),
        base_seed: cfg.base_seed,
        grid: GridMeta::new(&sweep_cfg.grid, extended),
        result: &result,
    };
    write_json(&output_path(cfg, "sweep", "json")?, &report)?;

    let failed = |p: &nfteig::experiments::SweepPoint| {
        p.phases.iter().all(|ph| {
            ph.error.is_some() || (cfg.trials > 0 && ph.methods.iter().all(|m| m.empirical.is_none()))
        })
    };
    if !result.points.is_empty() && result.points.iter().all(failed) {
        return Err(CliError::Numerical("every sweep point failed".into()));
    }
    Ok(())
}
