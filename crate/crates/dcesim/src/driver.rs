//! Run orchestration: TOML configuration with figure presets, trajectory
//! CSV and snapshot emission, periodic checkpoints, resume, and parameter
//! sweeps.
//!
//! Every run writes into its own output directory:
//!
//! ```text
//! out/
//!   config.resolved.toml     fully resolved configuration (reloadable)
//!   trajectory.csv           one row per sample time (schema below)
//!   photon_distribution_t*.dat   snapshots at requested times
//!   checkpoint.bin           periodically refreshed resume point
//!   plot.py                  generated matplotlib script over the CSV
//! ```
//!
//! The CSV schema is frozen as `trajectory-v1`: columns
//! `t, P_e, n_mean, n_std, S_L, negativity, F_ph, r, M_av, M_opt,
//! trace_error, tail_population`, with `r` rendered as `nan` while the
//! cavity is effectively empty. Each output embeds the resolved config
//! (CSV: `#`-prefixed header; snapshots: the config hash), so a run is
//! reconstructible from its outputs alone. Reruns of the same config on
//! the same build produce byte-identical files.

use crate::evolve::{
    self, read_checkpoint, write_checkpoint, Checkpoint, EvolveError, Frame, IntegratorConfig,
    Sample, TrajectoryRecord,
};
use crate::hilbert::HilbertConfig;
use crate::model::SystemParams;
use crate::observables::PhotonDistribution;
use crate::states;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Frozen CSV schema identifier.
pub const CSV_SCHEMA: &str = "trajectory-v1";
/// Frozen CSV column set, in order.
pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "P_e",
    "n_mean",
    "n_std",
    "S_L",
    "negativity",
    "F_ph",
    "r",
    "M_av",
    "M_opt",
    "trace_error",
    "tail_population",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown preset '{0}' (valid: fig1, fig2, fig4, fig5)")]
    UnknownPreset(String),
    #[error("system.eps and system.eps_rel are mutually exclusive; give exactly one")]
    EpsConflict,
    #[error("missing required key {0} (no preset supplies it)")]
    Missing(&'static str),
    #[error("invalid parameters: {0}")]
    Params(#[from] crate::model::ModelError),
    #[error("invalid integrator settings: {0}")]
    Integrator(String),
    #[error("unknown sweep axis '{name}'; valid axes: {valid}")]
    UnknownAxis { name: String, valid: String },
    #[error("sweep needs a non-empty list of values")]
    EmptySweep,
    #[error("axis n_fock needs positive integer values, got {0}")]
    BadFockValue(f64),
    #[error("override '{0}' is not KEY=VALUE")]
    BadOverride(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Checkpoint(#[from] evolve::CheckpointError),
    #[error("checkpoint was produced by a different configuration (hash mismatch); pass force=true to resume anyway")]
    HashMismatch,
}

impl RunError {
    /// Process exit code: 2 config, 4 truncation breach, 3 other failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Evolve(EvolveError::TailBreach { .. }) => 4,
            _ => 3,
        }
    }
}

/// Figure presets; parameters quoted from the corresponding captions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig4,
    Fig5,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        match name.to_ascii_lowercase().as_str() {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    /// Two-photon resonance sweeps (fig1, fig2) use g = 0.05ν, Ω₀ = 0.5ν;
    /// four-photon sweeps (fig4, fig5) use g = 0.15ν, Ω₀ = 2.9ν. All use
    /// ε = 0.08·Ω₀ and rates γ = γ_φ = κ = 1e-6 ν.
    pub fn params(&self) -> SystemParams {
        let two_photon = SystemParams {
            nu: 1.0,
            g: 0.05,
            omega0: 0.5,
            eps: 0.08 * 0.5,
            eta0: 2.00655,
            alpha: 2e-8,
            gamma: 1e-6,
            gamma_phi: 1e-6,
            kappa: 1e-6,
        };
        let four_photon = SystemParams {
            g: 0.15,
            omega0: 2.9,
            eps: 0.08 * 2.9,
            eta0: 3.931,
            alpha: 8e-7,
            ..two_photon
        };
        match self {
            Preset::Fig1 => two_photon,
            Preset::Fig2 => SystemParams {
                eta0: 2.00715,
                alpha: -5e-8,
                ..two_photon
            },
            Preset::Fig4 => four_photon,
            Preset::Fig5 => SystemParams {
                alpha: 2e-6,
                ..four_photon
            },
        }
    }
}

/// Raw configuration file; every key optional so presets and defaults can
/// fill the gaps. Unknown keys are rejected with the full list of valid
/// ones.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    /// Informational tag echoed into outputs; no effect on resolution.
    pub label: Option<String>,
    pub dissipation_on: Option<bool>,
    pub output_dir: Option<PathBuf>,
    pub snapshot_times: Option<Vec<f64>>,
    /// Samples between checkpoint refreshes; 0 disables periodic
    /// checkpoints (one is still written at the end).
    pub checkpoint_stride: Option<usize>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub hilbert: HilbertSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub nu: Option<f64>,
    pub g: Option<f64>,
    pub omega0: Option<f64>,
    pub eps: Option<f64>,
    /// Modulation amplitude as a fraction of omega0 (the figure captions
    /// use ε = 0.08 Ω₀). Exactly one of eps, eps_rel may be present.
    pub eps_rel: Option<f64>,
    pub eta0: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_phi: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertSection {
    pub n_fock: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub t_final: Option<f64>,
    pub sample_stride: Option<f64>,
    pub frame: Option<Frame>,
}

/// Fully resolved run configuration. Serializes to a TOML document that
/// [`load_config`] accepts back unchanged.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub label: String,
    pub dissipation_on: bool,
    pub output_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    pub checkpoint_stride: usize,
    pub system: SystemParams,
    pub hilbert: ResolvedHilbert,
    pub integrator: IntegratorConfig,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedHilbert {
    pub n_fock: usize,
}

impl RunConfig {
    pub fn hilbert_config(&self) -> HilbertConfig {
        HilbertConfig::new(self.hilbert.n_fock).expect("validated at resolution")
    }

    /// Parameters actually integrated: rates zeroed when dissipation_on is
    /// false (the unitary reference curves of the figures).
    pub fn effective_params(&self) -> SystemParams {
        if self.dissipation_on {
            self.system
        } else {
            self.system.without_dissipation()
        }
    }

    /// Canonical TOML echo of the resolved configuration.
    pub fn resolved_toml(&self) -> String {
        toml::to_string_pretty(self).expect("resolved config serializes")
    }

    /// Hex sha-256 of the canonical echo; embedded in every output.
    pub fn hash_hex(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.resolved_toml().as_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }

    pub fn hash_bytes(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.resolved_toml().as_bytes());
        hasher.finalize().into()
    }
}

/// Load and resolve a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ConfigFile = toml::from_str(&text)?;
    resolve(file)
}

/// Parse config text with dotted-path overrides applied before
/// deserialization (`integrator.t_final=100`, `system.alpha=-5e-8`, ...).
/// Flags override file keys this way.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = if text.trim().is_empty() {
        toml::Table::new()
    } else {
        text.parse::<toml::Table>()?
    };
    let mut value = toml::Value::Table(table);
    for (key, raw) in overrides {
        set_dotted(&mut value, key, raw)?;
    }
    let file: ConfigFile = value.try_into()?;
    resolve(file)
}

fn set_dotted(root: &mut toml::Value, dotted: &str, raw: &str) -> Result<(), ConfigError> {
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut cursor = root;
    let parts: Vec<&str> = dotted.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let table = cursor
            .as_table_mut()
            .ok_or_else(|| ConfigError::BadOverride(dotted.to_string()))?;
        cursor = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = cursor
        .as_table_mut()
        .ok_or_else(|| ConfigError::BadOverride(dotted.to_string()))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

/// Resolve a raw file against its preset and the crate defaults.
pub fn resolve(file: ConfigFile) -> Result<RunConfig, ConfigError> {
    let preset = file.preset.as_deref().map(Preset::parse).transpose()?;
    let base = preset.map(|p| p.params());

    let s = &file.system;
    if s.eps.is_some() && s.eps_rel.is_some() {
        return Err(ConfigError::EpsConflict);
    }

    let pick = |explicit: Option<f64>,
                from_preset: fn(&SystemParams) -> f64,
                name: &'static str,
                key: &'static str|
     -> Result<f64, ConfigError> {
        if let Some(v) = explicit {
            if let Some(b) = &base {
                let preset_value = from_preset(b);
                if v != preset_value {
                    log::warn!(
                        "preset {} supplies {key} = {preset_value}, overridden to {v}",
                        preset.expect("base implies preset").label()
                    );
                }
            }
            Ok(v)
        } else if let Some(b) = &base {
            Ok(from_preset(b))
        } else {
            Err(ConfigError::Missing(name))
        }
    };

    let nu = match s.nu {
        Some(v) => v,
        None => base.as_ref().map(|b| b.nu).unwrap_or(1.0),
    };
    let omega0 = pick(s.omega0, |b| b.omega0, "system.omega0", "omega0")?;
    let g = pick(s.g, |b| b.g, "system.g", "g")?;
    let eta0 = pick(s.eta0, |b| b.eta0, "system.eta0", "eta0")?;
    let alpha = pick(s.alpha, |b| b.alpha, "system.alpha", "alpha")?;
    let gamma = pick(s.gamma, |b| b.gamma, "system.gamma", "gamma")?;
    let gamma_phi = pick(s.gamma_phi, |b| b.gamma_phi, "system.gamma_phi", "gamma_phi")?;
    let kappa = pick(s.kappa, |b| b.kappa, "system.kappa", "kappa")?;
    let eps = if let Some(rel) = s.eps_rel {
        let v = rel * omega0;
        if base.is_some() {
            log::warn!("preset eps overridden by eps_rel = {rel} (-> eps = {v})");
        }
        v
    } else {
        pick(s.eps, |b| b.eps, "system.eps or system.eps_rel", "eps")?
    };

    let system = SystemParams {
        nu,
        g,
        omega0,
        eps,
        eta0,
        alpha,
        gamma,
        gamma_phi,
        kappa,
    };
    system.validate()?;
    for warning in system.warnings() {
        log::warn!("{warning}");
    }

    let n_fock = file.hilbert.n_fock.unwrap_or(120);
    HilbertConfig::new(n_fock).map_err(|e| ConfigError::Integrator(e.to_string()))?;

    let defaults = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        rtol: file.integrator.rtol.unwrap_or(defaults.rtol),
        atol: file.integrator.atol.unwrap_or(defaults.atol),
        max_step: file.integrator.max_step.unwrap_or(defaults.max_step),
        initial_step: file.integrator.initial_step.unwrap_or(defaults.initial_step),
        t_final: file.integrator.t_final.unwrap_or(defaults.t_final),
        sample_stride: file.integrator.sample_stride.unwrap_or(defaults.sample_stride),
        frame: file.integrator.frame.unwrap_or(defaults.frame),
    };
    integrator
        .validate()
        .map_err(|e| ConfigError::Integrator(e.to_string()))?;

    let label = file
        .label
        .or_else(|| preset.map(|p| p.label().to_string()))
        .unwrap_or_else(|| "custom".to_string());
    let output_dir = file
        .output_dir
        .unwrap_or_else(|| PathBuf::from("runs").join(&label));

    Ok(RunConfig {
        label,
        dissipation_on: file.dissipation_on.unwrap_or(true),
        output_dir,
        snapshot_times: file.snapshot_times.unwrap_or_default(),
        checkpoint_stride: file.checkpoint_stride.unwrap_or(50),
        system,
        hilbert: ResolvedHilbert { n_fock },
        integrator,
    })
}

/// Outcome of a completed run.
#[derive(Debug)]
pub struct RunSummary {
    pub rows_written: usize,
    pub final_record: Option<TrajectoryRecord>,
    pub csv_path: PathBuf,
    pub checkpoint_path: PathBuf,
    pub elapsed_seconds: f64,
}

struct OutputWriter {
    csv: BufWriter<fs::File>,
    csv_path: PathBuf,
    dir: PathBuf,
    hash_hex: String,
    rows: usize,
}

impl OutputWriter {
    fn create(cfg: &RunConfig) -> Result<Self, RunError> {
        let dir = cfg.output_dir.clone();
        fs::create_dir_all(&dir).map_err(|source| RunError::Io {
            path: dir.clone(),
            source,
        })?;
        let resolved = cfg.resolved_toml();
        let hash_hex = cfg.hash_hex();
        write_file(&dir.join("config.resolved.toml"), resolved.as_bytes())?;

        let csv_path = dir.join("trajectory.csv");
        let file = fs::File::create(&csv_path).map_err(|source| RunError::Io {
            path: csv_path.clone(),
            source,
        })?;
        let mut csv = BufWriter::new(file);
        let mut header = String::new();
        let _ = writeln!(header, "# dcesim {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(header, "# schema={CSV_SCHEMA}");
        let _ = writeln!(header, "# config_hash={hash_hex}");
        for line in resolved.lines() {
            let _ = writeln!(header, "# {line}");
        }
        let _ = writeln!(header, "{}", CSV_COLUMNS.join(","));
        csv.write_all(header.as_bytes()).map_err(|source| RunError::Io {
            path: csv_path.clone(),
            source,
        })?;
        Ok(Self {
            csv,
            csv_path,
            dir,
            hash_hex,
            rows: 0,
        })
    }

    fn append_existing(cfg: &RunConfig) -> Result<Self, RunError> {
        let dir = cfg.output_dir.clone();
        let csv_path = dir.join("trajectory.csv");
        let file = fs::OpenOptions::new()
            .append(true)
            .open(&csv_path)
            .map_err(|source| RunError::Io {
                path: csv_path.clone(),
                source,
            })?;
        Ok(Self {
            csv: BufWriter::new(file),
            csv_path,
            dir,
            hash_hex: cfg.hash_hex(),
            rows: 0,
        })
    }

    fn write_record(&mut self, rec: &TrajectoryRecord) -> Result<(), RunError> {
        let mut line = String::with_capacity(256);
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},",
            rec.t, rec.p_e, rec.n_mean, rec.n_std, rec.s_l, rec.negativity, rec.f_ph
        );
        match rec.r {
            Some(r) => {
                let _ = write!(line, "{r}");
            }
            None => line.push_str("nan"),
        }
        let _ = writeln!(
            line,
            ",{},{},{},{}",
            rec.m_av, rec.m_opt, rec.trace_error, rec.tail_population
        );
        self.csv
            .write_all(line.as_bytes())
            .and_then(|_| self.csv.flush())
            .map_err(|source| RunError::Io {
                path: self.csv_path.clone(),
                source,
            })?;
        self.rows += 1;
        Ok(())
    }

    fn write_snapshot(&self, dist: &PhotonDistribution) -> Result<(), RunError> {
        let path = self.dir.join(format!("photon_distribution_t{}.dat", dist.t));
        let mut text = String::new();
        let _ = writeln!(text, "# t={}", dist.t);
        let _ = writeln!(text, "# config_hash={}", self.hash_hex);
        let _ = writeln!(text, "# columns: m probability");
        for (m, p) in dist.probabilities.iter().enumerate() {
            let _ = writeln!(text, "{m} {p}");
        }
        write_file(&path, text.as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Execute a configured run from |g,0⟩, streaming outputs as they are
/// produced. On failure the partial CSV (and the last checkpoint) remain
/// on disk.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    let started = std::time::Instant::now();
    let mut out = OutputWriter::create(cfg)?;
    let plot = format!(
        "#!/usr/bin/env python3\n# config_hash={}\n{}",
        out.hash_hex,
        plot_script()
    );
    write_file(&out.dir.join("plot.py"), plot.as_bytes())?;

    let hc = cfg.hilbert_config();
    let params = cfg.effective_params();
    let rho0 = states::ground_vacuum(&hc);
    let checkpoint_path = cfg.output_dir.join("checkpoint.bin");

    let mut snaps = cfg.snapshot_times.clone();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0usize;
    let mut samples_seen = 0usize;
    let mut last_record: Option<TrajectoryRecord> = None;
    let mut deferred: Option<RunError> = None;

    let result = evolve::integrate_with(&rho0, &params, &hc, &cfg.integrator, |sample| {
        match observe(
            sample,
            cfg,
            &mut out,
            &mut snaps,
            &mut next_snap,
            &mut samples_seen,
            &checkpoint_path,
        ) {
            Ok(rec) => {
                last_record = Some(rec);
                Ok(())
            }
            Err(err) => {
                deferred = Some(err);
                Err(EvolveError::Aborted)
            }
        }
    });

    match result {
        Ok(final_state) => {
            write_checkpoint(
                &checkpoint_path,
                &Checkpoint {
                    frame: final_state.frame,
                    n_fock: hc.n_fock(),
                    t: final_state.t,
                    step: final_state.step,
                    config_hash: cfg.hash_bytes(),
                    state: final_state.state,
                },
            )?;
            Ok(RunSummary {
                rows_written: out.rows,
                final_record: last_record,
                csv_path: out.csv_path.clone(),
                checkpoint_path,
                elapsed_seconds: started.elapsed().as_secs_f64(),
            })
        }
        Err(EvolveError::Aborted) if deferred.is_some() => {
            Err(deferred.expect("checked is_some"))
        }
        Err(err) => Err(err.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn observe(
    sample: &Sample<'_>,
    cfg: &RunConfig,
    out: &mut OutputWriter,
    snaps: &mut [f64],
    next_snap: &mut usize,
    samples_seen: &mut usize,
    checkpoint_path: &Path,
) -> Result<TrajectoryRecord, RunError> {
    let mut want_snapshot = false;
    while *next_snap < snaps.len() && sample.t >= snaps[*next_snap] - 1e-9 {
        want_snapshot = true;
        *next_snap += 1;
    }
    let rec = TrajectoryRecord::measure(sample, want_snapshot)?;
    out.write_record(&rec)?;
    if let Some(dist) = &rec.photon_distribution {
        out.write_snapshot(dist)?;
    }
    *samples_seen += 1;
    if cfg.checkpoint_stride > 0 && *samples_seen % cfg.checkpoint_stride == 0 {
        write_checkpoint(
            checkpoint_path,
            &Checkpoint {
                frame: cfg.integrator.frame,
                n_fock: cfg.hilbert.n_fock,
                t: sample.t,
                step: sample.step_size,
                config_hash: cfg.hash_bytes(),
                state: sample.rho.matrix().clone(),
            },
        )?;
    }
    Ok(rec)
}

/// Resume a run from its checkpoint, appending to the existing CSV.
///
/// The checkpoint must carry the hash of the same resolved configuration
/// unless `force` is set. Checkpoints are taken at sample times from the
/// symmetrized state, so a resumed trajectory agrees with an uninterrupted
/// one within the integration tolerances rather than bitwise.
pub fn resume(cfg: &RunConfig, checkpoint_path: &Path, force: bool) -> Result<RunSummary, RunError> {
    let started = std::time::Instant::now();
    let cp = read_checkpoint(checkpoint_path)?;
    if cp.config_hash != cfg.hash_bytes() && !force {
        return Err(RunError::HashMismatch);
    }
    let hc = cfg.hilbert_config();
    let params = cfg.effective_params();
    let mut out = OutputWriter::append_existing(cfg)?;

    let mut snaps = cfg.snapshot_times.clone();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = snaps.iter().filter(|&&s| s <= cp.t + 1e-9).count();
    let mut samples_seen = 0usize;
    let mut last_record = None;
    let mut deferred: Option<RunError> = None;
    let new_checkpoint = cfg.output_dir.join("checkpoint.bin");

    let start = evolve::ResumePoint {
        t: cp.t,
        step: cp.step,
        state: cp.state,
        frame: cp.frame,
    };
    let result = evolve::resume_with(start, &params, &hc, &cfg.integrator, |sample| {
        match observe(
            sample,
            cfg,
            &mut out,
            &mut snaps,
            &mut next_snap,
            &mut samples_seen,
            &new_checkpoint,
        ) {
            Ok(rec) => {
                last_record = Some(rec);
                Ok(())
            }
            Err(err) => {
                deferred = Some(err);
                Err(EvolveError::Aborted)
            }
        }
    });

    match result {
        Ok(final_state) => {
            write_checkpoint(
                &new_checkpoint,
                &Checkpoint {
                    frame: final_state.frame,
                    n_fock: hc.n_fock(),
                    t: final_state.t,
                    step: final_state.step,
                    config_hash: cfg.hash_bytes(),
                    state: final_state.state,
                },
            )?;
            Ok(RunSummary {
                rows_written: out.rows,
                final_record: last_record,
                csv_path: out.csv_path.clone(),
                checkpoint_path: new_checkpoint,
                elapsed_seconds: started.elapsed().as_secs_f64(),
            })
        }
        Err(EvolveError::Aborted) if deferred.is_some() => {
            Err(deferred.expect("checked is_some"))
        }
        Err(err) => Err(err.into()),
    }
}

/// Sweep axes accepted by [`sweep`].
pub const SWEEP_AXES: [&str; 17] = [
    "nu",
    "g",
    "omega0",
    "eps",
    "eps_rel",
    "eta0",
    "alpha",
    "gamma",
    "gamma_phi",
    "kappa",
    "n_fock",
    "rtol",
    "atol",
    "max_step",
    "initial_step",
    "t_final",
    "sample_stride",
];

/// Derive the run configuration for one sweep point.
pub fn apply_axis(base: &RunConfig, axis: &str, value: f64) -> Result<RunConfig, ConfigError> {
    let mut cfg = base.clone();
    match axis {
        "nu" => cfg.system.nu = value,
        "g" => cfg.system.g = value,
        "omega0" => cfg.system.omega0 = value,
        "eps" => cfg.system.eps = value,
        "eps_rel" => cfg.system.eps = value * cfg.system.omega0,
        "eta0" => cfg.system.eta0 = value,
        "alpha" => cfg.system.alpha = value,
        "gamma" => cfg.system.gamma = value,
        "gamma_phi" => cfg.system.gamma_phi = value,
        "kappa" => cfg.system.kappa = value,
        "n_fock" => {
            if value <= 0.0 || value.fract() != 0.0 {
                return Err(ConfigError::BadFockValue(value));
            }
            cfg.hilbert.n_fock = value as usize;
        }
        "rtol" => cfg.integrator.rtol = value,
        "atol" => cfg.integrator.atol = value,
        "max_step" => cfg.integrator.max_step = value,
        "initial_step" => cfg.integrator.initial_step = value,
        "t_final" => cfg.integrator.t_final = value,
        "sample_stride" => cfg.integrator.sample_stride = value,
        other => {
            return Err(ConfigError::UnknownAxis {
                name: other.to_string(),
                valid: SWEEP_AXES.join(", "),
            })
        }
    }
    cfg.system.validate()?;
    HilbertConfig::new(cfg.hilbert.n_fock).map_err(|e| ConfigError::Integrator(e.to_string()))?;
    cfg.integrator
        .validate()
        .map_err(|e| ConfigError::Integrator(e.to_string()))?;
    cfg.label = format!("{}_{axis}={value}", base.label);
    cfg.output_dir = base.output_dir.join(format!("{axis}={value}"));
    Ok(cfg)
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub value: f64,
    pub dir: PathBuf,
    pub result: Result<RunSummary, RunError>,
}

#[derive(Debug)]
pub struct SweepSummary {
    pub outcomes: Vec<SweepOutcome>,
    pub index_path: PathBuf,
}

impl SweepSummary {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }

    /// Exit code across the whole sweep: 0 if everything succeeded, else
    /// the most severe per-run code (3 beats 4 beats 2).
    pub fn exit_code(&self) -> u8 {
        let mut code = 0u8;
        for o in &self.outcomes {
            if let Err(e) = &o.result {
                let c = e.exit_code();
                code = match (code, c) {
                    (0, c) => c,
                    (3, _) | (_, 3) => 3,
                    (a, b) => a.max(b),
                };
            }
        }
        code
    }
}

/// Run one independent simulation per axis value, each in its own
/// subdirectory of the base output dir. A failing value does not abort its
/// siblings; the index file records every outcome.
pub fn sweep(
    base: &RunConfig,
    axis: &str,
    values: &[f64],
    workers: usize,
) -> Result<SweepSummary, RunError> {
    if values.is_empty() {
        return Err(ConfigError::EmptySweep.into());
    }
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|&v| apply_axis(base, axis, v))
        .collect::<Result<_, _>>()?;

    fs::create_dir_all(&base.output_dir).map_err(|source| RunError::Io {
        path: base.output_dir.clone(),
        source,
    })?;

    let workers = workers.max(1).min(values.len());
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<SweepOutcome>> = Vec::new();
    slots.resize_with(values.len(), || None);
    let slots = std::sync::Mutex::new(slots);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let cfg = &configs[i];
                let result = run(cfg);
                let outcome = SweepOutcome {
                    value: values[i],
                    dir: cfg.output_dir.clone(),
                    result,
                };
                slots.lock().expect("no panics while holding the lock")[i] = Some(outcome);
            });
        }
    });

    let outcomes: Vec<SweepOutcome> = slots
        .into_inner()
        .expect("all workers joined")
        .into_iter()
        .map(|o| o.expect("every index visited"))
        .collect();

    let index_path = base.output_dir.join("index.tsv");
    let mut index = format!(
        "# dcesim {} sweep axis={axis} base_hash={}\n",
        env!("CARGO_PKG_VERSION"),
        base.hash_hex()
    );
    index.push_str("value\tdirectory\tstatus\n");
    for o in &outcomes {
        let status = match &o.result {
            Ok(s) => format!("ok rows={}", s.rows_written),
            Err(e) => format!("failed: {e}"),
        };
        let _ = writeln!(index, "{}\t{}\t{status}", o.value, o.dir.display());
    }
    write_file(&index_path, index.as_bytes())?;

    // a truncation sweep doubles as a convergence study: report how the
    // final observables move between consecutive truncations
    if axis == "n_fock" {
        let mut report = String::from(
            "n_fock\tn_mean\tF_ph\trel_change_n_mean\trel_change_F_ph\n",
        );
        let mut prev: Option<(f64, f64)> = None;
        for o in &outcomes {
            if let Ok(summary) = &o.result {
                if let Some(rec) = &summary.final_record {
                    let (dn, df) = match prev {
                        Some((pn, pf)) => (
                            (rec.n_mean - pn).abs() / rec.n_mean.abs().max(1e-30),
                            (rec.f_ph - pf).abs() / rec.f_ph.abs().max(1e-30),
                        ),
                        None => (f64::NAN, f64::NAN),
                    };
                    let _ = writeln!(
                        report,
                        "{}\t{}\t{}\t{:e}\t{:e}",
                        o.value, rec.n_mean, rec.f_ph, dn, df
                    );
                    prev = Some((rec.n_mean, rec.f_ph));
                }
            }
        }
        write_file(&base.output_dir.join("convergence.tsv"), report.as_bytes())?;
    }

    Ok(SweepSummary {
        outcomes,
        index_path,
    })
}

/// Matplotlib script emitted next to every trajectory CSV; plotting stays
/// out of the simulator so the CSV is the contract.
fn plot_script() -> &'static str {
    r##""""Render the panels of a dcesim trajectory CSV."""
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "trajectory.csv"
rows = []
with open(path) as fh:
    for line in fh:
        if line.startswith("#"):
            continue
        rows.append(line.strip())
reader = csv.DictReader(rows)
data = {k: [] for k in reader.fieldnames}
for rec in reader:
    for k, v in rec.items():
        data[k].append(float(v))

t = data["t"]
panels = [
    ("P_e", "qubit excitation"),
    ("S_L", "linear entropy"),
    ("n_mean", "mean photon number"),
    ("negativity", "negativity"),
    ("F_ph", "phase QFI"),
    ("M_av", "M_av"),
    ("r", "squeezed-vacuum ratio r"),
    ("M_opt", "M_opt"),
]
fig, axes = plt.subplots(4, 2, figsize=(9, 11), sharex=True)
for ax, (key, title) in zip(axes.flat, panels):
    ax.plot(t, data[key], lw=0.9)
    ax.set_title(title, fontsize=9)
    ax.grid(alpha=0.3)
    if key == "n_mean":
        lo = [n - s for n, s in zip(data["n_mean"], data["n_std"])]
        hi = [n + s for n, s in zip(data["n_mean"], data["n_std"])]
        ax.fill_between(t, lo, hi, alpha=0.25)
    if key == "r" and any(not math.isnan(v) for v in data["r"]):
        ax.axhline(1.0, color="k", lw=0.6, ls="--")
for ax in axes[-1]:
    ax.set_xlabel("t [1/nu]")
fig.tight_layout()
out = path.replace(".csv", ".png")
fig.savefig(out, dpi=160)
print(f"wrote {out}")
"##
}
