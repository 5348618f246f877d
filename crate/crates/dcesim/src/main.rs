//! Thin command-line front end over [`dcesim::driver`].

use clap::{Args, Parser, Subcommand};
use dcesim::driver::{self, RunConfig, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dcesim",
    version,
    about = "Dissipative quantum Rabi simulator with chirped qubit-frequency modulation and QFI metrology"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configured run and write trajectory.csv, snapshots,
    /// checkpoint and plot script into the output directory.
    Run(RunArgs),
    /// Run one simulation per value of a swept parameter, in parallel.
    Sweep(SweepArgs),
    /// Continue an interrupted run from its checkpoint.
    Resume(ResumeArgs),
    /// Load, resolve and echo a configuration without running anything.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonConfig {
    /// TOML configuration file; optional when --preset is given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter preset: fig1, fig2, fig4 or fig5.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    n_fock: Option<usize>,
    /// Integration frame: lab or rotating.
    #[arg(long)]
    frame: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    sample_stride: Option<f64>,
    /// Include dissipation (true) or force unitary dynamics (false).
    #[arg(long)]
    dissipation: Option<bool>,
    /// Comma-separated snapshot times for photon distributions.
    #[arg(long)]
    snapshot_times: Option<String>,
    /// Generic dotted override, e.g. --set system.alpha=-5e-8 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl CommonConfig {
    fn resolve(&self) -> Result<RunConfig, RunError> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?,
            None => String::new(),
        };
        let mut overrides: Vec<(String, String)> = Vec::new();
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                overrides.push((key.to_string(), v));
            }
        };
        push("preset", self.preset.as_ref().map(|p| format!("\"{p}\"")));
        push(
            "output_dir",
            self.output_dir
                .as_ref()
                .map(|p| format!("\"{}\"", p.display())),
        );
        push("integrator.t_final", self.t_final.map(|v| v.to_string()));
        push("hilbert.n_fock", self.n_fock.map(|v| v.to_string()));
        push("integrator.frame", self.frame.as_ref().map(|f| format!("\"{f}\"")));
        push("integrator.rtol", self.rtol.map(|v| v.to_string()));
        push("integrator.atol", self.atol.map(|v| v.to_string()));
        push(
            "integrator.sample_stride",
            self.sample_stride.map(|v| v.to_string()),
        );
        push("dissipation_on", self.dissipation.map(|v| v.to_string()));
        push(
            "snapshot_times",
            self.snapshot_times
                .as_ref()
                .map(|list| format!("[{list}]")),
        );
        for entry in &self.sets {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| driver::ConfigError::BadOverride(entry.clone()))?;
            overrides.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(driver::parse_config(&text, &overrides)?)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonConfig,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Swept parameter name (system, hilbert or integrator key).
    #[arg(long)]
    axis: String,
    /// Comma-separated values, e.g. "2e-8,-5e-8".
    #[arg(long)]
    values: String,
    /// Parallel worker count.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct ResumeArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Checkpoint to resume from; defaults to checkpoint.bin in the
    /// configured output directory.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Resume even if the checkpoint was written by a different config.
    #[arg(long, default_value_t = false)]
    force: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonConfig,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.common.resolve()?;
            print_plan(&cfg);
            let summary = driver::run(&cfg)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Sweep(args) => {
            let cfg = args.common.resolve()?;
            let values: Vec<f64> = args
                .values
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| driver::ConfigError::BadOverride(format!("value '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            println!(
                "sweeping {} over {:?} with {} worker(s)",
                args.axis, values, args.workers
            );
            let summary = driver::sweep(&cfg, &args.axis, &values, args.workers)?;
            for o in &summary.outcomes {
                match &o.result {
                    Ok(s) => println!(
                        "  {} = {:<12} ok    {} rows in {:.1}s -> {}",
                        args.axis,
                        o.value,
                        s.rows_written,
                        s.elapsed_seconds,
                        o.dir.display()
                    ),
                    Err(e) => println!("  {} = {:<12} FAILED: {e}", args.axis, o.value),
                }
            }
            println!("index: {}", summary.index_path.display());
            let code = summary.exit_code();
            if code != 0 {
                std::process::exit(code as i32);
            }
            Ok(())
        }
        Command::Resume(args) => {
            let cfg = args.common.resolve()?;
            let checkpoint = args
                .checkpoint
                .unwrap_or_else(|| cfg.output_dir.join("checkpoint.bin"));
            println!("resuming from {}", checkpoint.display());
            let summary = driver::resume(&cfg, &checkpoint, args.force)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Validate(args) => {
            let cfg = args.common.resolve()?;
            println!("# configuration is valid; resolved form:");
            print!("{}", cfg.resolved_toml());
            println!("# config_hash = {}", cfg.hash_hex());
            Ok(())
        }
    }
}

fn print_plan(cfg: &RunConfig) {
    println!(
        "run '{}': n_fock={}, frame={}, t_final={}, stride={}, dissipation={}",
        cfg.label,
        cfg.hilbert.n_fock,
        cfg.integrator.frame,
        cfg.integrator.t_final,
        cfg.integrator.sample_stride,
        cfg.dissipation_on
    );
    println!("output: {}", cfg.output_dir.display());
}

fn print_summary(summary: &driver::RunSummary) {
    println!(
        "done: {} rows in {:.1}s -> {}",
        summary.rows_written,
        summary.elapsed_seconds,
        summary.csv_path.display()
    );
    if let Some(rec) = &summary.final_record {
        println!(
            "final sample t={}: P_e={:.4}, n_mean={:.4}, S_L={:.4}, F_ph={:.4}, r={}, M_av={:.4}, M_opt={:.4}",
            rec.t,
            rec.p_e,
            rec.n_mean,
            rec.s_l,
            rec.f_ph,
            rec.r.map(|r| format!("{r:.4}")).unwrap_or_else(|| "n/a".into()),
            rec.m_av,
            rec.m_opt
        );
    }
}
