use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tlspr::experiment::{
    run_error_analysis, run_sweep, solve_single, synthesize, AnalysisMode, ExperimentConfig, SolveConfig, SolveInputs,
};
use tlspr::{selftest, Error, Mode};

/// Total least squares phase retrieval experiments.
#[derive(Parser)]
#[command(name = "tlspr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "TLSPR_WORKERS")]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tpr,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Tls,
    Ls,
}

#[derive(Subcommand)]
enum Command {
    /// Write a ground truth, sensing vectors and measurements to a directory.
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "tpr")]
        format: Format,
    },
    /// Run one solver on an ensemble and measurement file.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        /// Ground truth, for reporting the relative distance.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
    },
    /// Compare TLS and LS over the configured ratios, SNRs and trials.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// First-order error study in real mode.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in numerical checks.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn experiment_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output_path = Some(o.clone());
    }
    if common.workers.is_some() {
        cfg.workers = common.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_path(cfg: &ExperimentConfig) -> Result<&Path, Failure> {
    cfg.output_path
        .as_deref()
        .ok_or_else(|| Failure::Usage("no output path: pass --out or set output_path".into()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synthesize { common, format } => {
            let cfg = experiment_config(&common)?;
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let ext = match format {
                Format::Tpr => "tpr",
                Format::Json => "json",
            };
            let files = synthesize(&cfg, &dir, ext)?;
            println!("signal       {}", files.signal.display());
            println!("ensemble     {}", files.ensemble.display());
            println!("measurements {}", files.measurements.display());
            if let Some((a, y)) = files.clean {
                println!("clean        {} {}", a.display(), y.display());
            }
        }
        Command::Solve {
            common,
            ensemble,
            measurements,
            truth,
            mode,
        } => {
            let mut cfg = match &common.config {
                Some(p) => SolveConfig::load(p)?,
                None => SolveConfig::default(),
            };
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(m) = mode {
                cfg.mode = match m {
                    CliMode::Tls => Mode::Tls,
                    CliMode::Ls => Mode::Ls,
                };
            }
            let out_dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let report = solve_single(
                &SolveInputs {
                    ensemble: &ensemble,
                    measurements: &measurements,
                    truth: truth.as_deref(),
                    out_dir: &out_dir,
                },
                &cfg,
            )?;
            println!(
                "{:?}: {} iterations, converged {}, final objective {:e}",
                report.mode,
                report.iterations,
                report.converged,
                report.final_objective.unwrap_or(f64::NAN)
            );
            if let Some(d) = report.rel_dist {
                println!("rel.dist {d:e}");
            }
        }
        Command::Sweep { common } => {
            let cfg = experiment_config(&common)?;
            let path = output_path(&cfg)?.to_path_buf();
            let out = run_sweep(&cfg)?;
            out.write(&path)?;
            for s in &out.summary {
                println!(
                    "M/N {:>5} meas {:>6} dB sens {:>6} dB: TLS {:.4e} LS {:.4e} diff {:+.3e}",
                    s.ratio, s.meas_snr_db, s.sensing_snr_db, s.mean_rel_dist_tls, s.mean_rel_dist_ls, s.mean_diff
                );
            }
            println!("wrote {}", path.display());
        }
        Command::Analyze { common } => {
            let mut cfg = experiment_config(&common)?;
            if cfg.analysis_mode == AnalysisMode::None {
                cfg.analysis_mode = AnalysisMode::FirstOrder;
            }
            let path = output_path(&cfg)?.to_path_buf();
            let out = run_error_analysis(&cfg)?;
            out.write(&path)?;
            println!("{} records, wrote {}", out.records.len(), path.display());
        }
        Command::Selftest { common } => {
            let cfg = experiment_config(&common)?;
            let results = selftest::run_all(cfg.seed);
            for r in &results {
                println!("{} {:<22} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            if let Some(p) = &common.out {
                std::fs::write(p, serde_json::to_string_pretty(&results).map_err(Error::from)?).map_err(Error::from)?;
            }
            if results.iter().any(|r| !r.passed) {
                return Err(Failure::Run(Error::NotConverged("self-test failed".into())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
