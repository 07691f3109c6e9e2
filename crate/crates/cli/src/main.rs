use std::path::{Path, PathBuf};
use std::process::ExitCode;

use benard_cli::config::{ExperimentConfig, GradP0};
use benard_cli::stages::{self, Stage};
use benard_cli::CliError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "benard",
    version,
    about = "Boussinesq convection and two-scale homogenization experiments"
)]
struct Cli {
    /// Experiment config (flat key=value); defaults apply without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Box run with snapshots and diagnostics.csv.
    Run,
    /// ε-scaled runs for a strictly decreasing ε list.
    Sweep {
        /// Comma-separated ε values; overrides the config's `eps`.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Cell problems on the configured x-lattice.
    Cell {
        /// `zero` or a CSV of `i,j,g1,g2` rows.
        #[arg(long)]
        gradp0: Option<String>,
    },
    /// Two-scale error report from sweep and cell outputs.
    Homogenize {
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long)]
        cell: Option<PathBuf>,
        /// Test-function file; the standard suite is used without one.
        #[arg(long)]
        phis: Option<PathBuf>,
    },
    /// Mean-field outputs from cell outputs.
    Meanfield {
        #[arg(long)]
        cell: Option<PathBuf>,
    },
    /// Closed-form constants and trajectory monitors.
    Bounds {
        /// Run directory holding diagnostics.csv.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Every stage in order, then MANIFEST.txt.
    Pipeline,
    /// Snapshot (or directory of snapshots) to CSV.
    ExportCsv { input: PathBuf },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn revalidate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let errs = cfg.validate();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(benard_cli::ConfigErrors(errs)))
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = load_config(cli)?;
    let out = cfg.out.clone();
    let staged = |stage: Stage, r: Result<Vec<PathBuf>, CliError>| -> Result<(), CliError> {
        let files = r.map_err(|e| e.in_stage(stage))?;
        for f in &files {
            log::debug!("wrote {}", f.display());
        }
        println!("{stage}: {} files below {}", files.len(), out.display());
        Ok(())
    };
    match &cli.cmd {
        Cmd::Run => staged(Stage::Run, stages::run(&cfg, &out)),
        Cmd::Sweep { eps } => {
            if let Some(list) = eps {
                let parsed: Result<Vec<f64>, _> = list.split(',').map(|s| s.trim().parse()).collect();
                cfg.eps = parsed.map_err(|_| CliError::Usage(format!("--eps: cannot parse `{list}`")))?;
                revalidate(&cfg)?;
            }
            staged(Stage::Sweep, stages::sweep(&cfg, &cfg.eps, &out))
        }
        Cmd::Cell { gradp0 } => {
            if let Some(g) = gradp0 {
                cfg.gradp0 = if g == "zero" {
                    GradP0::Zero
                } else {
                    GradP0::File(PathBuf::from(g))
                };
                revalidate(&cfg)?;
            }
            staged(Stage::Cell, stages::cell(&cfg, &out))
        }
        Cmd::Homogenize { sweep, cell, phis } => {
            if let Some(p) = phis {
                cfg.phis = Some(p.clone());
                revalidate(&cfg)?;
            }
            let sweep = sweep.clone().unwrap_or_else(|| out.join("sweep"));
            let cell = cell.clone().unwrap_or_else(|| out.join("cell"));
            staged(Stage::Homogenize, stages::homogenize(&cfg, &sweep, &cell, &out))
        }
        Cmd::Meanfield { cell } => {
            let cell = cell.clone().unwrap_or_else(|| out.join("cell"));
            staged(Stage::Meanfield, stages::meanfield(&cfg, &cell, &out))
        }
        Cmd::Bounds { trajectory } => {
            let dir = trajectory
                .clone()
                .or_else(|| Some(out.join("run")).filter(|d| d.join("diagnostics.csv").is_file()));
            staged(Stage::Bounds, stages::bounds(&cfg, dir.as_deref(), &out))
        }
        Cmd::Pipeline => {
            let o = stages::pipeline_full(&cfg, &out)?;
            println!(
                "pipeline: {} artifacts, manifest {}",
                o.files.len(),
                o.manifest.display()
            );
            Ok(())
        }
        Cmd::ExportCsv { input } => {
            let dest = cli.out.clone().unwrap_or_else(|| default_csv_dir(input));
            staged(Stage::ExportCsv, stages::export_csv(input, &dest))
        }
    }
}

fn default_csv_dir(input: &Path) -> PathBuf {
    if input.is_dir() {
        input.join("csv")
    } else {
        input.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
