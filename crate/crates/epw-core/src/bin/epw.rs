use clap::{Args, Parser, Subcommand};
use epw_core::config::ScenarioConfig;
use epw_core::scenarios::{self, RunOptions};
use epw_core::{EpwError, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "epw", version, about = "Evanescent plane-wave experiments in the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Allows runs beyond the desk-scale cost guard.
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Residual and coefficient norm for each spherical wave up to ell_max.
    ModeSweep {
        #[command(flatten)]
        common: Common,
        /// Sweep every order m, not only m = 0.
        #[arg(long)]
        all_m: bool,
    },
    /// Convergence on a random solution surrogate.
    Surrogate {
        #[command(flatten)]
        common: Common,
    },
    /// Fundamental-solution target: P sweep or source-distance sweep.
    Fundamental {
        #[command(flatten)]
        common: Common,
    },
    /// Fundamental-solution P sweep on a cube or tetrahedron.
    Geometry {
        #[command(flatten)]
        common: Common,
    },
    /// Singular values of the sampling matrix for each P.
    SingularValues {
        #[command(flatten)]
        common: Common,
    },
    /// Optimizes an extremal point system and writes it as a point file.
    Extremal {
        #[arg(short = 'L', long = "degree")]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validates a point file and prints a JSON report.
    ValidatePoints {
        path: PathBuf,
    },
}

fn load(common: &Common) -> Result<(ScenarioConfig, RunOptions)> {
    let mut cfg = ScenarioConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok((cfg, RunOptions { out_dir: common.out.clone(), paper_scale: common.paper_scale }))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| EpwError::Io(e.into()))
}

fn run(cli: Cli) -> Result<()> {
    let written = match cli.command {
        Command::ModeSweep { common, all_m } => {
            let (cfg, opts) = load(&common)?;
            scenarios::cmd_mode_sweep(&cfg, &opts, all_m)?
        }
        Command::Surrogate { common } => {
            let (cfg, opts) = load(&common)?;
            scenarios::cmd_surrogate(&cfg, &opts)?
        }
        Command::Fundamental { common } => {
            let (cfg, opts) = load(&common)?;
            scenarios::cmd_fundamental(&cfg, &opts)?
        }
        Command::Geometry { common } => {
            let (cfg, opts) = load(&common)?;
            scenarios::cmd_geometry(&cfg, &opts)?
        }
        Command::SingularValues { common } => {
            let (cfg, opts) = load(&common)?;
            scenarios::cmd_singular_values(&cfg, &opts)?
        }
        Command::Extremal { degree, seed, out } => {
            let report = scenarios::cmd_extremal(degree, seed, &out)?;
            println!("{}", to_json(&report)?);
            vec![out]
        }
        Command::ValidatePoints { path } => {
            let report = scenarios::cmd_validate_points(&path)?;
            println!("{}", to_json(&report)?);
            Vec::new()
        }
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("epw: {e}");
            ExitCode::from(1)
        }
    }
}
