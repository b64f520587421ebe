use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlsqp::commands::{self, exit_code, write_file, EXIT_CONFIG};
use nlsqp::config::RunConfig;
use nlsqp::CliError;

#[derive(Parser)]
#[command(name = "nlsqp", version, about = "Construct and verify quasi-periodic NLS solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Non-intersection, non-spiral, rank and one-dimensional checks.
    Check {
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gate on the conditions, run the iteration, write report.toml and solution.txt.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lattice residual, collocation residual and split-step drift of a stored solution.
    Verify {
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Excision fractions and Diophantine margins over random amplitudes.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn samples_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    out.with_file_name(format!("{stem}-samples.csv"))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Check { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let o = commands::check(&cfg)?;
            emit(&o.report, out.as_deref())?;
            Ok(o.code)
        }
        Command::Solve { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let (o, solution) = commands::solve_command(&cfg)?;
            write_file(&out.join("report.toml"), &o.report)?;
            write_file(&out.join("config.toml"), &cfg.to_toml())?;
            if let Some(s) = solution {
                write_file(&out.join("solution.txt"), &s)?;
            }
            eprintln!("wrote {}", out.display());
            Ok(o.code)
        }
        Command::Verify { config, solution, out } => {
            let cfg = RunConfig::load(&config)?;
            let text = std::fs::read_to_string(&solution)?;
            let o = commands::verify_command(&cfg, &text)?;
            emit(&o.report, out.as_deref())?;
            Ok(o.code)
        }
        Command::Sweep { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let (table, samples) = commands::sweep_command(&cfg)?;
            write_file(&out, &table)?;
            write_file(&samples_path(&out), &samples)?;
            print!("{table}");
            Ok(0)
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("NLSQP_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("NLSQP_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = init_threads().and_then(|_| run(cli)).unwrap_or_else(|e| {
        eprintln!("nlsqp: {e}");
        exit_code(&e)
    });
    debug_assert!((0..=EXIT_CONFIG).contains(&code));
    ExitCode::from(code as u8)
}
