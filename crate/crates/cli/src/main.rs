use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hamsim_cli::{analyze, hamgen, parse_axis, sweep, AnalyzeOptions, CliError, CliResult};
use hamsim_core::io::ReportFormat;

#[derive(Parser)]
#[command(name = "hamsim", version, about = "Hamiltonian simulation resource analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Structured,
    Tabular,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Structured => ReportFormat::Structured,
            FormatArg::Tabular => ReportFormat::Tabular,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the Hamiltonian files described by a config.
    Hamgen {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Set a config key, e.g. `hamiltonian.model.sites=4`.
        #[arg(long = "override", value_name = "K=V")]
        overrides: Vec<String>,
    },
    /// Encode, build and analyze the algorithm described by a config.
    Analyze {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long = "override", value_name = "K=V")]
        overrides: Vec<String>,
        /// Seed for random term orderings.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run a template config over a grid of parameter values.
    Sweep {
        template: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// One grid axis, e.g. `encoding.steps=4,8,16`. Repeatable.
        #[arg(long = "grid", value_name = "K=V1,V2,...")]
        grid: Vec<String>,
        /// Maximum concurrent points (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Hamgen { config, out, overrides } => {
            let o = hamgen(&config, &out, &overrides)?;
            for s in &o.stages {
                let state = if s.reused { "reused" } else { "computed" };
                for p in &s.outputs {
                    println!("{}: {state} {}", s.stage, p.display());
                }
            }
        }
        Command::Analyze {
            config,
            out,
            overrides,
            seed,
            format,
        } => {
            let opts = AnalyzeOptions {
                overrides,
                seed,
                format: format.map(Into::into),
            };
            let o = analyze(&config, &out, &opts)?;
            println!("{}", o.path.display());
        }
        Command::Sweep {
            template,
            out,
            grid,
            jobs,
        } => {
            let axes = grid.iter().map(|g| parse_axis(g)).collect::<CliResult<Vec<_>>>()?;
            if jobs == Some(0) {
                return Err(CliError::Config("--jobs must be at least 1".into()));
            }
            let o = sweep(&template, &axes, &out, jobs)?;
            println!("{} points, table at {}", o.points.len(), o.table_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
