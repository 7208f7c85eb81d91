use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skyforge_cli::{exit, prepare, run_command, verify_command, CliError, Overrides, RunConfig};
use skyforge_core::Algorithm;

#[derive(Parser)]
#[command(name = "skyforge", version, about = "Generate skyline datasets over a pool of tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for an ε-skyline of datasets and write them with a manifest.
    Run(Common),
    /// Search, then check the result against exhaustive enumeration.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Empties the grid before checking (exercises the failure path).
        #[arg(long, hide = true)]
        corrupt_grid: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_length: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: skyforge_core::Error| e.to_string())
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            algorithm: self.algorithm,
            epsilon: self.epsilon,
            max_length: self.max_length,
            budget: self.budget,
            k: self.k,
            alpha: self.alpha,
            theta: self.theta,
            workers: self.workers,
            output: self.output.clone(),
        });
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(c) => {
            let p = prepare(c.load()?)?;
            let r = run_command(&p)?;
            let m = &r.manifest.metadata;
            println!(
                "{} dataset(s), {} valuation(s), termination {}; manifest at {}",
                r.manifest.datasets.len(),
                m.valuations,
                m.termination,
                r.path.display()
            );
            Ok(exit::OK)
        }
        Command::Verify { common, corrupt_grid } => {
            let p = prepare(common.load()?)?;
            let report = verify_command(&p, corrupt_grid)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if report.passed {
                Ok(exit::OK)
            } else {
                Err(CliError::Violations(report.violation_count()))
            }
        }
    }
}

fn main() -> ExitCode {
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("skyforge: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
