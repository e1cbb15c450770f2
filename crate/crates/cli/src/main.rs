use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maser_cli::{emit_outputs, run_scenario, CliError, ScenarioSpec, BUNDLED};

#[derive(Parser)]
#[command(
    name = "maser",
    version,
    about = "Spin-driven phonon maser simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled scenario or a scenario file.
    Run {
        /// Bundled scenario name or path to a scenario file.
        scenario: String,
        /// Output directory (default: out/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the Fock cutoff.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Override the seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the brute-force validation suite.
    Verify {
        #[arg(long, default_value_t = 40)]
        dim: usize,
    },
    /// List bundled scenarios.
    ListScenarios,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            cutoff,
            seed,
        } => {
            let mut spec = ScenarioSpec::load(&scenario)?;
            if let Some(c) = cutoff {
                spec = spec.with_cutoff(c)?;
            }
            if let Some(s) = seed {
                spec = spec.with_seed(s);
            }
            let dir = out.unwrap_or_else(|| PathBuf::from("out").join(&spec.name));
            let bundle = run_scenario(&spec)?;
            for path in emit_outputs(&bundle, &dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Verify { dim } => {
            if !(2..=maser_core::oracle::MAX_ORACLE_DIM).contains(&dim) {
                return Err(CliError::Config(format!(
                    "--dim must be in 2..={}, got {dim}",
                    maser_core::oracle::MAX_ORACLE_DIM
                )));
            }
            let report = maser_core::verify(dim)?;
            for c in &report.checks {
                println!(
                    "{} {:<52} value {:.3e} tolerance {:.1e}{}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance,
                    c.detail
                        .as_deref()
                        .map(|d| format!(" ({d})"))
                        .unwrap_or_default()
                );
            }
            if report.passed() {
                Ok(())
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                Err(CliError::Numeric(maser_core::Error::Consistency(format!(
                    "{failed} oracle checks failed"
                ))))
            }
        }
        Command::ListScenarios => {
            for (name, text) in BUNDLED {
                let desc = ScenarioSpec::parse(text)
                    .map(|s| s.description)
                    .unwrap_or_default();
                println!("{name:<8} {desc}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
