use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gradem_cli::config::CONFIG_HELP;
use gradem_cli::experiment::{run_gradient_check, GradientCheckSpec, WORKERS_ENV};
use gradem_cli::{compute_bounds, run_experiment, validate_config};
use gradem_core::datagen::{write_csv, write_records, RecordHeader};
use gradem_core::{generate, GenSpec};

#[derive(Parser)]
#[command(
    name = "gradem",
    version,
    about = "Gradient EM experiments on agnostic mixtures"
)]
struct Cli {
    /// Worker threads for repetitions (defaults to all cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment; exits 1 when an enabled check fails.
    #[command(after_long_help = CONFIG_HELP)]
    Run { config: PathBuf },
    /// Generate a dataset from a TOML generator spec.
    Gen {
        genspec: PathBuf,
        /// Output file; `.csv` writes CSV, anything else line records.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare analytic gradients with central differences.
    ///
    /// The TOML spec takes the [loss] keys plus d = 3, samples = 100,
    /// seed = 0, h = 1e-5, tolerance = 1e-5.
    CheckGradients { loss_spec: PathBuf },
    /// Print the theorem quantities for a config without running EM.
    #[command(after_long_help = CONFIG_HELP)]
    Bounds { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.workers {
        std::env::set_var(WORKERS_ENV, n.to_string());
    }
    match cli.command {
        Command::Run { config } => {
            let config = validate_config(&read(&config)?)?;
            let report = run_experiment(&config)?;
            for r in &report.repetitions {
                println!(
                    "rep {:>3}  seed {:>6}  final {:.3e}  rate {}  bound {}",
                    r.repetition,
                    r.seed,
                    r.final_max_distance(),
                    r.fitted_rate.map_or("-".into(), |v| format!("{v:.4}")),
                    r.bound.map_or("-".into(), |v| format!("{v:.3e}")),
                );
            }
            if let Some(f) = report.success_frequency {
                println!("success frequency {f:.3}");
            }
            for f in &report.failures {
                eprintln!("FAILED {f}");
            }
            println!("wrote {}", config.output_dir.display());
            Ok(report.checks_passed())
        }
        Command::Gen { genspec, output } => {
            let spec: GenSpec = toml::from_str(&read(&genspec)?)?;
            let (data, _) = generate(&spec)?;
            let file = fs::File::create(&output)
                .with_context(|| format!("creating {}", output.display()))?;
            if output
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
            {
                write_csv(&data, file)?;
            } else {
                let header = RecordHeader::new(spec.d, spec.n, Some(spec.kind), Some(spec.seed));
                write_records(&data, &header, file)?;
            }
            Ok(true)
        }
        Command::CheckGradients { loss_spec } => {
            let spec: GradientCheckSpec = toml::from_str(&read(&loss_spec)?)?;
            let check = run_gradient_check(&spec)?;
            println!("{}", serde_json::to_string_pretty(&check)?);
            Ok(check.passed())
        }
        Command::Bounds { config } => {
            let config = validate_config(&read(&config)?)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&compute_bounds(&config)?)?
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
