use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robustness_law_lab::config::KvConfig;
use robustness_law_lab::runner::commands::{self, CommandOutput};
use robustness_law_lab::LabError;

#[derive(Parser)]
#[command(name = "robustness-law-lab", version, about = "Size/robustness tradeoff laboratory")]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file for the command's artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Draw a labelled dataset.
    Sample,
    /// Build a sum-of-bumps interpolator, optionally projected.
    Interpolate,
    /// Lower and upper Lipschitz bounds for a saved model.
    Certify,
    /// Train a network below the noise level.
    Train,
    /// Evaluate the closed-form bounds.
    Bounds,
    /// Sweep parameter budgets and record Lipschitz constants.
    Tradeoff,
    /// Run the concentration checks.
    Isocheck,
    /// Estimate the Rademacher complexity of a finite class.
    Rad,
    /// Slab measure and unique sign-pattern cells on the sphere.
    Appendix,
}

fn load_config(cli: &Cli) -> Result<KvConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(path) => KvConfig::load(path)?,
        None => KvConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim());
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<CommandOutput, LabError> {
    let cfg = load_config(cli)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Sample => commands::sample(&cfg, out),
        Command::Interpolate => commands::interpolate(&cfg, out),
        Command::Certify => commands::certify(&cfg),
        Command::Train => commands::train(&cfg, out),
        Command::Bounds => commands::bounds(&cfg),
        Command::Tradeoff => commands::tradeoff(&cfg, out),
        Command::Isocheck => commands::isocheck(&cfg),
        Command::Rad => commands::rad(&cfg),
        Command::Appendix => commands::appendix(&cfg),
    }
}

fn exit_code(err: &LabError) -> u8 {
    match err {
        LabError::Construction(_) | LabError::Training { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            let body = if cli.json {
                match serde_json::to_string_pretty(&output.report) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                output.text.trim_end().to_string()
            };
            if !body.is_empty() {
                // a closed pipe (e.g. `| head`) is not an error
                let _ = writeln!(std::io::stdout().lock(), "{body}");
            }
            for note in &output.notes {
                eprintln!("note: {note}");
            }
            if output.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
