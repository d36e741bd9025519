use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use spinbath::config::OutputFormat;
use spinbath::parse_config;
use spinbath::sweep::{run_sweep, SweepOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Run concurrence-trajectory and Zeno sweeps described by a TOML file.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, overriding `output.format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for the sweep.
    #[arg(long)]
    threads: Option<usize>,
    /// Parse and validate the configuration, then exit.
    #[arg(long)]
    validate: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(3);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    if cli.validate {
        println!("{}: ok", cli.config.display());
        return ExitCode::SUCCESS;
    }
    let opts = SweepOptions {
        out_dir: cli.out,
        format: cli.format.map(|f| match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
        threads: cli.threads,
    };
    match run_sweep(&cfg, &opts) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
