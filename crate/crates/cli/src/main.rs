//! `mmrelay`: evaluate two-way relay spectral efficiency and write CSV.
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use mmrelay::check::{self_check, CheckOptions};
use mmrelay::config_file::ExperimentConfig;
use mmrelay::experiment::{parse_evaluators, parse_grid, run, summary, Command, RunOptions, SweepVar};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Exact, approximate and limit SE at the configured M and N
    Report,
    /// Sweep one variable (see --var)
    Sweep,
    /// SE versus M for N = 2 and 5 with fixed user and relay power
    Fig1,
    /// Finite-limit scaling cases with their limit lines
    Fig2,
    /// Scaling cases whose SE decays to zero
    Fig3,
    /// SE versus M for K = 3, 5, 10 dB under p = E/M
    Fig4,
    /// Run the built-in consistency checks
    Check,
}

#[derive(Parser, Debug)]
#[command(name = "mmrelay", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment configuration (`key = value` lines)
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo trials per point
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Sweep variable: M, N, K_dB, alpha, epsilon or gamma
    #[arg(long)]
    var: Option<String>,
    /// Comma-separated grid, overriding the command default
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated evaluators: exact, approx, limit
    #[arg(long)]
    eval: Option<String>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let command = match cli.command {
        Cmd::Check => {
            let mut opts = CheckOptions {
                threads: cli.threads,
                ..Default::default()
            };
            opts.seed = cli.seed.unwrap_or(opts.seed);
            opts.trials = cli.trials.unwrap_or(opts.trials);
            let report = self_check(&opts);
            println!("{report}");
            return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) };
        }
        Cmd::Report => Command::Report,
        Cmd::Sweep => Command::Sweep,
        Cmd::Fig1 => Command::Fig1,
        Cmd::Fig2 => Command::Fig2,
        Cmd::Fig3 => Command::Fig3,
        Cmd::Fig4 => Command::Fig4,
    };

    let Some(path) = cli.config else {
        return fail(format!("`{}` needs --config <path>", command.as_str()));
    };
    let cfg = match ExperimentConfig::load(&path) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    let mut opts = RunOptions {
        seed: cli.seed,
        trials: cli.trials,
        threads: cli.threads,
        ..Default::default()
    };
    let parsed = (|| {
        opts.variable = cli.var.as_deref().map(str::parse::<SweepVar>).transpose()?;
        opts.grid = cli.grid.as_deref().map(parse_grid).transpose()?;
        opts.evaluators = cli.eval.as_deref().map(parse_evaluators).transpose()?;
        Ok::<_, mmrelay::experiment::ExperimentError>(())
    })();
    if let Err(e) = parsed {
        return fail(e);
    }

    match run(command, &cfg, &opts, &cli.out) {
        Ok(artifacts) => {
            print!("{}", summary(&artifacts));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
