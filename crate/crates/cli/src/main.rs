use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rankgame_cli::{
    cmd_check_model, cmd_describe, cmd_empirics, cmd_metrics, cmd_rounds, cmd_sample, cmd_verify, load_model_config,
    CliError, CommandOutput, ExperimentConfig, RunOptions, DEFAULT_ECDF_GRID, DEFAULT_GRID,
};

#[derive(Parser)]
#[command(name = "rankgame", version, about = "Creator-competition simulator under engagement, quality and random ranking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed for all random streams (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count (default 100000).
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. 1 is single-threaded and byte-reproducible.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, RunOptions), CliError> {
        let cfg = ExperimentConfig::load(&self.config)?;
        if self.threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        let opts = RunOptions { seed: self.seed, samples: self.samples, threads: self.threads, out: self.out.clone() };
        Ok((cfg, opts))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Audit the model assumptions on a grid.
    CheckModel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw contents from the configured equilibrium.
    Sample(Common),
    /// Print the equilibrium components as JSON.
    Describe(Common),
    /// Best-response check of the configured equilibrium.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Candidates per curve.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Quality, engagement and welfare estimates.
    Metrics(Common),
    /// Per-round play log.
    Rounds(Common),
    /// Spearman table, ECDFs and dominance matrices for feed data.
    Empirics {
        /// CSV with header feed,genre,angriness,favorites.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluation points for the dominance matrices.
        #[arg(long, default_value_t = DEFAULT_ECDF_GRID)]
        grid: usize,
    },
}

fn run(cmd: Command) -> Result<CommandOutput, CliError> {
    match cmd {
        Command::CheckModel { config, out } => cmd_check_model(&load_model_config(&config)?, out),
        Command::Sample(c) => {
            let (cfg, opts) = c.load()?;
            cmd_sample(&cfg, &opts)
        }
        Command::Describe(c) => {
            let (cfg, opts) = c.load()?;
            cmd_describe(&cfg, &opts)
        }
        Command::Verify { common, grid } => {
            let (cfg, opts) = common.load()?;
            cmd_verify(&cfg, grid, &opts)
        }
        Command::Metrics(c) => {
            let (cfg, opts) = c.load()?;
            cmd_metrics(&cfg, &opts)
        }
        Command::Rounds(c) => {
            let (cfg, opts) = c.load()?;
            cmd_rounds(&cfg, &opts)
        }
        Command::Empirics { data, out, grid } => cmd_empirics(&data, grid, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(cli.command).and_then(|out| out.emit().map(|()| out.exit_code()));
    match result {
        Ok(code) => {
            if code == 3 {
                eprintln!("verification failed: best-response gap above threshold");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("rankgame: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
