use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pathwise::experiment::{run, ExperimentConfig, Verb};
use pathwise::Error;

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "PATHWISE_OUT";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Write the path and its partition ladder.
    Generate,
    /// Add quadratic variation and integral curves per level.
    Integrate,
    /// Add the Itô rough path export.
    Roughpath,
    /// Run the configured checks.
    Verify,
    /// Full multi-level convergence report.
    Study,
}

impl From<Command> for Verb {
    fn from(c: Command) -> Self {
        match c {
            Command::Generate => Verb::Generate,
            Command::Integrate => Verb::Integrate,
            Command::Roughpath => Verb::Roughpath,
            Command::Verify => Verb::Verify,
            Command::Study => Verb::Study,
        }
    }
}

/// Pathwise integration experiments on sampled paths.
///
/// Exit status: 0 when every requested check passes, 1 when a check fails,
/// 2 on invalid input.
#[derive(Debug, Parser)]
#[command(name = "pathwise", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides the config and $PATHWISE_OUT.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Path seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn fail(err: &Error) -> ExitCode {
    let report = serde_json::json!({"error": {"code": err.code(), "message": err.to_string()}});
    eprintln!("{report}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match ExperimentConfig::from_file(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let out = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pathwise-out"));
    match run(&cfg, cli.command.into(), &out) {
        Ok(summary) => {
            let failed: Vec<&str> = summary
                .checks
                .iter()
                .filter(|(_, c)| !c.verdict.is_pass())
                .map(|(k, _)| k.as_str())
                .collect();
            println!("{}", out.join("summary.json").display());
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed checks: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}
