use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use weighted_transfer::config::LoadedConfig;
use weighted_transfer::runner::{run, Command};

#[derive(Parser)]
#[command(name = "wtransfer", version, about = "Transfer line operators to flows and check weighted inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for `<command>.json` and `<command>.csv`; stdout gets the JSON otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// A_p, A_1 and A_inf constants of a line weight, A_p' and A_1' of an orbit weight.
    CheckWeight(Common),
    /// Evaluate an operator (line or transferred) at points.
    Apply(Common),
    /// Estimate ergodic constants and compare them with matched line constants.
    Verify(Common),
    /// Estimated constant as a function of the truncation parameter.
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Cmd::CheckWeight(c) => (Command::CheckWeight, c),
        Cmd::Apply(c) => (Command::Apply, c),
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
    };
    let mut cfg = match LoadedConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", located(&common.config, &e));
            return ExitCode::from(2);
        }
    };
    if let Some(t) = common.threads {
        cfg.config.sampling.threads = Some(t);
    }
    if let Some(s) = common.seed {
        cfg.config.sampling.seed = s;
    }
    let out = match run(cmd, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}", located(&common.config, &e));
            return ExitCode::from(2);
        }
    };
    match &common.out {
        Some(dir) => {
            let write = std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join(format!("{}.json", cmd.name())), &out.json))
                .and_then(|_| std::fs::write(dir.join(format!("{}.csv", cmd.name())), &out.csv));
            if let Err(e) = write {
                eprintln!("{}:1:1: cannot write output: {e}", dir.display());
                return ExitCode::from(2);
            }
            eprint!("{}", out.summary);
        }
        None => print!("{}", out.json),
    }
    ExitCode::from(out.exit_code as u8)
}

/// Positioned errors already read `path:line:col: message`.
fn located(path: &std::path::Path, e: &weighted_transfer::Error) -> String {
    match e {
        weighted_transfer::Error::Config { .. } => e.to_string(),
        _ => format!("{}:1:1: {e}", path.display()),
    }
}
