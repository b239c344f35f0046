use std::path::PathBuf;
use std::process::ExitCode;

use anosov_lab::commands::{run, RunOptions, Subcommand};
use clap::{Args, Parser};

#[derive(Parser)]
#[command(name = "anosov-lab", version, about = "Experiments on Anosov endomorphisms of the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (default: anosov-lab-out/<subcommand>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Certify hyperbolicity with invariant cone fields.
    VerifyAnosov(Common),
    /// Enumerate every pre-history of a point up to a depth.
    PreimageTree(Common),
    /// Unstable-direction censuses at random points.
    Dispersion(Common),
    /// Classify the map as special or non-special.
    DichotomyScan(Common),
    /// Angle decay between unstable directions under the derivative.
    AngleDecay(Common),
    /// Unstable Lyapunov exponents against the linear value.
    LyapunovCensus(Common),
    /// Quasi-isometry of lifted unstable leaves.
    QuasiIso(Common),
    /// Birkhoff averages from many starting points.
    ErgodicTest(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, c) = match cli.command {
        Command::VerifyAnosov(c) => (Subcommand::VerifyAnosov, c),
        Command::PreimageTree(c) => (Subcommand::PreimageTree, c),
        Command::Dispersion(c) => (Subcommand::Dispersion, c),
        Command::DichotomyScan(c) => (Subcommand::DichotomyScan, c),
        Command::AngleDecay(c) => (Subcommand::AngleDecay, c),
        Command::LyapunovCensus(c) => (Subcommand::LyapunovCensus, c),
        Command::QuasiIso(c) => (Subcommand::QuasiIso, c),
        Command::ErgodicTest(c) => (Subcommand::ErgodicTest, c),
    };
    let opts = RunOptions { config: c.config, seed: c.seed, threads: c.threads, out: c.out };
    match run(sub, &opts) {
        Ok(outcome) => {
            let verdict = match outcome.verdict {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "done",
            };
            match &outcome.classification {
                Some(l) => println!("{}: {verdict} ({l}); results in {}", sub.name(), outcome.dir.display()),
                None => println!("{}: {verdict}; results in {}", sub.name(), outcome.dir.display()),
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("anosov-lab {}: {e}", sub.name());
            ExitCode::from(e.exit_code())
        }
    }
}
