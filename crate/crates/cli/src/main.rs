mod auth;
mod entropy;
mod graph;
mod kdf;
mod report;
mod sim;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use report::{Output, Verdict};

/// Block-local key derivation, disperser graphs, min-entropy certificates
/// and leakage-game simulations.
#[derive(Parser)]
#[command(name = "brmkdf", version, arg_required_else_help = true)]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Suppress the summary on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact min-entropy analysis of a distribution fixture.
    #[command(subcommand)]
    Entropy(entropy::EntropyCmd),
    /// Generate or verify disperser graphs.
    #[command(subcommand)]
    Graph(graph::GraphCmd),
    /// Derive key blocks from a data file.
    #[command(subcommand)]
    Kdf(kdf::KdfCmd),
    /// Merkle commitments and proofs over a derived key.
    #[command(subcommand)]
    Auth(auth::AuthCmd),
    /// Monte Carlo leakage experiments.
    #[command(subcommand)]
    Sim(sim::SimCmd),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    if let Some(t) = cli.threads {
        anyhow::ensure!(t > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let out = Output::new(cli.quiet);
    match cli.command {
        Command::Entropy(c) => entropy::run(c, &out),
        Command::Graph(c) => graph::run(c, &out),
        Command::Kdf(c) => kdf::run(c, &out),
        Command::Auth(c) => auth::run(c, &out),
        Command::Sim(c) => sim::run(c, &out),
    }
}
