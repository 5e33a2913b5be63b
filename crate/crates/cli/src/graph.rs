use std::path::PathBuf;

use brm_kdf::disperser::{check_disperser, sample_regular_graph, BipartiteRegularGraph, CheckMode, DisperserWitness};
use clap::Subcommand;
use serde::Serialize;

use crate::report::{Output, ReportPath, Verdict};

#[derive(Subcommand)]
pub enum GraphCmd {
    /// Sample a seeded right-regular graph and write it as a DSPG file.
    Gen {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        seed: u64,
        /// Graph file to write; the report goes to standard output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the (K, L) disperser property.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        /// Enumerate every K-subset (the default).
        #[arg(long, conflicts_with = "trials")]
        exhaustive: bool,
        /// Sample this many K-subsets instead.
        #[arg(long)]
        trials: Option<u64>,
        /// Seed for sampled checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportPath,
    },
}

#[derive(Serialize)]
struct GenReport {
    ell: usize,
    degree: usize,
    seed: u64,
    file: PathBuf,
    content_hash: String,
}

#[derive(Serialize)]
struct CheckReport {
    file: PathBuf,
    ell: usize,
    degree: usize,
    content_hash: String,
    #[serde(flatten)]
    witness: DisperserWitness,
    verdict: Verdict,
}

pub fn run(cmd: GraphCmd, out: &Output) -> anyhow::Result<Verdict> {
    match cmd {
        GraphCmd::Gen {
            ell,
            degree,
            seed,
            out: file,
        } => {
            let g = sample_regular_graph(ell, degree, seed)?;
            g.write_file(&file)?;
            out.note(format!("wrote ℓ = {ell}, d = {degree} graph to {}", file.display()));
            let report = GenReport {
                ell,
                degree,
                seed,
                file,
                content_hash: g.content_hash(),
            };
            out.emit(&ReportPath::default(), "graph gen", &report, Verdict::Pass)
        }
        GraphCmd::Check {
            input,
            k,
            l,
            exhaustive: _,
            trials,
            seed,
            report: path,
        } => {
            let g = BipartiteRegularGraph::read_file(&input)?;
            let mode = match trials {
                Some(trials) => CheckMode::Sampled { trials, seed },
                None => CheckMode::Exhaustive { parallel: true },
            };
            let witness = check_disperser(&g, k, l, mode)?;
            let verdict = Verdict::from_bool(witness.pass);
            match &witness.counterexample {
                Some(s) => out.note(format!("({k}, {l}) fails: S = {s:?}")),
                None => out.note(format!("({k}, {l}) holds")),
            }
            let report = CheckReport {
                file: input,
                ell: g.ell(),
                degree: g.degree(),
                content_hash: g.content_hash(),
                witness,
                verdict,
            };
            out.emit(&path, "graph check", &report, verdict)
        }
    }
}
