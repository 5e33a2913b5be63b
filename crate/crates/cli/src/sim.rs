use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use brm_kdf::disperser::{sample_regular_graph, BipartiteRegularGraph};
use brm_kdf::entropy::parse_fixture;
use brm_kdf::sim::{
    estimate_guessing, estimate_onewayness, run_privacy_simulation, BruteForce, ConstantOutput, DataSampler,
    FirstKeyBlock, GivenData, GuessingAdversary, GuessingGameConfig, GuessingReport, KeyAdversary, LeakBlock,
    LeakBlocksGuesser, LeakOracleGuesser, OnewaynessAdversary, OnewaynessConfig, OnewaynessReport, PrivacyConfig,
    PrivacyReport, RecomputeBlock, RequeryCheater, TableSampler, UniformBlocks, ZeroKnowledgeGuesser,
};
use clap::{Args, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::report::{Output, ReportPath, Verdict};

#[derive(Subcommand)]
pub enum SimCmd {
    /// Two-phase guessing game against scripted guessers.
    Guessing(SimArgs),
    /// How many designated oracle arguments a bounded adversary hits.
    Onewayness(SimArgs),
    /// Distance between real and simulated runs of key-using adversaries.
    Privacy(SimArgs),
}

#[derive(Args)]
pub struct SimArgs {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    report: ReportPath,
}

/// Where `D` is drawn from: uniform blocks, or a fixture table whose
/// coordinates are the blocks.
#[derive(Clone, Debug, Deserialize)]
struct DataSpec {
    n: usize,
    ell: usize,
    /// Relative paths resolve against the config file's directory.
    #[serde(default)]
    fixture: Option<PathBuf>,
}

impl DataSpec {
    fn sampler(&self, base: &Path) -> anyhow::Result<Box<dyn DataSampler>> {
        let Some(f) = &self.fixture else {
            return Ok(Box::new(UniformBlocks {
                n: self.n,
                ell: self.ell,
            }));
        };
        let path = base.join(f);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let bits = u8::try_from(self.n).context("fixture blocks must be at most 8 bits")?;
        let dist = parse_fixture(&text, Some(bits))?;
        if dist.arity() != self.ell {
            bail!("fixture has {} coordinates, config says ℓ = {}", dist.arity(), self.ell);
        }
        Ok(Box::new(TableSampler::new(dist)?))
    }
}

#[derive(Clone, Debug, Deserialize)]
struct GraphSpec {
    degree: usize,
    graph_seed: u64,
}

impl GraphSpec {
    fn build(&self, ell: usize) -> anyhow::Result<BipartiteRegularGraph> {
        Ok(sample_regular_graph(ell, self.degree, self.graph_seed)?)
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Deserialize)]
struct GuessingFile {
    #[serde(flatten)]
    data: DataSpec,
    k1: usize,
    k2: usize,
    lambda_leak: u64,
    /// Declared entropy rate; taken from the sampler when omitted.
    #[serde(default)]
    p: Option<f64>,
    label_bits: usize,
    trials: u64,
    seed: u64,
    #[serde(default = "all_guessers")]
    adversaries: Vec<String>,
}

fn all_guessers() -> Vec<String> {
    ["zero-knowledge", "leak-blocks", "leak-oracle", "requery-cheater"]
        .map(String::from)
        .to_vec()
}

fn guesser(name: &str) -> anyhow::Result<Box<dyn GuessingAdversary>> {
    Ok(match name {
        "zero-knowledge" => Box::new(ZeroKnowledgeGuesser),
        "leak-blocks" => Box::new(LeakBlocksGuesser),
        "leak-oracle" => Box::new(LeakOracleGuesser),
        "requery-cheater" => Box::new(RequeryCheater),
        other => bail!("unknown guessing adversary {other:?}"),
    })
}

#[derive(Serialize)]
struct GuessingOut {
    config: GuessingGameConfig,
    trials: u64,
    seed: u64,
    /// The label-space width stands in for the oracle table size.
    delta_from_label_bits: f64,
    reports: Vec<GuessingReport>,
    verdict: Verdict,
}

#[derive(Deserialize)]
struct OnewaynessFile {
    #[serde(flatten)]
    data: DataSpec,
    #[serde(flatten)]
    graph: GraphSpec,
    lambda: u64,
    query_cap: u64,
    threshold: usize,
    trials: u64,
    seed: u64,
    #[serde(default = "default_owf_adversaries")]
    adversaries: Vec<OwfAdversary>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum OwfAdversary {
    BruteForce { queries: u64 },
    GivenData { count: usize },
}

fn default_owf_adversaries() -> Vec<OwfAdversary> {
    vec![OwfAdversary::BruteForce { queries: u64::MAX }]
}

#[derive(Serialize)]
struct OnewaynessOut {
    config: OnewaynessConfig,
    entropy_rate: f64,
    reports: Vec<OnewaynessReport>,
    verdict: Verdict,
}

#[derive(Deserialize)]
struct PrivacyFile {
    #[serde(flatten)]
    data: DataSpec,
    #[serde(flatten)]
    graph: GraphSpec,
    lambda: u64,
    query_cap: u64,
    #[serde(default)]
    threshold: Option<usize>,
    trials: u64,
    seed: u64,
    /// Largest total-variation distance that still passes.
    #[serde(default = "default_max_distance")]
    max_distance: f64,
    adversaries: Vec<KeyAdversarySpec>,
}

fn default_max_distance() -> f64 {
    0.02
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum KeyAdversarySpec {
    Constant { output_hex: String },
    FirstKeyBlock,
    LeakBlock { index: usize },
    RecomputeBlock { vertex: usize },
}

#[derive(Serialize)]
struct PrivacyOut {
    config: PrivacyConfig,
    max_distance: f64,
    reports: Vec<PrivacyReport>,
    verdict: Verdict,
}

pub fn run(cmd: SimCmd, out: &Output) -> anyhow::Result<Verdict> {
    match cmd {
        SimCmd::Guessing(a) => guessing(a, out),
        SimCmd::Onewayness(a) => onewayness(a, out),
        SimCmd::Privacy(a) => privacy(a, out),
    }
}

fn guessing(args: SimArgs, out: &Output) -> anyhow::Result<Verdict> {
    let file: GuessingFile = load(&args.config)?;
    let sampler = file.data.sampler(&base_dir(&args.config))?;
    let config = GuessingGameConfig {
        n: file.data.n,
        ell: file.data.ell,
        k1: file.k1,
        k2: file.k2,
        lambda_leak: file.lambda_leak,
        p: file.p.unwrap_or_else(|| sampler.entropy_rate()),
        label_bits: file.label_bits,
    };
    config.validate()?;
    let trials = args.trials.unwrap_or(file.trials);
    let seed = args.seed.unwrap_or(file.seed);
    let mut reports = Vec::new();
    for name in &file.adversaries {
        let adv = guesser(name)?;
        let r = estimate_guessing(&config, sampler.as_ref(), adv.as_ref(), trials, seed)?;
        out.note(format!(
            "{:<16} win {:.5} (phase 2 {:.5}) bound {:.3e} {}",
            r.adversary,
            r.win_rate,
            r.phase2_rate,
            r.bound.value,
            if r.consistent { "ok" } else { "EXCEEDED" }
        ));
        reports.push(r);
    }
    let verdict = Verdict::from_bool(reports.iter().all(|r| r.consistent));
    let body = GuessingOut {
        config,
        trials,
        seed,
        delta_from_label_bits: config.label_bits as f64 / config.n as f64,
        reports,
        verdict,
    };
    out.emit(&args.report, "sim guessing", &body, verdict)
}

fn onewayness(args: SimArgs, out: &Output) -> anyhow::Result<Verdict> {
    let file: OnewaynessFile = load(&args.config)?;
    let sampler = file.data.sampler(&base_dir(&args.config))?;
    let graph = file.graph.build(file.data.ell)?;
    let cfg = OnewaynessConfig {
        lambda: file.lambda,
        query_cap: file.query_cap,
        threshold: file.threshold,
        trials: args.trials.unwrap_or(file.trials),
        seed: args.seed.unwrap_or(file.seed),
    };
    let mut reports = Vec::new();
    for spec in &file.adversaries {
        let adv: Box<dyn OnewaynessAdversary> = match *spec {
            OwfAdversary::BruteForce { queries } => Box::new(BruteForce {
                queries: queries.min(cfg.query_cap),
            }),
            OwfAdversary::GivenData { count } => Box::new(GivenData { count }),
        };
        let r = estimate_onewayness(sampler.as_ref(), &graph, adv.as_ref(), &cfg)?;
        out.note(format!(
            "{:<12} rate {:.5} bound {:.3e} max bad {} {}",
            r.adversary,
            r.empirical,
            r.bound.value,
            r.max_bad_indices,
            if r.consistent { "ok" } else { "EXCEEDED" }
        ));
        reports.push(r);
    }
    let verdict = Verdict::from_bool(reports.iter().all(|r| r.consistent));
    let body = OnewaynessOut {
        config: cfg,
        entropy_rate: sampler.entropy_rate(),
        reports,
        verdict,
    };
    out.emit(&args.report, "sim onewayness", &body, verdict)
}

fn privacy(args: SimArgs, out: &Output) -> anyhow::Result<Verdict> {
    let file: PrivacyFile = load(&args.config)?;
    let sampler = file.data.sampler(&base_dir(&args.config))?;
    let graph = file.graph.build(file.data.ell)?;
    let cfg = PrivacyConfig {
        lambda: file.lambda,
        query_cap: file.query_cap,
        threshold: file.threshold,
        trials: args.trials.unwrap_or(file.trials),
        seed: args.seed.unwrap_or(file.seed),
    };
    let mut reports = Vec::new();
    for spec in &file.adversaries {
        let adv: Box<dyn KeyAdversary> = match spec {
            KeyAdversarySpec::Constant { output_hex } => Box::new(ConstantOutput(hex::decode(output_hex)?)),
            KeyAdversarySpec::FirstKeyBlock => Box::new(FirstKeyBlock),
            KeyAdversarySpec::LeakBlock { index } => Box::new(LeakBlock { index: *index }),
            KeyAdversarySpec::RecomputeBlock { vertex } => Box::new(RecomputeBlock {
                vertex: *vertex,
                graph: graph.clone(),
            }),
        };
        let r = run_privacy_simulation(adv.as_ref(), sampler.as_ref(), &graph, &cfg)?;
        out.note(format!(
            "{:<16} TV {:.4} (⊥ {}, overhead {} bits)",
            r.adversary, r.distance, r.simulator_bottoms, r.max_overhead_bits
        ));
        reports.push(r);
    }
    let verdict = Verdict::from_bool(reports.iter().all(|r| r.distance <= file.max_distance));
    let body = PrivacyOut {
        config: cfg,
        max_distance: file.max_distance,
        reports,
        verdict,
    };
    out.emit(&args.report, "sim privacy", &body, verdict)
}
