use std::path::PathBuf;

use anyhow::{bail, Context};
use brm_kdf::disperser::{sample_regular_graph, BipartiteRegularGraph};
use brm_kdf::kdf::{derive_block, derive_key, BlockSource, Manifest, DEFAULT_BLOCK_BITS, TABLE_PRF};
use brm_kdf::oracle::{HashAlg, KeyedHashOracle, RandomOracle, KDF_DOMAIN};
use clap::{Args, Subcommand};
use serde::Serialize;

use crate::report::{Output, ReportPath, Verdict};

#[derive(Subcommand)]
pub enum KdfCmd {
    /// Derive the whole key, or one block of it.
    Derive {
        #[command(flatten)]
        key: KeyArgs,
        /// Derive only this block.
        #[arg(long)]
        block: Option<usize>,
        /// Also write the manifest to this file.
        #[arg(long)]
        manifest_out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportPath,
    },
}

/// Where the data, graph and oracle come from.
#[derive(Args, Clone, Debug)]
pub struct KeyArgs {
    /// Data file, read as ⌈bits/n⌉ blocks of n bits.
    #[arg(long)]
    pub data: PathBuf,
    /// Manifest recording n, graph and oracle; replaces the flags below.
    #[arg(long, conflicts_with_all = ["seed", "degree", "n", "hash"])]
    pub manifest: Option<PathBuf>,
    /// DSPG graph file.
    #[arg(long, conflicts_with = "seed")]
    pub graph: Option<PathBuf>,
    /// Regenerate the graph from this seed (needs --degree).
    #[arg(long, requires = "degree")]
    pub seed: Option<u64>,
    /// Left neighbours per key block.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Block length in bits; a multiple of 8.
    #[arg(long)]
    pub n: Option<usize>,
    /// Hash algorithm; defaults to $BRMKDF_HASH, then sha256.
    #[arg(long)]
    pub hash: Option<HashAlg>,
}

pub struct KeyContext {
    pub source: BlockSource,
    pub graph: BipartiteRegularGraph,
    pub oracle: Box<dyn RandomOracle>,
    pub manifest: Manifest,
    /// Hash for anything built on top of the key (Merkle trees).
    pub alg: HashAlg,
}

impl KeyArgs {
    pub fn resolve(&self) -> anyhow::Result<KeyContext> {
        if let Some(path) = &self.manifest {
            let manifest = Manifest::read_file(path).with_context(|| format!("reading {}", path.display()))?;
            let source = open(&self.data, manifest.n)?;
            let graph = manifest.load_graph(self.graph.as_deref())?;
            check_ell(&source, &graph)?;
            let oracle = manifest.build_oracle()?;
            let alg = if manifest.hash_alg == TABLE_PRF {
                HashAlg::from_env()?
            } else {
                manifest.hash_alg.parse()?
            };
            return Ok(KeyContext {
                source,
                graph,
                oracle,
                manifest,
                alg,
            });
        }
        let alg = match self.hash {
            Some(a) => a,
            None => HashAlg::from_env()?,
        };
        let n = self.n.unwrap_or(DEFAULT_BLOCK_BITS);
        let source = open(&self.data, n)?;
        let oracle = KeyedHashOracle::new(alg, KDF_DOMAIN, n)?;
        let (graph, manifest) = match (&self.graph, self.seed, self.degree) {
            (Some(path), None, None) => {
                let g =
                    BipartiteRegularGraph::read_file(path).with_context(|| format!("reading {}", path.display()))?;
                let m = Manifest::for_graph_file(&source, &g, &oracle);
                (g, m)
            }
            (None, Some(seed), Some(degree)) => {
                let g = sample_regular_graph(source.block_count(), degree, seed)?;
                let m = Manifest::for_seeded(&source, &g, seed, &oracle);
                (g, m)
            }
            (Some(_), _, Some(_)) => bail!("--degree is read from the graph file; drop it"),
            _ => bail!("supply --graph <file>, --seed S --degree d, or --manifest <file>"),
        };
        check_ell(&source, &graph)?;
        Ok(KeyContext {
            source,
            graph,
            oracle: Box::new(oracle),
            manifest,
            alg,
        })
    }
}

fn open(path: &PathBuf, n: usize) -> anyhow::Result<BlockSource> {
    BlockSource::open(path, n).with_context(|| format!("opening {}", path.display()))
}

fn check_ell(source: &BlockSource, graph: &BipartiteRegularGraph) -> anyhow::Result<()> {
    if source.block_count() != graph.ell() {
        bail!(
            "data has {} blocks of {} bits but the graph has ℓ = {}",
            source.block_count(),
            source.block_bits(),
            graph.ell()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct Block {
    index: usize,
    hex: String,
}

#[derive(Serialize)]
struct DeriveReport {
    manifest: Manifest,
    block_reads: u64,
    blocks: Vec<Block>,
}

pub fn run(cmd: KdfCmd, out: &Output) -> anyhow::Result<Verdict> {
    let KdfCmd::Derive {
        key,
        block,
        manifest_out,
        report: path,
    } = cmd;
    let ctx = key.resolve()?;
    let blocks = match block {
        Some(i) => vec![Block {
            index: i,
            hex: derive_block(&ctx.source, &ctx.graph, &ctx.oracle, i)?.to_hex(),
        }],
        None => derive_key(&ctx.source, &ctx.graph, &ctx.oracle, ctx.manifest.clone())?
            .blocks
            .iter()
            .enumerate()
            .map(|(index, b)| Block { index, hex: b.to_hex() })
            .collect(),
    };
    if let Some(p) = &manifest_out {
        ctx.manifest.write_file(p)?;
    }
    out.note(format!(
        "derived {} of {} blocks with {} block reads",
        blocks.len(),
        ctx.graph.ell(),
        ctx.source.read_count()
    ));
    let report = DeriveReport {
        manifest: ctx.manifest,
        block_reads: ctx.source.read_count(),
        blocks,
    };
    out.emit(&path, "kdf derive", &report, Verdict::Pass)
}
