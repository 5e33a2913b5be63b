use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use brm_kdf::auth::{verify, MerkleCommitment, MerkleHasher, MerkleProof, OnTheFlyProver, Prover, StoredProver};
use brm_kdf::kdf::derive_key;
use brm_kdf::Bits;
use clap::Subcommand;
use serde::{Deserialize, Serialize};

use crate::kdf::{KeyArgs, KeyContext};
use crate::report::{Output, ReportPath, Verdict};

#[derive(Subcommand)]
pub enum AuthCmd {
    /// Merkle root over the derived key blocks.
    Commit {
        #[command(flatten)]
        key: KeyArgs,
        #[command(flatten)]
        report: ReportPath,
    },
    /// Opening of one key block.
    Prove {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        index: u32,
        /// Keep only tree levels at this height and above, rederiving the
        /// bottom subtree from the data for each proof.
        #[arg(long)]
        subtree_height: Option<usize>,
        /// Write the proof in wire format to this file.
        #[arg(long)]
        proof_out: Option<PathBuf>,
        #[command(flatten)]
        report: ReportPath,
    },
    /// Check a wire-format proof against a commitment.
    Verify {
        /// Commitment JSON, or a report of `auth commit`.
        #[arg(long)]
        commitment: PathBuf,
        /// Proof in wire format.
        #[arg(long)]
        proof: PathBuf,
        #[command(flatten)]
        report: ReportPath,
    },
}

/// `MerkleCommitment` with the root as hex.
#[derive(Serialize, Deserialize)]
struct CommitmentJson {
    root: String,
    leaf_count: usize,
    real_leaves: usize,
    n: usize,
    hash_alg: String,
}

impl From<&MerkleCommitment> for CommitmentJson {
    fn from(c: &MerkleCommitment) -> Self {
        CommitmentJson {
            root: c.root.to_hex(),
            leaf_count: c.leaf_count,
            real_leaves: c.real_leaves,
            n: c.n,
            hash_alg: c.hash_alg.clone(),
        }
    }
}

impl CommitmentJson {
    fn to_commitment(&self) -> anyhow::Result<MerkleCommitment> {
        if !self.leaf_count.is_power_of_two() || self.real_leaves > self.leaf_count {
            bail!("commitment leaf counts are inconsistent");
        }
        Ok(MerkleCommitment {
            root: Bits::from_hex(&self.root, self.n)?,
            leaf_count: self.leaf_count,
            real_leaves: self.real_leaves,
            n: self.n,
            hash_alg: self.hash_alg.clone(),
        })
    }
}

#[derive(Serialize)]
struct CommitReport {
    commitment: CommitmentJson,
}

#[derive(Serialize)]
struct ProveReport {
    commitment: CommitmentJson,
    leaf_index: u32,
    leaf: String,
    leakage_bits: usize,
    block_reads: u64,
    proof: String,
}

#[derive(Serialize)]
struct VerifyReport {
    root: String,
    leaf_index: u32,
    valid: bool,
    verdict: Verdict,
}

fn derive_blocks(ctx: &KeyContext) -> anyhow::Result<Vec<Bits>> {
    Ok(derive_key(&ctx.source, &ctx.graph, &ctx.oracle, ctx.manifest.clone())?.blocks)
}

pub fn run(cmd: AuthCmd, out: &Output) -> anyhow::Result<Verdict> {
    match cmd {
        AuthCmd::Commit { key, report: path } => {
            let ctx = key.resolve()?;
            let hasher = MerkleHasher::new(ctx.alg, ctx.source.block_bits())?;
            let prover = StoredProver::new(hasher, derive_blocks(&ctx)?)?;
            let c = prover.commitment();
            out.note(format!("root {} over {} leaves", c.root.to_hex(), c.leaf_count));
            let report = CommitReport { commitment: c.into() };
            out.emit(&path, "auth commit", &report, Verdict::Pass)
        }
        AuthCmd::Prove {
            key,
            index,
            subtree_height,
            proof_out,
            report: path,
        } => {
            let ctx = key.resolve()?;
            let hasher = MerkleHasher::new(ctx.alg, ctx.source.block_bits())?;
            let (commitment, proof, reads) = match subtree_height {
                Some(t) => {
                    let p = OnTheFlyProver::new(&ctx.source, &ctx.graph, &ctx.oracle, hasher, t)?;
                    let before = ctx.source.read_count();
                    let proof = p.prove(index as usize)?;
                    (p.commitment().clone(), proof, ctx.source.read_count() - before)
                }
                None => {
                    let p = StoredProver::new(hasher, derive_blocks(&ctx)?)?;
                    let proof = p.prove(index as usize)?;
                    (p.commitment().clone(), proof, 0)
                }
            };
            let wire = proof.to_bytes();
            if let Some(p) = &proof_out {
                fs::write(p, &wire).with_context(|| format!("writing {}", p.display()))?;
            }
            out.note(format!(
                "proof for leaf {index}: {} bytes, {} block reads",
                wire.len(),
                reads
            ));
            let report = ProveReport {
                commitment: (&commitment).into(),
                leaf_index: index,
                leaf: proof.leaf.to_hex(),
                leakage_bits: proof.leakage_bits(),
                block_reads: reads,
                proof: hex::encode(&wire),
            };
            out.emit(&path, "auth prove", &report, Verdict::Pass)
        }
        AuthCmd::Verify {
            commitment,
            proof,
            report: path,
        } => {
            let text = fs::read_to_string(&commitment).with_context(|| format!("reading {}", commitment.display()))?;
            let mut value: serde_json::Value = serde_json::from_str(&text)?;
            if let Some(inner) = value.get_mut("commitment") {
                value = inner.take();
            }
            let c = serde_json::from_value::<CommitmentJson>(value)?.to_commitment()?;
            let hasher = MerkleHasher::new(c.hash_alg.parse()?, c.n)?;
            let bytes = fs::read(&proof).with_context(|| format!("reading {}", proof.display()))?;
            let parsed = MerkleProof::from_bytes(&bytes, c.n, c.depth())?;
            let valid = verify(&hasher, &c, &parsed)?;
            out.note(if valid {
                "proof verifies"
            } else {
                "proof does NOT verify"
            });
            let verdict = Verdict::from_bool(valid);
            let report = VerifyReport {
                root: c.root.to_hex(),
                leaf_index: parsed.leaf_index,
                valid,
                verdict,
            };
            out.emit(&path, "auth verify", &report, verdict)
        }
    }
}
