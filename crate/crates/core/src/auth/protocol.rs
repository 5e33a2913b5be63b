//! Challenge/response authentication against a committed key, played
//! through the security-game harness. The adversary is the prover and sees
//! the key only through leakage.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::merkle::{verify, MerkleCommitment, MerkleHasher, MerkleProof};
use super::prover::{OnTheFlyProver, Prover, StoredProver};
use crate::bits::Bits;
use crate::disperser::BipartiteRegularGraph;
use crate::error::{Error, Result};
use crate::kdf::BlockSource;
use crate::oracle::RandomOracle;
use crate::sim::{Adversary, AdversaryStep, Challenger, ChallengerStep, LeakageOracle};

pub const DEFAULT_CHALLENGES: usize = 16;

/// A secret that can answer Merkle openings.
pub trait AuthKey {
    fn prover(&self, hasher: &MerkleHasher) -> Result<Box<dyn Prover + '_>>;
}

impl AuthKey for Vec<Bits> {
    fn prover(&self, hasher: &MerkleHasher) -> Result<Box<dyn Prover + '_>> {
        Ok(Box::new(StoredProver::new(hasher.clone(), self.clone())?))
    }
}

/// Private data plus public KDF parameters; key blocks are rederived on
/// demand.
pub struct DiskKey {
    pub source: BlockSource,
    pub graph: BipartiteRegularGraph,
    pub oracle: Box<dyn RandomOracle>,
    pub subtree_height: usize,
}

impl AuthKey for DiskKey {
    fn prover(&self, hasher: &MerkleHasher) -> Result<Box<dyn Prover + '_>> {
        Ok(Box::new(OnTheFlyProver::new(
            &self.source,
            &self.graph,
            &*self.oracle,
            hasher.clone(),
            self.subtree_height,
        )?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Challenges {
    /// Indices drawn uniformly, with repetition, from the real leaves.
    Random(usize),
    Fixed(Vec<u32>),
}

pub fn encode_challenge(indices: &[u32]) -> Vec<u8> {
    indices.iter().flat_map(|i| i.to_le_bytes()).collect()
}

pub fn decode_challenge(msg: &[u8]) -> Result<Vec<u32>> {
    if !msg.len().is_multiple_of(4) {
        return Err(Error::malformed("challenge", "length is not a multiple of 4"));
    }
    Ok(msg
        .chunks(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// The verifier. Holds only the commitment after setup.
pub struct AuthChallenger {
    hasher: MerkleHasher,
    challenges: Challenges,
    commitment: Option<MerkleCommitment>,
    pending: Option<Vec<u32>>,
    revealed_bits: u64,
}

impl AuthChallenger {
    pub fn new(hasher: MerkleHasher, challenges: Challenges) -> Self {
        AuthChallenger {
            hasher,
            challenges,
            commitment: None,
            pending: None,
            revealed_bits: 0,
        }
    }

    pub fn commitment(&self) -> Option<&MerkleCommitment> {
        self.commitment.as_ref()
    }

    /// Bits of key material and path hashes shown to the verifier.
    pub fn revealed_bits(&self) -> u64 {
        self.revealed_bits
    }

    fn check(&mut self, indices: &[u32], msg: &[u8]) -> Result<bool> {
        let c = self.commitment.as_ref().expect("setup ran");
        let w = MerkleProof::wire_len(c.n, c.depth());
        if msg.len() != w * indices.len() {
            return Ok(false);
        }
        for (&want, chunk) in indices.iter().zip(msg.chunks(w)) {
            let proof = MerkleProof::from_bytes(chunk, c.n, c.depth())?;
            self.revealed_bits += proof.leakage_bits() as u64;
            if proof.leaf_index != want || !verify(&self.hasher, c, &proof)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<K: AuthKey> Challenger<K> for AuthChallenger {
    fn setup(&mut self, key: &K, _rng: &mut ChaCha20Rng) -> Result<()> {
        self.commitment = Some(key.prover(&self.hasher)?.commitment().clone());
        self.pending = None;
        self.revealed_bits = 0;
        Ok(())
    }

    fn respond(&mut self, msg: &[u8], rng: &mut ChaCha20Rng) -> Result<ChallengerStep> {
        match self.pending.take() {
            None => {
                let c = self.commitment.as_ref().expect("setup ran");
                let indices = match &self.challenges {
                    Challenges::Random(count) => (0..*count).map(|_| rng.gen_range(0..c.real_leaves as u32)).collect(),
                    Challenges::Fixed(v) => v.clone(),
                };
                let out = encode_challenge(&indices);
                self.pending = Some(indices);
                Ok(ChallengerStep::Continue(out))
            }
            Some(indices) => Ok(if self.check(&indices, msg)? {
                ChallengerStep::Accept
            } else {
                ChallengerStep::Reject
            }),
        }
    }
}

/// Leaks one opening: `leaf ‖ siblings` with the index supplied by the
/// caller.
pub fn leak_proof<K: AuthKey>(
    leak: &mut LeakageOracle<K>,
    hasher: &MerkleHasher,
    leaf_count: usize,
    index: u32,
) -> Result<MerkleProof> {
    let n = hasher.width();
    let depth = leaf_count.trailing_zeros() as usize;
    let mut failure = None;
    let bits = leak.leak(n * (1 + depth), |k| {
        match k.prover(hasher).and_then(|p| p.prove(index as usize)) {
            Ok(p) => Bits::concat(std::iter::once(&p.leaf).chain(&p.siblings)),
            Err(e) => {
                failure = Some(e);
                Bits::zeros(0)
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MerkleProof {
        leaf_index: index,
        leaf: bits.slice(0, n),
        siblings: (1..=depth).map(|j| bits.slice(j * n, n)).collect(),
    })
}

/// Learns the (public) tree size, then answers every challenge by leaking
/// exactly the requested openings.
pub struct HonestProverAdversary {
    hasher: MerkleHasher,
    leaf_count: usize,
}

impl HonestProverAdversary {
    pub fn new(hasher: MerkleHasher, leaf_count: usize) -> Self {
        HonestProverAdversary { hasher, leaf_count }
    }
}

impl<K: AuthKey> Adversary<K> for HonestProverAdversary {
    fn next(
        &mut self,
        incoming: Option<&[u8]>,
        leak: &mut LeakageOracle<K>,
        _rng: &mut ChaCha20Rng,
    ) -> Result<AdversaryStep> {
        let Some(msg) = incoming else {
            return Ok(AdversaryStep::Send(Vec::new()));
        };
        let mut out = Vec::new();
        for i in decode_challenge(msg)? {
            out.extend(leak_proof(leak, &self.hasher, self.leaf_count, i)?.to_bytes());
        }
        Ok(AdversaryStep::Send(out))
    }
}

/// Leaks the whole key, corrupts one block and answers from the corrupted
/// copy.
pub struct CorruptedProver {
    hasher: MerkleHasher,
    block_count: usize,
    corrupt: usize,
}

impl CorruptedProver {
    pub fn new(hasher: MerkleHasher, block_count: usize, corrupt: usize) -> Self {
        CorruptedProver {
            hasher,
            block_count,
            corrupt,
        }
    }
}

impl Adversary<Vec<Bits>> for CorruptedProver {
    fn next(
        &mut self,
        incoming: Option<&[u8]>,
        leak: &mut LeakageOracle<Vec<Bits>>,
        _rng: &mut ChaCha20Rng,
    ) -> Result<AdversaryStep> {
        let Some(msg) = incoming else {
            return Ok(AdversaryStep::Send(Vec::new()));
        };
        let n = self.hasher.width();
        let all = leak.leak(n * self.block_count, |k| Bits::concat(k.iter()))?;
        let mut blocks: Vec<Bits> = (0..self.block_count).map(|j| all.slice(j * n, n)).collect();
        blocks[self.corrupt].flip(0);
        let prover = StoredProver::new(self.hasher.clone(), blocks)?;
        let mut out = Vec::new();
        for i in decode_challenge(msg)? {
            out.extend(prover.prove(i as usize)?.to_bytes());
        }
        Ok(AdversaryStep::Send(out))
    }
}
