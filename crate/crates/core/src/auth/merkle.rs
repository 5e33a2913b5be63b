use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::oracle::{HashAlg, KeyedHashOracle, RandomOracle, MERKLE_DOMAIN};

const LEAF_TAG: u8 = 0x00;
const NODE_TAG: u8 = 0x01;

/// Leaf and node hashing with `n`-bit outputs, separated from the KDF
/// domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MerkleHasher {
    oracle: KeyedHashOracle,
}

impl MerkleHasher {
    pub fn new(alg: HashAlg, n: usize) -> Result<Self> {
        Ok(MerkleHasher {
            oracle: KeyedHashOracle::new(alg, MERKLE_DOMAIN, n)?,
        })
    }

    pub fn sha256(n: usize) -> Result<Self> {
        Self::new(HashAlg::Sha256, n)
    }

    pub fn width(&self) -> usize {
        self.oracle.output_bits()
    }

    pub fn alg(&self) -> HashAlg {
        self.oracle.alg()
    }

    /// `H(0x00 ‖ block)`.
    pub fn leaf(&self, block: &Bits) -> Bits {
        let mut msg = vec![LEAF_TAG];
        msg.extend_from_slice(block.as_bytes());
        self.oracle.query(&msg)
    }

    /// `H(0x01 ‖ left ‖ right)`.
    pub fn node(&self, left: &Bits, right: &Bits) -> Bits {
        let mut msg = vec![NODE_TAG];
        msg.extend_from_slice(left.as_bytes());
        msg.extend_from_slice(right.as_bytes());
        self.oracle.query(&msg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MerkleCommitment {
    pub root: Bits,
    /// Leaves after padding to a power of two.
    pub leaf_count: usize,
    /// Key blocks before padding.
    pub real_leaves: usize,
    pub n: usize,
    pub hash_alg: String,
}

impl MerkleCommitment {
    pub fn depth(&self) -> usize {
        self.leaf_count.trailing_zeros() as usize
    }
}

/// All levels of a complete tree, level 0 holding the leaf hashes.
#[derive(Clone, Debug)]
pub struct MerkleTree {
    levels: Vec<Vec<Bits>>,
}

impl MerkleTree {
    /// Builds the tree over `blocks`, padding with all-zero blocks.
    pub fn build(hasher: &MerkleHasher, blocks: &[Bits]) -> Result<Self> {
        let n = hasher.width();
        if blocks.is_empty() {
            return Err(Error::invalid("cannot commit to an empty key"));
        }
        if let Some(b) = blocks.iter().find(|b| b.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "key block has {} bits, hasher uses {n}",
                b.len()
            )));
        }
        let width = blocks.len().next_power_of_two();
        let pad = hasher.leaf(&Bits::zeros(n));
        let mut leaves: Vec<Bits> = blocks.iter().map(|b| hasher.leaf(b)).collect();
        leaves.resize(width, pad);
        Ok(Self::from_leaf_hashes(hasher, leaves))
    }

    pub(crate) fn from_leaf_hashes(hasher: &MerkleHasher, leaves: Vec<Bits>) -> Self {
        let mut levels = vec![leaves];
        while levels.last().unwrap().len() > 1 {
            let next = levels
                .last()
                .unwrap()
                .chunks(2)
                .map(|p| hasher.node(&p[0], &p[1]))
                .collect();
            levels.push(next);
        }
        MerkleTree { levels }
    }

    pub fn root(&self) -> &Bits {
        &self.levels.last().unwrap()[0]
    }

    pub fn levels(&self) -> &[Vec<Bits>] {
        &self.levels
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    /// Siblings of leaf `index`, bottom-up.
    pub fn siblings(&self, index: usize) -> Vec<Bits> {
        let mut idx = index;
        let mut out = Vec::with_capacity(self.levels.len() - 1);
        for level in &self.levels[..self.levels.len() - 1] {
            out.push(level[idx ^ 1].clone());
            idx >>= 1;
        }
        out
    }
}

pub fn commitment_from_tree(hasher: &MerkleHasher, tree: &MerkleTree, real_leaves: usize) -> MerkleCommitment {
    MerkleCommitment {
        root: tree.root().clone(),
        leaf_count: tree.leaf_count(),
        real_leaves,
        n: hasher.width(),
        hash_alg: hasher.alg().name().into(),
    }
}

/// Commits to a list of key blocks.
pub fn commit(hasher: &MerkleHasher, blocks: &[Bits]) -> Result<MerkleCommitment> {
    let tree = MerkleTree::build(hasher, blocks)?;
    Ok(commitment_from_tree(hasher, &tree, blocks.len()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MerkleProof {
    pub leaf_index: u32,
    pub leaf: Bits,
    pub siblings: Vec<Bits>,
}

impl MerkleProof {
    /// Bits revealed to the verifier: the leaf and one hash per level.
    pub fn leakage_bits(&self) -> usize {
        self.leaf.len() * (1 + self.siblings.len())
    }

    /// `LE32(index) ‖ leaf ‖ siblings`, each field padded to whole bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.leaf_index.to_le_bytes().to_vec();
        out.extend_from_slice(self.leaf.as_bytes());
        for s in &self.siblings {
            out.extend_from_slice(s.as_bytes());
        }
        out
    }

    pub fn wire_len(n: usize, depth: usize) -> usize {
        4 + n.div_ceil(8) * (1 + depth)
    }

    pub fn from_bytes(bytes: &[u8], n: usize, depth: usize) -> Result<Self> {
        if bytes.len() != Self::wire_len(n, depth) {
            return Err(Error::malformed(
                "proof",
                format!("{} bytes, expected {}", bytes.len(), Self::wire_len(n, depth)),
            ));
        }
        let w = n.div_ceil(8);
        let field = |k: usize| Bits::from_bytes(&bytes[4 + k * w..4 + (k + 1) * w], n);
        Ok(MerkleProof {
            leaf_index: u32::from_le_bytes(bytes[..4].try_into().unwrap()),
            leaf: field(0),
            siblings: (1..=depth).map(field).collect(),
        })
    }
}

/// Recomputes the root from the proof. Malformed proofs are errors; proofs
/// that are well-formed but wrong return `false`.
pub fn verify(hasher: &MerkleHasher, commitment: &MerkleCommitment, proof: &MerkleProof) -> Result<bool> {
    if proof.siblings.len() != commitment.depth() {
        return Err(Error::malformed(
            "proof",
            format!(
                "{} siblings for a tree of depth {}",
                proof.siblings.len(),
                commitment.depth()
            ),
        ));
    }
    let n = commitment.n;
    if proof.leaf.len() != n || proof.siblings.iter().any(|s| s.len() != n) {
        return Err(Error::malformed("proof", "field width differs from commitment"));
    }
    if proof.leaf_index as usize >= commitment.leaf_count {
        return Ok(false);
    }
    let mut idx = proof.leaf_index as usize;
    let mut acc = hasher.leaf(&proof.leaf);
    for s in &proof.siblings {
        acc = if idx & 1 == 0 {
            hasher.node(&acc, s)
        } else {
            hasher.node(s, &acc)
        };
        idx >>= 1;
    }
    Ok(acc == commitment.root)
}
