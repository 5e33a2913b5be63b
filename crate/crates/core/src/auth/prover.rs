use std::collections::BTreeMap;

use super::merkle::{commitment_from_tree, MerkleCommitment, MerkleHasher, MerkleProof, MerkleTree};
use crate::bits::Bits;
use crate::disperser::BipartiteRegularGraph;
use crate::error::{Error, Result};
use crate::kdf::{derive_block, BlockSource};
use crate::oracle::RandomOracle;

pub trait Prover {
    fn commitment(&self) -> &MerkleCommitment;
    fn prove(&self, index: usize) -> Result<MerkleProof>;
}

fn check_index(c: &MerkleCommitment, index: usize) -> Result<()> {
    if index >= c.leaf_count {
        return Err(Error::OutOfRange {
            index,
            bound: c.leaf_count,
        });
    }
    Ok(())
}

fn padded_leaf(blocks: &[Bits], index: usize, n: usize) -> Bits {
    blocks.get(index).cloned().unwrap_or_else(|| Bits::zeros(n))
}

/// Holds the whole key and tree in memory.
pub struct StoredProver {
    hasher: MerkleHasher,
    blocks: Vec<Bits>,
    tree: MerkleTree,
    commitment: MerkleCommitment,
}

impl StoredProver {
    pub fn new(hasher: MerkleHasher, blocks: Vec<Bits>) -> Result<Self> {
        let tree = MerkleTree::build(&hasher, &blocks)?;
        let commitment = commitment_from_tree(&hasher, &tree, blocks.len());
        Ok(StoredProver {
            hasher,
            blocks,
            tree,
            commitment,
        })
    }

    pub fn hasher(&self) -> &MerkleHasher {
        &self.hasher
    }
}

impl Prover for StoredProver {
    fn commitment(&self) -> &MerkleCommitment {
        &self.commitment
    }

    fn prove(&self, index: usize) -> Result<MerkleProof> {
        check_index(&self.commitment, index)?;
        Ok(MerkleProof {
            leaf_index: index as u32,
            leaf: padded_leaf(&self.blocks, index, self.commitment.n),
            siblings: self.tree.siblings(index),
        })
    }
}

/// Keeps only the tree levels at and above `subtree_height`; each proof
/// rederives the key blocks of the leaf's bottom subtree from the source.
pub struct OnTheFlyProver<'a, O> {
    source: &'a BlockSource,
    graph: &'a BipartiteRegularGraph,
    oracle: O,
    hasher: MerkleHasher,
    subtree_height: usize,
    upper: Vec<Vec<Bits>>,
    commitment: MerkleCommitment,
}

impl<'a, O: RandomOracle> OnTheFlyProver<'a, O> {
    /// Derives every key block once to build the cached upper levels.
    pub fn new(
        source: &'a BlockSource,
        graph: &'a BipartiteRegularGraph,
        oracle: O,
        hasher: MerkleHasher,
        subtree_height: usize,
    ) -> Result<Self> {
        let blocks = (0..graph.ell())
            .map(|i| derive_block(source, graph, &oracle, i))
            .collect::<Result<Vec<_>>>()?;
        let tree = MerkleTree::build(&hasher, &blocks)?;
        let commitment = commitment_from_tree(&hasher, &tree, blocks.len());
        let t = subtree_height.min(commitment.depth());
        let upper = tree.levels()[t..].to_vec();
        Ok(OnTheFlyProver {
            source,
            graph,
            oracle,
            hasher,
            subtree_height: t,
            upper,
            commitment,
        })
    }

    /// Real (unpadded) leaves in the bottom subtree containing `index`; each
    /// costs `d` block reads per proof.
    pub fn leaves_needed(&self, index: usize) -> usize {
        let start = (index >> self.subtree_height) << self.subtree_height;
        let end = start + (1 << self.subtree_height);
        end.min(self.commitment.real_leaves).saturating_sub(start)
    }
}

impl<O: RandomOracle> Prover for OnTheFlyProver<'_, O> {
    fn commitment(&self) -> &MerkleCommitment {
        &self.commitment
    }

    fn prove(&self, index: usize) -> Result<MerkleProof> {
        check_index(&self.commitment, index)?;
        let n = self.commitment.n;
        let t = self.subtree_height;
        let start = (index >> t) << t;
        let mut leaf_blocks = BTreeMap::new();
        for j in start..start + (1 << t) {
            let block = if j < self.commitment.real_leaves {
                derive_block(self.source, self.graph, &self.oracle, j)?
            } else {
                Bits::zeros(n)
            };
            leaf_blocks.insert(j, block);
        }
        let hashes = leaf_blocks.values().map(|b| self.hasher.leaf(b)).collect();
        let sub = MerkleTree::from_leaf_hashes(&self.hasher, hashes);
        let mut siblings = sub.siblings(index - start);
        let mut idx = index >> t;
        for level in &self.upper[..self.upper.len() - 1] {
            siblings.push(level[idx ^ 1].clone());
            idx >>= 1;
        }
        Ok(MerkleProof {
            leaf_index: index as u32,
            leaf: leaf_blocks.remove(&index).unwrap(),
            siblings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auth::verify;
    use crate::disperser::sample_regular_graph;
    use crate::kdf::split_blocks;
    use crate::oracle::TableOracle;

    #[test]
    fn on_the_fly_matches_stored_and_counts_reads() {
        let data: Vec<u8> = (0..40).collect();
        let source = split_blocks(&data, 32).unwrap();
        let graph = sample_regular_graph(10, 3, 5).unwrap();
        let oracle = TableOracle::new(2, 32).unwrap();
        let hasher = MerkleHasher::sha256(32).unwrap();
        let key: Vec<Bits> = (0..10)
            .map(|i| derive_block(&source, &graph, &oracle, i).unwrap())
            .collect();
        let stored = StoredProver::new(hasher.clone(), key).unwrap();
        for t in 0..=5 {
            let otf = OnTheFlyProver::new(&source, &graph, &oracle, hasher.clone(), t).unwrap();
            assert_eq!(otf.commitment(), stored.commitment());
            for i in 0..16 {
                let before = source.read_count();
                let p = otf.prove(i).unwrap();
                let reads = source.read_count() - before;
                assert_eq!(reads, 3 * otf.leaves_needed(i) as u64, "t={t} i={i}");
                assert_eq!(p.to_bytes(), stored.prove(i).unwrap().to_bytes());
                assert!(verify(&hasher, stored.commitment(), &p).unwrap());
            }
            assert!(otf.prove(16).is_err());
        }
    }
}
