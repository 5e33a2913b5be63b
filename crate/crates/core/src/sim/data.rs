use rand::RngCore;

use crate::bits::Bits;
use crate::entropy::{min_entropy, JointDistribution};
use crate::error::{Error, Result};

/// A samplable distribution over `ℓ` blocks of `n` bits.
pub trait DataSampler: Sync {
    fn block_bits(&self) -> usize;
    fn block_count(&self) -> usize;
    /// `H∞(D)/(ℓn)`.
    fn entropy_rate(&self) -> f64;
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<Bits>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformBlocks {
    pub n: usize,
    pub ell: usize,
}

impl DataSampler for UniformBlocks {
    fn block_bits(&self) -> usize {
        self.n
    }

    fn block_count(&self) -> usize {
        self.ell
    }

    fn entropy_rate(&self) -> f64 {
        1.0
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<Bits> {
        (0..self.ell).map(|_| Bits::random(self.n, rng)).collect()
    }
}

/// Draws outcomes of a joint table; coordinate `i` becomes block `i`.
#[derive(Clone, Debug)]
pub struct TableSampler {
    dist: JointDistribution,
    rate: f64,
}

impl TableSampler {
    pub fn new(dist: JointDistribution) -> Result<Self> {
        if dist.is_empty() {
            return Err(Error::invalid("empty distribution"));
        }
        let bits = dist.arity() as f64 * dist.block_bits() as f64;
        let rate = min_entropy(&dist)? / bits;
        Ok(TableSampler { dist, rate })
    }

    pub fn distribution(&self) -> &JointDistribution {
        &self.dist
    }
}

impl DataSampler for TableSampler {
    fn block_bits(&self) -> usize {
        self.dist.block_bits() as usize
    }

    fn block_count(&self) -> usize {
        self.dist.arity()
    }

    fn entropy_rate(&self) -> f64 {
        self.rate
    }

    fn sample(&self, mut rng: &mut dyn RngCore) -> Vec<Bits> {
        let i = self.dist.sample_index(&mut rng);
        let n = self.block_bits();
        self.dist
            .outcome(i)
            .iter()
            .map(|&v| Bits::from_u64(v as u64, n))
            .collect()
    }
}

/// `D` as one byte string, for histogram keys.
pub fn data_key(blocks: &[Bits]) -> Vec<u8> {
    blocks.iter().flat_map(|b| b.as_bytes().iter().copied()).collect()
}
