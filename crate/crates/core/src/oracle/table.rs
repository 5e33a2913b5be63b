use super::hash::{expand, HashAlg};
use super::{OracleDescriptor, RandomOracle};
use crate::bits::Bits;
use crate::error::{Error, Result};

/// A lazily sampled random function, realized as a seeded PRF:
/// `SHA-256("table-oracle" ‖ LE64(seed) ‖ msg)` expanded to `n` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableOracle {
    seed: u64,
    n: usize,
}

impl TableOracle {
    pub fn new(seed: u64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("oracle output width must be positive"));
        }
        Ok(TableOracle { seed, n })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RandomOracle for TableOracle {
    fn output_bits(&self) -> usize {
        self.n
    }

    fn query(&self, msg: &[u8]) -> Bits {
        let t0 = HashAlg::Sha256.digest(&[b"table-oracle", &self.seed.to_le_bytes(), msg]);
        expand(HashAlg::Sha256, t0, self.n)
    }

    fn descriptor(&self) -> OracleDescriptor {
        OracleDescriptor::Table {
            seed: self.seed,
            n: self.n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = TableOracle::new(1, 32).unwrap();
        assert_eq!(a.query(b"m"), a.query(b"m"));
        assert_ne!(a.query(b"m"), TableOracle::new(2, 32).unwrap().query(b"m"));
    }

    #[test]
    fn single_bit_outputs_are_balanced() {
        let o = TableOracle::new(5, 1).unwrap();
        let ones = (0u32..100_000).filter(|i| o.query(&i.to_le_bytes()).bit(0)).count();
        let frac = ones as f64 / 100_000.0;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }
}
