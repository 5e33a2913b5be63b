use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DSPG";
const VERSION: u8 = 1;
/// Left and right vertex counts are capped so every index fits in 31 bits.
pub const MAX_VERTICES: usize = 1 << 31;

/// A bipartite graph on `[ℓ] × [ℓ]` in which every right vertex has exactly
/// `degree` edges. Row `i` of `sigma` lists the left neighbours of right
/// vertex `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteRegularGraph {
    ell: usize,
    degree: usize,
    #[serde(skip)]
    sigma: Vec<u32>,
}

impl BipartiteRegularGraph {
    pub fn new(ell: usize, degree: usize, sigma: Vec<u32>) -> Result<Self> {
        if ell == 0 || ell > MAX_VERTICES {
            return Err(Error::invalid(format!("ℓ = {ell} outside [1, 2^31]")));
        }
        if degree == 0 {
            return Err(Error::invalid("degree must be at least 1"));
        }
        let expected = ell.checked_mul(degree).ok_or_else(|| Error::invalid("ℓ·d overflows"))?;
        if sigma.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "sigma has {} entries, expected ℓ·d = {expected}",
                sigma.len()
            )));
        }
        if let Some(pos) = sigma.iter().position(|&v| v as usize >= ell) {
            return Err(Error::OutOfRange {
                index: sigma[pos] as usize,
                bound: ell,
            });
        }
        Ok(BipartiteRegularGraph { ell, degree, sigma })
    }

    /// `σ^i = (i)`.
    pub fn identity(ell: usize) -> Result<Self> {
        Self::new(ell, 1, (0..ell as u32).collect())
    }

    /// Every right vertex adjacent to every left vertex, rows in order.
    pub fn complete(ell: usize) -> Result<Self> {
        let sigma = (0..ell).flat_map(|_| 0..ell as u32).collect();
        Self::new(ell, ell, sigma)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn sigma(&self) -> &[u32] {
        &self.sigma
    }

    /// Left neighbours of right vertex `i`, as stored.
    pub fn neighbors(&self, i: usize) -> Result<&[u32]> {
        if i >= self.ell {
            return Err(Error::OutOfRange {
                index: i,
                bound: self.ell,
            });
        }
        Ok(self.row(i))
    }

    pub(crate) fn row(&self, i: usize) -> &[u32] {
        &self.sigma[i * self.degree..(i + 1) * self.degree]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + 4 * self.sigma.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(self.ell as u32).to_le_bytes());
        out.extend_from_slice(&(self.degree as u32).to_le_bytes());
        for v in &self.sigma {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 13 || &bytes[..4] != MAGIC {
            return Err(Error::malformed("graph file", "missing DSPG header"));
        }
        if bytes[4] != VERSION {
            return Err(Error::Version {
                found: bytes[4] as u32,
                expected: VERSION as u32,
            });
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let ell = word(5) as usize;
        let degree = word(9) as usize;
        let body = &bytes[13..];
        let expected = (ell as u64) * (degree as u64) * 4;
        if body.len() as u64 != expected {
            return Err(Error::malformed(
                "graph file",
                format!("body has {} bytes, header implies {expected}", body.len()),
            ));
        }
        let sigma = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(ell, degree, sigma)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Hex SHA-256 of the serialized graph.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }
}
