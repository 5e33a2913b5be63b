use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::graph::{BipartiteRegularGraph, MAX_VERTICES};
use crate::error::{Error, Result};

/// Random right-regular graph: row `i` is `degree` distinct left vertices
/// drawn without replacement from a stream keyed by `(seed, i)`.
pub fn sample_regular_graph(ell: usize, degree: usize, seed: u64) -> Result<BipartiteRegularGraph> {
    if degree > ell {
        return Err(Error::invalid(format!("degree {degree} exceeds ℓ = {ell}")));
    }
    if ell == 0 || ell > MAX_VERTICES {
        return Err(Error::invalid(format!("ℓ = {ell} outside [1, 2^31]")));
    }
    let mut sigma = Vec::with_capacity(ell * degree);
    for i in 0..ell {
        sigma.extend(sample_row(ell, degree, seed, i as u32));
    }
    BipartiteRegularGraph::new(ell, degree, sigma)
}

/// Row `vertex` of [`sample_regular_graph`], computed on its own.
pub fn sample_row(ell: usize, degree: usize, seed: u64, vertex: u32) -> Vec<u32> {
    let mut stream = RowStream::new(seed, vertex);
    // partial Fisher–Yates over a virtual array 0..ℓ
    let mut swapped: HashMap<u32, u32> = HashMap::with_capacity(degree * 2);
    let mut row = Vec::with_capacity(degree);
    for j in 0..degree as u32 {
        let r = j + stream.below(ell as u32 - j);
        let at_r = *swapped.get(&r).unwrap_or(&r);
        let at_j = *swapped.get(&j).unwrap_or(&j);
        swapped.insert(r, at_j);
        row.push(at_r);
    }
    row
}

struct RowStream {
    prefix: Vec<u8>,
    counter: u32,
    buf: [u8; 32],
    pos: usize,
}

impl RowStream {
    fn new(seed: u64, vertex: u32) -> Self {
        let mut prefix = b"DSPG-row".to_vec();
        prefix.extend_from_slice(&seed.to_le_bytes());
        prefix.extend_from_slice(&vertex.to_le_bytes());
        RowStream {
            prefix,
            counter: 0,
            buf: [0; 32],
            pos: 32,
        }
    }

    fn next_u32(&mut self) -> u32 {
        if self.pos == 32 {
            let mut h = Sha256::new();
            h.update(&self.prefix);
            h.update(self.counter.to_le_bytes());
            self.buf = h.finalize().into();
            self.counter += 1;
            self.pos = 0;
        }
        let v = u32::from_le_bytes(self.buf[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        v
    }

    /// Uniform in `[0, bound)` by rejection.
    fn below(&mut self, bound: u32) -> u32 {
        let zone = u32::MAX - (u32::MAX % bound + 1) % bound;
        loop {
            let x = self.next_u32();
            if x <= zone {
                return x % bound;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_degree_gives_permutations() {
        let g = sample_regular_graph(8, 8, 99).unwrap();
        for i in 0..8 {
            let mut row = g.neighbors(i).unwrap().to_vec();
            row.sort_unstable();
            assert_eq!(row, (0..8).collect::<Vec<u32>>());
        }
    }

    #[test]
    fn deterministic_and_distinct() {
        let a = sample_regular_graph(16, 4, 1).unwrap();
        assert_eq!(a, sample_regular_graph(16, 4, 1).unwrap());
        assert_ne!(a, sample_regular_graph(16, 4, 2).unwrap());
        assert_eq!(sample_row(16, 4, 1, 5), a.neighbors(5).unwrap());
    }

    #[test]
    fn rows_distinct_and_in_range_over_sweep() {
        for seed in 0..50 {
            for (ell, d) in [(1, 1), (5, 3), (33, 7), (100, 100)] {
                let g = sample_regular_graph(ell, d, seed).unwrap();
                for i in 0..ell {
                    let mut row = g.neighbors(i).unwrap().to_vec();
                    assert!(row.iter().all(|&v| (v as usize) < ell));
                    row.sort_unstable();
                    row.dedup();
                    assert_eq!(row.len(), d);
                }
            }
        }
    }

    #[test]
    fn degree_above_ell() {
        assert!(sample_regular_graph(3, 4, 0).is_err());
    }

    #[test]
    fn large_ell_rows_are_cheap() {
        let row = sample_row(1 << 30, 5, 7, 123_456);
        assert_eq!(row.len(), 5);
    }
}
