use std::collections::HashMap;
use std::sync::Mutex;

use super::ledger::LeakageLedger;
use crate::bits::Bits;
use crate::disperser::BipartiteRegularGraph;
use crate::error::Result;
use crate::kdf::{query_for_block, BlockSource};
use crate::oracle::{OracleDescriptor, RandomOracle};

/// The key-defining arguments `encode(i, D_σ^i)`, mapped to `i`.
pub fn designated_queries(source: &BlockSource, graph: &BipartiteRegularGraph) -> Result<HashMap<Vec<u8>, usize>> {
    (0..graph.ell())
        .map(|i| Ok((query_for_block(source, graph, i)?.0, i)))
        .collect()
}

/// Passes queries to `base`, numbering them from 1 and recording the first
/// bad query for each right vertex.
pub struct TrackedOracle<O> {
    base: O,
    designated: HashMap<Vec<u8>, usize>,
    state: Mutex<LeakageLedger>,
}

impl<O: RandomOracle> TrackedOracle<O> {
    pub fn new(base: O, designated: HashMap<Vec<u8>, usize>) -> Self {
        TrackedOracle {
            base,
            designated,
            state: Mutex::new(LeakageLedger::default()),
        }
    }

    pub fn for_data(base: O, source: &BlockSource, graph: &BipartiteRegularGraph) -> Result<Self> {
        Ok(Self::new(base, designated_queries(source, graph)?))
    }

    pub fn base(&self) -> &O {
        &self.base
    }

    /// Vertex hit by `msg`, if it is a designated argument.
    pub fn designated(&self, msg: &[u8]) -> Option<usize> {
        self.designated.get(msg).copied()
    }

    pub fn bad_indices(&self) -> Vec<(u64, usize)> {
        self.state.lock().unwrap().bad_indices.clone()
    }

    pub fn query_count(&self) -> u64 {
        self.state.lock().unwrap().oracle_queries
    }
}

impl<O: RandomOracle> RandomOracle for TrackedOracle<O> {
    fn output_bits(&self) -> usize {
        self.base.output_bits()
    }

    fn query(&self, msg: &[u8]) -> Bits {
        {
            let mut s = self.state.lock().unwrap();
            let k = s.record_query();
            if let Some(&i) = self.designated.get(msg) {
                s.record_bad(k, i);
            }
        }
        self.base.query(msg)
    }

    fn descriptor(&self) -> OracleDescriptor {
        self.base.descriptor()
    }
}
