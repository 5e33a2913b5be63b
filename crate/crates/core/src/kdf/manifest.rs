use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::source::BlockSource;
use crate::disperser::{sample_regular_graph, BipartiteRegularGraph};
use crate::error::{Error, Result};
use crate::oracle::{HashAlg, KeyedHashOracle, RandomOracle, TableOracle};

pub const MANIFEST_VERSION: u32 = 1;
/// `hash_alg` value for the seeded table oracle.
pub const TABLE_PRF: &str = "table-prf";

/// Everything needed to recompute any key block from the data alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub n: usize,
    pub ell: usize,
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_file_hash: Option<String>,
    pub hash_alg: String,
    /// Hex domain-separation constant; empty for the table oracle.
    pub domain_sep: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_seed: Option<u64>,
}

impl Manifest {
    fn base(source: &BlockSource, graph: &BipartiteRegularGraph) -> Self {
        Manifest {
            version: MANIFEST_VERSION,
            n: source.block_bits(),
            ell: graph.ell(),
            degree: graph.degree(),
            graph_seed: None,
            graph_file_hash: None,
            hash_alg: String::new(),
            domain_sep: String::new(),
            oracle_seed: None,
        }
    }

    /// Graph regenerated from `graph_seed`, keyed-hash oracle.
    pub fn for_seeded(
        source: &BlockSource,
        graph: &BipartiteRegularGraph,
        graph_seed: u64,
        oracle: &KeyedHashOracle,
    ) -> Self {
        Manifest {
            graph_seed: Some(graph_seed),
            hash_alg: oracle.alg().name().into(),
            domain_sep: hex::encode(oracle.domain()),
            ..Self::base(source, graph)
        }
    }

    /// Graph stored in a file identified by its content hash.
    pub fn for_graph_file(source: &BlockSource, graph: &BipartiteRegularGraph, oracle: &KeyedHashOracle) -> Self {
        Manifest {
            graph_file_hash: Some(graph.content_hash()),
            hash_alg: oracle.alg().name().into(),
            domain_sep: hex::encode(oracle.domain()),
            ..Self::base(source, graph)
        }
    }

    /// Seeded graph with the seeded table oracle.
    pub fn for_seeded_table(
        source: &BlockSource,
        graph: &BipartiteRegularGraph,
        graph_seed: u64,
        oracle_seed: u64,
    ) -> Self {
        Manifest {
            graph_seed: Some(graph_seed),
            hash_alg: TABLE_PRF.into(),
            oracle_seed: Some(oracle_seed),
            ..Self::base(source, graph)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Version {
                found: self.version,
                expected: MANIFEST_VERSION,
            });
        }
        if self.n == 0 || self.ell == 0 || self.degree == 0 {
            return Err(Error::malformed("manifest", "n, ell and degree must be positive"));
        }
        if self.graph_seed.is_some() == self.graph_file_hash.is_some() {
            return Err(Error::malformed(
                "manifest",
                "exactly one of graph_seed and graph_file_hash is required",
            ));
        }
        if self.hash_alg == TABLE_PRF {
            if self.oracle_seed.is_none() {
                return Err(Error::malformed("manifest", "table oracle needs oracle_seed"));
            }
        } else {
            self.hash_alg.parse::<HashAlg>()?;
            hex::decode(&self.domain_sep).map_err(|e| Error::malformed("manifest", e.to_string()))?;
            if self.oracle_seed.is_some() {
                return Err(Error::malformed("manifest", "oracle_seed set for a hash oracle"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn build_oracle(&self) -> Result<Box<dyn RandomOracle>> {
        self.validate()?;
        if self.hash_alg == TABLE_PRF {
            return Ok(Box::new(TableOracle::new(self.oracle_seed.unwrap(), self.n)?));
        }
        let domain = hex::decode(&self.domain_sep).map_err(|e| Error::malformed("manifest", e.to_string()))?;
        Ok(Box::new(KeyedHashOracle::new(self.hash_alg.parse()?, &domain, self.n)?))
    }

    /// Regenerates the graph from its seed, or loads `graph_file` and
    /// checks it against the recorded hash.
    pub fn load_graph(&self, graph_file: Option<&Path>) -> Result<BipartiteRegularGraph> {
        self.validate()?;
        let graph = match (self.graph_seed, graph_file) {
            (Some(seed), _) => sample_regular_graph(self.ell, self.degree, seed)?,
            (None, Some(path)) => {
                let g = BipartiteRegularGraph::read_file(path)?;
                let want = self.graph_file_hash.as_deref().unwrap();
                if g.content_hash() != want {
                    return Err(Error::malformed("graph file", "content hash differs from manifest"));
                }
                g
            }
            (None, None) => {
                return Err(Error::invalid("manifest names a graph file; supply its path"));
            }
        };
        if graph.ell() != self.ell || graph.degree() != self.degree {
            return Err(Error::DimensionMismatch("graph does not match manifest".into()));
        }
        Ok(graph)
    }
}
