//! Random oracles with `n`-bit outputs.
//!
//! Every oracle is a pure function of its construction parameters and the
//! queried message, so a single instance can be shared freely across
//! threads.

mod encode;
mod hash;
mod table;
mod twist;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;

pub use encode::{decode_query, encode_query, INDEX_BYTES};
pub use hash::{HashAlg, KeyedHashOracle, OracleConfig, HASH_ENV, KDF_DOMAIN, MERKLE_DOMAIN};
pub use table::TableOracle;
pub use twist::{twist, TwistList, Twisted};

/// How an oracle was built, for manifests and reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleDescriptor {
    KeyedHash {
        hash_alg: String,
        domain_sep: String,
        n: usize,
    },
    Table {
        seed: u64,
        n: usize,
    },
    Twisted {
        base: Box<OracleDescriptor>,
        twists: usize,
    },
}

pub trait RandomOracle: Send + Sync {
    fn output_bits(&self) -> usize;
    fn query(&self, msg: &[u8]) -> Bits;
    fn descriptor(&self) -> OracleDescriptor;
}

impl<T: RandomOracle + ?Sized> RandomOracle for &T {
    fn output_bits(&self) -> usize {
        (**self).output_bits()
    }
    fn query(&self, msg: &[u8]) -> Bits {
        (**self).query(msg)
    }
    fn descriptor(&self) -> OracleDescriptor {
        (**self).descriptor()
    }
}

impl<T: RandomOracle + ?Sized> RandomOracle for Box<T> {
    fn output_bits(&self) -> usize {
        (**self).output_bits()
    }
    fn query(&self, msg: &[u8]) -> Bits {
        (**self).query(msg)
    }
    fn descriptor(&self) -> OracleDescriptor {
        (**self).descriptor()
    }
}

impl<T: RandomOracle + ?Sized> RandomOracle for Arc<T> {
    fn output_bits(&self) -> usize {
        (**self).output_bits()
    }
    fn query(&self, msg: &[u8]) -> Bits {
        (**self).query(msg)
    }
    fn descriptor(&self) -> OracleDescriptor {
        (**self).descriptor()
    }
}
