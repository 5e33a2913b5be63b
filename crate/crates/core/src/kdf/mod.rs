//! Block-local key derivation through a disperser graph.
//!
//! Derived block `i` hashes its index together with the `d` source blocks
//! selected by row `i` of the graph, so any single key block costs `d` block
//! reads and one oracle call, whatever the size of the data.

mod derive;
mod manifest;
mod source;

pub use derive::{
    derive_block, derive_block_traced, derive_key, derive_key_sequential, query_for_block, twist_to_key, DerivedKey,
};
pub use manifest::{Manifest, MANIFEST_VERSION, TABLE_PRF};
pub use source::{split_blocks, BlockSource, DEFAULT_BLOCK_BITS};
