//! Right-regular bipartite dispersers: storage, sampling and verification.
//!
//! Right vertex `i` selects the input blocks `σ^i_1, …, σ^i_d` that feed
//! derived block `i`. The graph is a `(K, L)`-disperser when every set of
//! `K` right vertices touches at least `L` left vertices.

mod check;
mod graph;
mod sample;

pub use check::{
    binomial, check_disperser, min_expansion, superset_monotonicity_check, CheckMode, CheckedMode, DisperserWitness,
    EXHAUSTIVE_LIMIT,
};
pub use graph::{BipartiteRegularGraph, MAX_VERTICES};
pub use sample::{sample_regular_graph, sample_row};
