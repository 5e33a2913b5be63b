use rayon::prelude::*;

use super::manifest::Manifest;
use super::source::BlockSource;
use crate::bits::Bits;
use crate::disperser::BipartiteRegularGraph;
use crate::error::{Error, Result};
use crate::oracle::{encode_query, twist, RandomOracle, TwistList, Twisted};

/// The derived key `D'_1 … D'_ℓ` with the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedKey {
    pub blocks: Vec<Bits>,
    pub manifest: Manifest,
}

impl DerivedKey {
    pub fn to_bits(&self) -> Bits {
        Bits::concat(&self.blocks)
    }
}

fn check_dims<O: RandomOracle + ?Sized>(source: &BlockSource, graph: &BipartiteRegularGraph, oracle: &O) -> Result<()> {
    if graph.ell() != source.block_count() {
        return Err(Error::DimensionMismatch(format!(
            "graph has ℓ = {}, data has {} blocks",
            graph.ell(),
            source.block_count()
        )));
    }
    if oracle.output_bits() != source.block_bits() {
        return Err(Error::DimensionMismatch(format!(
            "oracle outputs {} bits, blocks have {}",
            oracle.output_bits(),
            source.block_bits()
        )));
    }
    Ok(())
}

/// The oracle argument `encode(i, D_σ1 ‖ … ‖ D_σd)` for right vertex `i`,
/// together with the block indices read to form it.
pub fn query_for_block(source: &BlockSource, graph: &BipartiteRegularGraph, i: usize) -> Result<(Vec<u8>, Vec<usize>)> {
    let row = graph.neighbors(i)?;
    let mut payload = Bits::default();
    let mut reads = Vec::with_capacity(row.len());
    for &j in row {
        payload.push_bits(&source.read_block(j as usize)?);
        reads.push(j as usize);
    }
    Ok((encode_query(i as u32, &payload), reads))
}

/// `D'_i = H(encode(i, D_σ1 ‖ … ‖ D_σd))`.
pub fn derive_block<O: RandomOracle + ?Sized>(
    source: &BlockSource,
    graph: &BipartiteRegularGraph,
    oracle: &O,
    i: usize,
) -> Result<Bits> {
    derive_block_traced(source, graph, oracle, i).map(|(b, _)| b)
}

/// [`derive_block`] returning also the source blocks it fetched, in order.
pub fn derive_block_traced<O: RandomOracle + ?Sized>(
    source: &BlockSource,
    graph: &BipartiteRegularGraph,
    oracle: &O,
    i: usize,
) -> Result<(Bits, Vec<usize>)> {
    check_dims(source, graph, oracle)?;
    let (msg, reads) = query_for_block(source, graph, i)?;
    Ok((oracle.query(&msg), reads))
}

/// All `ℓ` blocks, derived in parallel.
pub fn derive_key<O: RandomOracle + ?Sized>(
    source: &BlockSource,
    graph: &BipartiteRegularGraph,
    oracle: &O,
    manifest: Manifest,
) -> Result<DerivedKey> {
    check_dims(source, graph, oracle)?;
    let blocks = (0..graph.ell())
        .into_par_iter()
        .map(|i| derive_block(source, graph, oracle, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivedKey { blocks, manifest })
}

/// [`derive_key`] on the calling thread, block by block.
pub fn derive_key_sequential<O: RandomOracle + ?Sized>(
    source: &BlockSource,
    graph: &BipartiteRegularGraph,
    oracle: &O,
    manifest: Manifest,
) -> Result<DerivedKey> {
    check_dims(source, graph, oracle)?;
    let blocks = (0..graph.ell())
        .map(|i| derive_block(source, graph, oracle, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivedKey { blocks, manifest })
}

/// `H{D → K}`: the oracle reprogrammed so that each designated argument
/// `encode(i, D_σ^i)` answers `K_i`.
pub fn twist_to_key<O: RandomOracle>(
    oracle: O,
    source: &BlockSource,
    graph: &BipartiteRegularGraph,
    key: &[Bits],
) -> Result<Twisted<O>> {
    check_dims(source, graph, &oracle)?;
    if key.len() != graph.ell() {
        return Err(Error::DimensionMismatch(format!(
            "key has {} blocks, graph has ℓ = {}",
            key.len(),
            graph.ell()
        )));
    }
    let entries = key
        .iter()
        .enumerate()
        .map(|(i, k)| Ok((query_for_block(source, graph, i)?.0, k.clone())))
        .collect::<Result<Vec<_>>>()?;
    twist(oracle, TwistList::new(entries)?)
}
