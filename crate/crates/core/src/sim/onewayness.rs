//! How often can an adversary holding the derived key hit `threshold`
//! distinct key-defining oracle arguments?

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bad_query::TrackedOracle;
use super::data::DataSampler;
use super::env::{DataEnv, RealEnv};
use super::stats::{trial_rng, within_upper_3sigma};
use crate::bits::Bits;
use crate::disperser::{min_expansion, BipartiteRegularGraph};
use crate::error::{Error, Result};
use crate::kdf::{derive_block, query_for_block, BlockSource};
use crate::oracle::{encode_query, TableOracle};

pub trait OnewaynessAdversary: Sync {
    fn name(&self) -> &str;
    /// Runs against the derived key. Errors end the run; bad queries made so
    /// far still count.
    fn run(
        &self,
        key: &[Bits],
        graph: &BipartiteRegularGraph,
        env: &mut dyn DataEnv,
        rng: &mut ChaCha20Rng,
    ) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OnewaynessConfig {
    /// Leakage budget `λ`.
    pub lambda: u64,
    /// Oracle query cap `q`.
    pub query_cap: u64,
    /// Plays the role of `ℓ^e`.
    pub threshold: usize,
    pub trials: u64,
    pub seed: u64,
}

/// The guessing-player bound with `ℓ^d → degree`, `ℓ^e → threshold` and
/// `δn = degree·n + log ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlayerBound {
    pub value: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// `1 − min|N(S)|/ℓ` over `threshold`-subsets `S`.
    pub eta: f64,
    /// `p − λ/(ℓn) > β > 4η` and `(1−η)ℓ > ℓ − ⌊βℓ/4⌋`.
    pub hypothesis_met: bool,
}

pub fn player_bound(graph: &BipartiteRegularGraph, n: usize, p: f64, cfg: &OnewaynessConfig) -> Result<PlayerBound> {
    let ell = graph.ell() as f64;
    let nf = n as f64;
    let t = cfg.threshold.min(graph.ell());
    let eta = if t == 0 {
        1.0
    } else {
        1.0 - min_expansion(graph, t)? as f64 / ell
    };
    let log_l = ell.log2();
    let log_q = (cfg.query_cap.max(1) as f64).log2();
    let deg = graph.degree() as f64;
    let lam = cfg.lambda as f64 / (ell * nf);
    let thr = cfg.threshold as f64;
    let eval = |eps: f64, beta: f64| {
        (-eps * nf).exp2()
            + (-(deg * nf + log_l - 1.0)).exp2()
            + 4.0 * ell * ell * (-beta * nf / 4.0).exp2()
            + (-nf * ((p - beta - lam) * ell - thr * (log_q + log_l) / nf - eps - 4.0 * (deg + log_l / nf))).exp2()
    };
    let top = p - lam;
    let mut best = PlayerBound {
        value: f64::INFINITY,
        epsilon: 0.0,
        beta: 0.0,
        eta,
        hypothesis_met: false,
    };
    if top <= 0.0 {
        return Ok(best);
    }
    for bi in 1..200 {
        let beta = top * bi as f64 / 200.0;
        let met = beta > 4.0 * eta && (1.0 - eta) * ell > ell - (beta * ell / 4.0).floor();
        for ei in 1..=400 {
            let eps = ei as f64 * 0.05;
            let value = eval(eps, beta);
            if (met, -value) > (best.hypothesis_met, -best.value) {
                best = PlayerBound {
                    value,
                    epsilon: eps,
                    beta,
                    eta,
                    hypothesis_met: met,
                };
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OnewaynessReport {
    pub adversary: String,
    pub trials: u64,
    pub hits: u64,
    pub empirical: f64,
    pub max_bad_indices: usize,
    pub bound: PlayerBound,
    /// `empirical ≤ bound + 3σ`.
    pub consistent: bool,
}

/// One trial: fresh `D` and oracle, returns the number of distinct bad
/// indices the adversary produced.
pub fn onewayness_trial(
    sampler: &dyn DataSampler,
    graph: &BipartiteRegularGraph,
    adversary: &dyn OnewaynessAdversary,
    cfg: &OnewaynessConfig,
    rng: &mut ChaCha20Rng,
) -> Result<usize> {
    let n = sampler.block_bits();
    let data = sampler.sample(rng);
    let source = BlockSource::from_blocks(&data)?;
    let oracle = TableOracle::new(rng.gen(), n)?;
    let key = (0..graph.ell())
        .map(|i| derive_block(&source, graph, &oracle, i))
        .collect::<Result<Vec<_>>>()?;
    let tracked = TrackedOracle::for_data(oracle, &source, graph)?;
    let mut env = RealEnv::new(data, &tracked, cfg.lambda, cfg.query_cap);
    let mut tape = ChaCha20Rng::seed_from_u64(rng.gen());
    // a refused leak or exhausted query budget just ends the run
    let _ = adversary.run(&key, graph, &mut env, &mut tape);
    Ok(tracked.bad_indices().len())
}

pub fn estimate_onewayness(
    sampler: &dyn DataSampler,
    graph: &BipartiteRegularGraph,
    adversary: &dyn OnewaynessAdversary,
    cfg: &OnewaynessConfig,
) -> Result<OnewaynessReport> {
    if sampler.block_count() != graph.ell() {
        return Err(Error::DimensionMismatch(format!(
            "sampler has {} blocks, graph has ℓ = {}",
            sampler.block_count(),
            graph.ell()
        )));
    }
    let counts = (0..cfg.trials)
        .into_par_iter()
        .map(|t| onewayness_trial(sampler, graph, adversary, cfg, &mut trial_rng(cfg.seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let hits = counts.iter().filter(|&&c| c >= cfg.threshold).count() as u64;
    let empirical = if cfg.trials == 0 {
        0.0
    } else {
        hits as f64 / cfg.trials as f64
    };
    let bound = player_bound(graph, sampler.block_bits(), sampler.entropy_rate(), cfg)?;
    Ok(OnewaynessReport {
        adversary: adversary.name().into(),
        trials: cfg.trials,
        hits,
        empirical,
        max_bad_indices: counts.iter().copied().max().unwrap_or(0),
        consistent: within_upper_3sigma(empirical, bound.value, cfg.trials),
        bound,
    })
}

/// Spends its whole query budget on uniformly random well-formed
/// arguments.
pub struct BruteForce {
    pub queries: u64,
}

impl OnewaynessAdversary for BruteForce {
    fn name(&self) -> &str {
        "brute-force"
    }

    fn run(
        &self,
        key: &[Bits],
        graph: &BipartiteRegularGraph,
        env: &mut dyn DataEnv,
        rng: &mut ChaCha20Rng,
    ) -> Result<()> {
        let n = key.first().map_or(0, Bits::len);
        for _ in 0..self.queries {
            let i = rng.gen_range(0..graph.ell() as u32);
            let payload = Bits::random(n * graph.degree(), rng as &mut dyn RngCore);
            env.query(&encode_query(i, &payload))?;
        }
        Ok(())
    }
}

/// Out-of-model control: leaks all of `D` and queries the designated
/// arguments of the first `count` vertices.
pub struct GivenData {
    pub count: usize,
}

impl OnewaynessAdversary for GivenData {
    fn name(&self) -> &str {
        "given-data"
    }

    fn run(
        &self,
        key: &[Bits],
        graph: &BipartiteRegularGraph,
        env: &mut dyn DataEnv,
        _rng: &mut ChaCha20Rng,
    ) -> Result<()> {
        let n = key.first().map_or(0, Bits::len);
        let ell = graph.ell();
        let all = env.leak(ell * n, &|d, _| Bits::concat(d))?;
        let blocks: Vec<Bits> = (0..ell).map(|j| all.slice(j * n, n)).collect();
        let source = BlockSource::from_blocks(&blocks)?;
        for i in 0..self.count.min(ell) {
            env.query(&query_for_block(&source, graph, i)?.0)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disperser::sample_regular_graph;
    use crate::sim::data::UniformBlocks;

    fn cfg(lambda: u64, threshold: usize) -> OnewaynessConfig {
        OnewaynessConfig {
            lambda,
            query_cap: 64,
            threshold,
            trials: 40,
            seed: 5,
        }
    }

    #[test]
    fn given_data_always_reaches_threshold() {
        let g = sample_regular_graph(4, 2, 0).unwrap();
        let s = UniformBlocks { n: 8, ell: 4 };
        let r = estimate_onewayness(&s, &g, &GivenData { count: 2 }, &cfg(32, 2)).unwrap();
        assert_eq!(r.hits, 40);
        // without the budget to see D the control gets nowhere
        let r = estimate_onewayness(&s, &g, &GivenData { count: 2 }, &cfg(31, 2)).unwrap();
        assert_eq!(r.hits, 0);
    }

    #[test]
    fn threshold_above_query_cap_is_unreachable() {
        let g = sample_regular_graph(4, 1, 0).unwrap();
        let s = UniformBlocks { n: 2, ell: 4 };
        let c = OnewaynessConfig {
            query_cap: 3,
            ..cfg(0, 4)
        };
        let r = estimate_onewayness(&s, &g, &BruteForce { queries: 100 }, &c).unwrap();
        assert_eq!(r.hits, 0);
        assert!(r.max_bad_indices <= 3);
    }

    #[test]
    fn nothing_queried_means_nothing_bad() {
        let g = sample_regular_graph(4, 2, 0).unwrap();
        let s = UniformBlocks { n: 8, ell: 4 };
        let r = estimate_onewayness(&s, &g, &BruteForce { queries: 0 }, &cfg(0, 1)).unwrap();
        assert_eq!(r.max_bad_indices, 0);
    }
}
