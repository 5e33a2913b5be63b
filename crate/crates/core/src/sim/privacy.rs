//! Real run of a key adversary against `Disperse(D, H)` next to the
//! simulator that only has leakage access to `D`.
//!
//! The simulator draws its own oracle `H'` and a uniform key `K`, leaks the
//! bad-query list of the adversary run against `H'{D → K}`, then replays the
//! adversary on `K` with `H'`, answering listed queries (and repeats of
//! their arguments) with the matching key block. A list of `threshold` or
//! more entries is replaced by `⊥`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bad_query::TrackedOracle;
use super::data::{data_key, DataSampler};
use super::env::{bits_for, DataEnv, LeakFn, RealEnv, TraceEvent};
use super::ledger::{LeakageLedger, LeakageOracle};
use super::stats::{total_variation, trial_rng};
use crate::bits::Bits;
use crate::disperser::BipartiteRegularGraph;
use crate::error::{Error, Result};
use crate::kdf::{derive_block, twist_to_key, BlockSource};
use crate::oracle::{RandomOracle, TableOracle};

pub trait KeyAdversary: Sync {
    fn name(&self) -> &str;
    fn run(&self, key: &[Bits], env: &mut dyn DataEnv, rng: &mut ChaCha20Rng) -> Result<Vec<u8>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrivacyConfig {
    pub lambda: u64,
    pub query_cap: u64,
    /// `None` means no cutoff.
    pub threshold: Option<usize>,
    pub trials: u64,
    pub seed: u64,
}

/// Output (`None` for `⊥` or a failed run) with the interaction trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub output: Option<Vec<u8>>,
    pub trace: Vec<TraceEvent>,
    pub ledger: LeakageLedger,
}

/// The adversary on the key derived from `data` with `oracle`.
pub fn real_run<O: RandomOracle>(
    adversary: &dyn KeyAdversary,
    data: Vec<Bits>,
    graph: &BipartiteRegularGraph,
    oracle: O,
    cfg: &PrivacyConfig,
    tape_seed: u64,
) -> Result<Run> {
    let source = BlockSource::from_blocks(&data)?;
    let key = (0..graph.ell())
        .map(|i| derive_block(&source, graph, &oracle, i))
        .collect::<Result<Vec<_>>>()?;
    let tracked = TrackedOracle::for_data(oracle, &source, graph)?;
    let mut env = RealEnv::new(data, &tracked, cfg.lambda, cfg.query_cap);
    let output = adversary
        .run(&key, &mut env, &mut ChaCha20Rng::seed_from_u64(tape_seed))
        .ok();
    Ok(Run {
        output,
        ledger: env.ledger(),
        trace: env.trace,
    })
}

fn twisted(h: &TableOracle, data: &[Bits], graph: &BipartiteRegularGraph, key: &[Bits]) -> impl RandomOracle {
    let source = BlockSource::from_blocks(data).expect("shape checked");
    twist_to_key(h.clone(), &source, graph, key).expect("shape checked")
}

/// Bad-query list of the adversary run on `key` against `H'{D → K}`.
fn indices_of(
    adversary: &dyn KeyAdversary,
    data: &[Bits],
    graph: &BipartiteRegularGraph,
    h: &TableOracle,
    key: &[Bits],
    cfg: &PrivacyConfig,
    tape_seed: u64,
) -> Vec<(u64, usize)> {
    let source = BlockSource::from_blocks(data).expect("shape checked");
    let tracked = TrackedOracle::for_data(twisted(h, data, graph, key), &source, graph).expect("shape checked");
    let mut env = RealEnv::new(data.to_vec(), &tracked, cfg.lambda, cfg.query_cap);
    let _ = adversary.run(key, &mut env, &mut ChaCha20Rng::seed_from_u64(tape_seed));
    tracked.bad_indices()
}

struct SimEnv<'a> {
    h: &'a TableOracle,
    key: &'a [Bits],
    graph: &'a BipartiteRegularGraph,
    leak: &'a mut LeakageOracle<Vec<Bits>>,
    listed: HashMap<u64, usize>,
    memo: HashMap<Vec<u8>, usize>,
    ordinal: u64,
    query_cap: u64,
    own_budget: u64,
    own_spent: u64,
    trace: Vec<TraceEvent>,
}

impl DataEnv for SimEnv<'_> {
    fn query(&mut self, msg: &[u8]) -> Result<Bits> {
        if self.ordinal >= self.query_cap {
            return Err(Error::QueryBudgetExceeded(self.query_cap));
        }
        self.ordinal += 1;
        if let Some(&i) = self.listed.get(&self.ordinal) {
            self.memo.insert(msg.to_vec(), i);
        }
        let answer = match self.memo.get(msg) {
            Some(&i) => self.key[i].clone(),
            None => self.h.query(msg),
        };
        self.trace.push(TraceEvent::Query {
            msg: msg.to_vec(),
            answer: answer.clone(),
        });
        Ok(answer)
    }

    fn leak(&mut self, declared_bits: usize, f: LeakFn<'_>) -> Result<Bits> {
        let want = declared_bits as u64;
        if want > self.own_budget - self.own_spent {
            return Err(Error::BudgetExceeded {
                requested: want,
                remaining: self.own_budget - self.own_spent,
            });
        }
        let (h, key, graph) = (self.h, self.key, self.graph);
        let answer = self.leak.leak(declared_bits, |d| f(d, &twisted(h, d, graph, key)))?;
        self.own_spent += want;
        self.trace.push(TraceEvent::Leak {
            bits: declared_bits,
            answer: answer.clone(),
        });
        Ok(answer)
    }
}

/// Extra leakage the simulator may spend on the list: a count (or `⊥`)
/// and at most `min(threshold − 1, ℓ)` entries of `⌈log q⌉ + ⌈log ℓ⌉` bits.
pub fn simulator_overhead(ell: usize, query_cap: u64, threshold: Option<usize>) -> u64 {
    let entries = threshold.map_or(ell, |t| t.saturating_sub(1).min(ell));
    let count_bits = bits_for(ell as u64 + 2);
    (count_bits + entries * (bits_for(query_cap) + bits_for(ell as u64))) as u64
}

/// The simulator with its own randomness `(h, key, tape)`; `data` is only
/// touched inside leakage functions.
pub fn simulate(
    adversary: &dyn KeyAdversary,
    data: Vec<Bits>,
    graph: &BipartiteRegularGraph,
    h: &TableOracle,
    key: &[Bits],
    cfg: &PrivacyConfig,
    tape_seed: u64,
) -> Result<Run> {
    let ell = graph.ell();
    if key.len() != ell || data.len() != ell {
        return Err(Error::DimensionMismatch("data, key and graph disagree on ℓ".into()));
    }
    twist_to_key(h.clone(), &BlockSource::from_blocks(&data)?, graph, key)?;
    let budget = cfg.lambda + simulator_overhead(ell, cfg.query_cap, cfg.threshold);
    let mut leak = LeakageOracle::new(data, budget);
    let count_bits = bits_for(ell as u64 + 2);
    let (ord_bits, idx_bits) = (bits_for(cfg.query_cap), bits_for(ell as u64));
    let bottom = ell as u64 + 1;
    let cut = |list: &Vec<(u64, usize)>| cfg.threshold.is_some_and(|t| list.len() >= t);

    let count = leak
        .leak(count_bits, |d| {
            let list = indices_of(adversary, d, graph, h, key, cfg, tape_seed);
            Bits::from_u64(if cut(&list) { bottom } else { list.len() as u64 }, count_bits)
        })?
        .to_u64();
    if count == bottom {
        return Ok(Run {
            output: None,
            trace: Vec::new(),
            ledger: leak.into_ledger(),
        });
    }
    let entry = ord_bits + idx_bits;
    let packed = leak.leak(count as usize * entry, |d| {
        let list = indices_of(adversary, d, graph, h, key, cfg, tape_seed);
        let mut out = Bits::default();
        for (k, i) in list {
            out.push_bits(&Bits::from_u64(k - 1, ord_bits));
            out.push_bits(&Bits::from_u64(i as u64, idx_bits));
        }
        out
    })?;
    let listed = (0..count as usize)
        .map(|j| {
            let k = packed.slice(j * entry, ord_bits).to_u64() + 1;
            let i = packed.slice(j * entry + ord_bits, idx_bits).to_u64() as usize;
            (k, i)
        })
        .collect();
    let mut env = SimEnv {
        h,
        key,
        graph,
        leak: &mut leak,
        listed,
        memo: HashMap::new(),
        ordinal: 0,
        query_cap: cfg.query_cap,
        own_budget: cfg.lambda,
        own_spent: 0,
        trace: Vec::new(),
    };
    let output = adversary
        .run(key, &mut env, &mut ChaCha20Rng::seed_from_u64(tape_seed))
        .ok();
    let trace = std::mem::take(&mut env.trace);
    Ok(Run {
        output,
        trace,
        ledger: leak.into_ledger(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivacyReport {
    pub adversary: String,
    pub trials: u64,
    /// Total variation between the `(output, D)` histograms.
    pub distance: f64,
    pub simulator_bottoms: u64,
    pub real_failures: u64,
    /// Largest leakage the simulator spent beyond `λ`.
    pub max_overhead_bits: u64,
}

type Cell = (Option<Vec<u8>>, Vec<u8>);

fn check_shape(sampler: &dyn DataSampler, graph: &BipartiteRegularGraph) -> Result<()> {
    if sampler.block_count() != graph.ell() {
        return Err(Error::DimensionMismatch(format!(
            "sampler has {} blocks, graph has ℓ = {}",
            sampler.block_count(),
            graph.ell()
        )));
    }
    Ok(())
}

/// Independent real and simulated trials, compared by histogram.
pub fn run_privacy_simulation(
    adversary: &dyn KeyAdversary,
    sampler: &dyn DataSampler,
    graph: &BipartiteRegularGraph,
    cfg: &PrivacyConfig,
) -> Result<PrivacyReport> {
    check_shape(sampler, graph)?;
    let n = sampler.block_bits();
    let pairs = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, 2 * t);
            let data = sampler.sample(&mut rng);
            let oracle = TableOracle::new(rng.gen(), n)?;
            let real = real_run(adversary, data.clone(), graph, oracle, cfg, rng.gen())?;
            let real_cell: Cell = (real.output, data_key(&data));

            let mut rng = trial_rng(cfg.seed, 2 * t + 1);
            let data = sampler.sample(&mut rng);
            let h = TableOracle::new(rng.gen(), n)?;
            let key: Vec<Bits> = (0..graph.ell()).map(|_| Bits::random(n, &mut rng)).collect();
            let sim = simulate(adversary, data.clone(), graph, &h, &key, cfg, rng.gen())?;
            let overhead = sim.ledger.spent.saturating_sub(cfg.lambda);
            Ok((real_cell, (sim.output, data_key(&data)), overhead))
        })
        .collect::<Result<Vec<(Cell, Cell, u64)>>>()?;
    let mut real: BTreeMap<Cell, u64> = BTreeMap::new();
    let mut sim: BTreeMap<Cell, u64> = BTreeMap::new();
    for (r, s, _) in &pairs {
        *real.entry(r.clone()).or_default() += 1;
        *sim.entry(s.clone()).or_default() += 1;
    }
    Ok(PrivacyReport {
        adversary: adversary.name().into(),
        trials: cfg.trials,
        distance: total_variation(&real, &sim),
        simulator_bottoms: pairs.iter().filter(|(_, s, _)| s.0.is_none()).count() as u64,
        real_failures: pairs.iter().filter(|(r, _, _)| r.0.is_none()).count() as u64,
        max_overhead_bits: pairs.iter().map(|p| p.2).max().unwrap_or(0),
    })
}

/// Couples one real run with one simulated run: the real oracle is
/// `H'{D → K}` for the simulator's own `H'` and `K`, so the real key is
/// `K`. Without a cutoff the two traces must coincide.
pub fn coupled_runs(
    adversary: &dyn KeyAdversary,
    sampler: &dyn DataSampler,
    graph: &BipartiteRegularGraph,
    cfg: &PrivacyConfig,
    trial: u64,
) -> Result<(Run, Run)> {
    check_shape(sampler, graph)?;
    let n = sampler.block_bits();
    let mut rng = trial_rng(cfg.seed, trial);
    let data = sampler.sample(&mut rng);
    let h = TableOracle::new(rng.gen(), n)?;
    let key: Vec<Bits> = (0..graph.ell()).map(|_| Bits::random(n, &mut rng)).collect();
    let tape = rng.gen();
    let real_oracle = twist_to_key(h.clone(), &BlockSource::from_blocks(&data)?, graph, &key)?;
    let real = real_run(adversary, data.clone(), graph, real_oracle, cfg, tape)?;
    let sim = simulate(adversary, data, graph, &h, &key, cfg, tape)?;
    Ok((real, sim))
}

/// Outputs a fixed string.
pub struct ConstantOutput(pub Vec<u8>);

impl KeyAdversary for ConstantOutput {
    fn name(&self) -> &str {
        "constant"
    }

    fn run(&self, _: &[Bits], _: &mut dyn DataEnv, _: &mut ChaCha20Rng) -> Result<Vec<u8>> {
        Ok(self.0.clone())
    }
}

/// Outputs `key[0]`.
pub struct FirstKeyBlock;

impl KeyAdversary for FirstKeyBlock {
    fn name(&self) -> &str {
        "first-key-block"
    }

    fn run(&self, key: &[Bits], _: &mut dyn DataEnv, _: &mut ChaCha20Rng) -> Result<Vec<u8>> {
        Ok(key[0].as_bytes().to_vec())
    }
}

/// Leaks data block `index` and outputs it.
pub struct LeakBlock {
    pub index: usize,
}

impl KeyAdversary for LeakBlock {
    fn name(&self) -> &str {
        "leak-block"
    }

    fn run(&self, key: &[Bits], env: &mut dyn DataEnv, _: &mut ChaCha20Rng) -> Result<Vec<u8>> {
        let n = key[0].len();
        let i = self.index;
        Ok(env.leak(n, &move |d, _| d[i].clone())?.into_bytes())
    }
}

/// Leaks the blocks behind `key[vertex]`, recomputes it with a (bad) oracle
/// query and outputs whether it matched.
pub struct RecomputeBlock {
    pub vertex: usize,
    pub graph: BipartiteRegularGraph,
}

impl KeyAdversary for RecomputeBlock {
    fn name(&self) -> &str {
        "recompute-block"
    }

    fn run(&self, key: &[Bits], env: &mut dyn DataEnv, _: &mut ChaCha20Rng) -> Result<Vec<u8>> {
        let n = key[0].len();
        let row = self.graph.neighbors(self.vertex)?.to_vec();
        let payload = env.leak(n * row.len(), &|d, _| Bits::concat(row.iter().map(|&j| &d[j as usize])))?;
        let answer = env.query(&crate::oracle::encode_query(self.vertex as u32, &payload))?;
        Ok(vec![(answer == key[self.vertex]) as u8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disperser::sample_regular_graph;
    use crate::entropy::JointDistribution;
    use crate::sim::data::{TableSampler, UniformBlocks};

    fn cfg(threshold: Option<usize>, trials: u64) -> PrivacyConfig {
        PrivacyConfig {
            lambda: 16,
            query_cap: 16,
            threshold,
            trials,
            seed: 11,
        }
    }

    #[test]
    fn traces_coincide_without_cutoff() {
        let g = sample_regular_graph(4, 2, 3).unwrap();
        let s = UniformBlocks { n: 4, ell: 4 };
        let advs: Vec<Box<dyn KeyAdversary>> = vec![
            Box::new(ConstantOutput(vec![7])),
            Box::new(FirstKeyBlock),
            Box::new(LeakBlock { index: 2 }),
            Box::new(RecomputeBlock {
                vertex: 1,
                graph: g.clone(),
            }),
        ];
        for a in &advs {
            for t in 0..20 {
                let (real, sim) = coupled_runs(a.as_ref(), &s, &g, &cfg(None, 0), t).unwrap();
                assert_eq!(real.output, sim.output, "{}", a.name());
                assert_eq!(real.trace, sim.trace, "{}", a.name());
            }
        }
    }

    #[test]
    fn recomputation_needs_the_list() {
        let g = sample_regular_graph(4, 2, 3).unwrap();
        let s = UniformBlocks { n: 4, ell: 4 };
        let a = RecomputeBlock {
            vertex: 1,
            graph: g.clone(),
        };
        let (real, sim) = coupled_runs(&a, &s, &g, &cfg(None, 0), 0).unwrap();
        assert_eq!(real.output, Some(vec![1]));
        // its own 8-bit leak, a 3-bit count and one 4+2-bit entry
        assert_eq!(sim.ledger.spent, 8 + 3 + 6);
        let (_, sim) = coupled_runs(&a, &s, &g, &cfg(Some(1), 0), 0).unwrap();
        assert_eq!(sim.output, None);
        let r = run_privacy_simulation(&a, &s, &g, &cfg(Some(1), 200)).unwrap();
        assert_eq!(r.simulator_bottoms, 200);
        assert!(r.distance > 0.99);
    }

    #[test]
    fn constant_output_has_zero_distance() {
        let d = JointDistribution::from_probabilities(2, 1, [(vec![0, 0], 0.5), (vec![1, 1], 0.5)]).unwrap();
        let s = TableSampler::new(d).unwrap();
        let g = sample_regular_graph(2, 1, 0).unwrap();
        let r = run_privacy_simulation(&ConstantOutput(vec![]), &s, &g, &cfg(Some(1), 500)).unwrap();
        assert!(r.distance < 0.1);
        assert_eq!(r.simulator_bottoms, 0);
    }
}
