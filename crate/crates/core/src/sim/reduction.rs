//! The uniform-key adversary built from a disk adversary.
//!
//! The wrapper samples its own mock `D` and oracle `H`, and runs the disk
//! adversary as if the key were `Disperse(D, H{D → K})`, which equals the
//! real key `K`. Before each step it leaks, from `K`, the values behind the
//! bad queries the step is about to make (`⌈log q⌉ + n` bits each, after a
//! count). Leakage functions of the inner adversary are evaluated against
//! `H{D → K}`. When the real budget runs out it stops with `⊥`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bad_query::designated_queries;
use super::data::DataSampler;
use super::env::{bits_for, DataEnv, LeakFn};
use super::game::{run_security_game, Adversary, AdversaryStep, GameConfig, GameTranscript, Outcome};
use super::ledger::LeakageOracle;
use super::stats::{binomial_sigma, trial_rng};
use crate::auth::{decode_challenge, AuthChallenger, Challenges, DiskKey, MerkleHasher, MerkleProof, MerkleTree};
use crate::bits::Bits;
use crate::disperser::BipartiteRegularGraph;
use crate::error::{Error, Result};
use crate::kdf::{derive_block, twist_to_key, BlockSource};
use crate::oracle::{encode_query, RandomOracle, TableOracle};

/// An adversary of the game played on `Disperse(D, H)`: it sees the
/// oracle and leakage on `(D, H)`, never the key.
pub trait DiskAdversary: Clone + Send + Sync {
    fn name(&self) -> &str;
    fn next(&mut self, incoming: Option<&[u8]>, env: &mut dyn DataEnv, rng: &mut ChaCha20Rng) -> Result<AdversaryStep>;
}

fn blocks_of(source: &BlockSource) -> Vec<Bits> {
    (0..source.block_count())
        .map(|j| source.read_block(j).expect("index in range"))
        .collect()
}

/// Harness side of the disk game: oracle access with bad-query bookkeeping
/// in the game ledger.
pub struct DiskGameAdapter<A> {
    inner: A,
    query_cap: u64,
    designated: HashMap<Vec<u8>, usize>,
}

impl<A: DiskAdversary> DiskGameAdapter<A> {
    pub fn new(inner: A, query_cap: u64) -> Self {
        DiskGameAdapter {
            inner,
            query_cap,
            designated: HashMap::new(),
        }
    }
}

struct DiskEnv<'a> {
    leak: &'a mut LeakageOracle<DiskKey>,
    designated: &'a HashMap<Vec<u8>, usize>,
    query_cap: u64,
}

impl DataEnv for DiskEnv<'_> {
    fn query(&mut self, msg: &[u8]) -> Result<Bits> {
        let ledger = self.leak.ledger_mut();
        if ledger.oracle_queries >= self.query_cap {
            return Err(Error::QueryBudgetExceeded(self.query_cap));
        }
        let k = ledger.record_query();
        if let Some(&i) = self.designated.get(msg) {
            ledger.record_bad(k, i);
        }
        Ok(self.leak.secret().oracle.query(msg))
    }

    fn leak(&mut self, declared_bits: usize, f: LeakFn<'_>) -> Result<Bits> {
        self.leak.leak(declared_bits, |k| f(&blocks_of(&k.source), &*k.oracle))
    }
}

impl<A: DiskAdversary> Adversary<DiskKey> for DiskGameAdapter<A> {
    fn setup(&mut self, leak: &mut LeakageOracle<DiskKey>, _rng: &mut ChaCha20Rng) -> Result<()> {
        let k = leak.secret();
        self.designated = designated_queries(&k.source, &k.graph)?;
        Ok(())
    }

    fn next(
        &mut self,
        incoming: Option<&[u8]>,
        leak: &mut LeakageOracle<DiskKey>,
        rng: &mut ChaCha20Rng,
    ) -> Result<AdversaryStep> {
        let mut env = DiskEnv {
            leak,
            designated: &self.designated,
            query_cap: self.query_cap,
        };
        self.inner.next(incoming, &mut env, rng)
    }
}

struct Mock<A> {
    data: Vec<Bits>,
    source: BlockSource,
    h: TableOracle,
    designated: HashMap<Vec<u8>, usize>,
    inner: A,
    inner_rng: ChaCha20Rng,
    /// Key blocks learned so far, by right vertex.
    known: HashMap<usize, Bits>,
    ordinal: u64,
    inner_spent: u64,
    indices: Vec<(u64, usize)>,
}

/// `A′`: plays the uniform-key game with a disk adversary inside.
pub struct WrappedAdversary<'s, A> {
    template: A,
    sampler: &'s dyn DataSampler,
    graph: BipartiteRegularGraph,
    query_cap: u64,
    /// The inner adversary's own budget `λ − Δλ`.
    inner_budget: u64,
    mock: Option<Mock<A>>,
}

impl<'s, A: DiskAdversary> WrappedAdversary<'s, A> {
    pub fn new(
        template: A,
        sampler: &'s dyn DataSampler,
        graph: BipartiteRegularGraph,
        query_cap: u64,
        inner_budget: u64,
    ) -> Self {
        WrappedAdversary {
            template,
            sampler,
            graph,
            query_cap,
            inner_budget,
            mock: None,
        }
    }

    /// Bad-query list accumulated by the inner adversary.
    pub fn indices(&self) -> &[(u64, usize)] {
        self.mock.as_ref().map_or(&[], |m| &m.indices)
    }
}

/// `Δλ` for `messages` adversary turns and lists of fewer than `threshold`
/// entries.
pub fn wrapper_overhead(ell: usize, n: usize, query_cap: u64, threshold: usize, messages: usize) -> u64 {
    let entries = threshold.saturating_sub(1).min(ell);
    (messages * bits_for(ell as u64 + 1) + entries * (bits_for(query_cap) + n)) as u64
}

fn twisted_for(
    m_h: &TableOracle,
    source: &BlockSource,
    graph: &BipartiteRegularGraph,
    key: &[Bits],
) -> impl RandomOracle {
    twist_to_key(m_h.clone(), source, graph, key).expect("shape checked")
}

/// Runs one step of the inner adversary against `H{D → K}` on copies of
/// its state, returning the new bad queries it makes.
fn preview<A: DiskAdversary>(
    mock: &Mock<A>,
    graph: &BipartiteRegularGraph,
    key: &[Bits],
    incoming: Option<&[u8]>,
    query_cap: u64,
    inner_budget: u64,
) -> Vec<(u64, usize, Bits)> {
    struct Preview<'a, O> {
        data: &'a [Bits],
        oracle: O,
        designated: &'a HashMap<Vec<u8>, usize>,
        known: &'a HashMap<usize, Bits>,
        ordinal: u64,
        query_cap: u64,
        remaining: u64,
        found: Vec<(u64, usize, Bits)>,
    }
    impl<O: RandomOracle> DataEnv for Preview<'_, O> {
        fn query(&mut self, msg: &[u8]) -> Result<Bits> {
            if self.ordinal >= self.query_cap {
                return Err(Error::QueryBudgetExceeded(self.query_cap));
            }
            self.ordinal += 1;
            let answer = self.oracle.query(msg);
            if let Some(&i) = self.designated.get(msg) {
                if !self.known.contains_key(&i) && !self.found.iter().any(|f| f.1 == i) {
                    self.found.push((self.ordinal, i, answer.clone()));
                }
            }
            Ok(answer)
        }

        fn leak(&mut self, declared_bits: usize, f: LeakFn<'_>) -> Result<Bits> {
            let want = declared_bits as u64;
            if want > self.remaining {
                return Err(Error::BudgetExceeded {
                    requested: want,
                    remaining: self.remaining,
                });
            }
            let out = f(self.data, &self.oracle);
            if out.len() > declared_bits {
                return Err(Error::ProtocolViolation("over-wide leakage".into()));
            }
            self.remaining -= want;
            let mut padded = out;
            padded.push_bits(&Bits::zeros(declared_bits - padded.len()));
            Ok(padded)
        }
    }
    let mut env = Preview {
        data: &mock.data,
        oracle: twisted_for(&mock.h, &mock.source, graph, key),
        designated: &mock.designated,
        known: &mock.known,
        ordinal: mock.ordinal,
        query_cap,
        remaining: inner_budget - mock.inner_spent,
        found: Vec::new(),
    };
    let mut inner = mock.inner.clone();
    let mut rng = mock.inner_rng.clone();
    let _ = inner.next(incoming, &mut env, &mut rng);
    env.found
}

struct Replay<'a, A> {
    mock: &'a mut Mock<A>,
    graph: &'a BipartiteRegularGraph,
    leak: &'a mut LeakageOracle<Vec<Bits>>,
    pending: HashMap<u64, Bits>,
    query_cap: u64,
    inner_budget: u64,
    overflow: bool,
}

impl<A> DataEnv for Replay<'_, A> {
    fn query(&mut self, msg: &[u8]) -> Result<Bits> {
        let m = &mut *self.mock;
        if m.ordinal >= self.query_cap {
            return Err(Error::QueryBudgetExceeded(self.query_cap));
        }
        m.ordinal += 1;
        if let Some(&i) = m.designated.get(msg) {
            if let Some(v) = m.known.get(&i) {
                return Ok(v.clone());
            }
            if let Some(v) = self.pending.remove(&m.ordinal) {
                m.indices.push((m.ordinal, i));
                m.known.insert(i, v.clone());
                return Ok(v);
            }
        }
        Ok(m.h.query(msg))
    }

    fn leak(&mut self, declared_bits: usize, f: LeakFn<'_>) -> Result<Bits> {
        let want = declared_bits as u64;
        let remaining = self.inner_budget - self.mock.inner_spent;
        if want > remaining {
            return Err(Error::BudgetExceeded {
                requested: want,
                remaining,
            });
        }
        let (data, source, h, graph) = (&self.mock.data, &self.mock.source, &self.mock.h, self.graph);
        match self
            .leak
            .leak(declared_bits, |k| f(data, &twisted_for(h, source, graph, k)))
        {
            Ok(out) => {
                self.mock.inner_spent += want;
                Ok(out)
            }
            Err(e) => {
                self.overflow = matches!(e, Error::BudgetExceeded { .. });
                Err(e)
            }
        }
    }
}

impl<A: DiskAdversary> Adversary<Vec<Bits>> for WrappedAdversary<'_, A> {
    fn setup(&mut self, _leak: &mut LeakageOracle<Vec<Bits>>, rng: &mut ChaCha20Rng) -> Result<()> {
        if self.sampler.block_count() != self.graph.ell() {
            return Err(Error::DimensionMismatch("mock data and graph disagree on ℓ".into()));
        }
        let data = self.sampler.sample(rng);
        let source = BlockSource::from_blocks(&data)?;
        let h = TableOracle::new(rng.gen(), self.sampler.block_bits())?;
        let designated = designated_queries(&source, &self.graph)?;
        self.mock = Some(Mock {
            data,
            source,
            h,
            designated,
            inner: self.template.clone(),
            inner_rng: ChaCha20Rng::seed_from_u64(rng.gen()),
            known: HashMap::new(),
            ordinal: 0,
            inner_spent: 0,
            indices: Vec::new(),
        });
        Ok(())
    }

    fn next(
        &mut self,
        incoming: Option<&[u8]>,
        leak: &mut LeakageOracle<Vec<Bits>>,
        _rng: &mut ChaCha20Rng,
    ) -> Result<AdversaryStep> {
        let (graph, cap, budget) = (&self.graph, self.query_cap, self.inner_budget);
        let mock = self.mock.as_mut().expect("setup ran");
        let n = mock.h.output_bits();
        let ell = graph.ell();
        let count_bits = bits_for(ell as u64 + 1);
        let ord_bits = bits_for(cap);

        let count = match leak.leak(count_bits, |k| {
            Bits::from_u64(preview(mock, graph, k, incoming, cap, budget).len() as u64, count_bits)
        }) {
            Ok(c) => c.to_u64() as usize,
            Err(Error::BudgetExceeded { .. }) => return Ok(AdversaryStep::Halt),
            Err(e) => return Err(e),
        };
        let entry = ord_bits + n;
        let packed = match leak.leak(count * entry, |k| {
            let mut out = Bits::default();
            for (ord, _, v) in preview(mock, graph, k, incoming, cap, budget) {
                out.push_bits(&Bits::from_u64(ord - 1, ord_bits));
                out.push_bits(&v);
            }
            out
        }) {
            Ok(p) => p,
            Err(Error::BudgetExceeded { .. }) => return Ok(AdversaryStep::Halt),
            Err(e) => return Err(e),
        };
        let pending = (0..count)
            .map(|j| {
                let ord = packed.slice(j * entry, ord_bits).to_u64() + 1;
                (ord, packed.slice(j * entry + ord_bits, n))
            })
            .collect();

        let mut inner = mock.inner.clone();
        let mut inner_rng = mock.inner_rng.clone();
        let mut env = Replay {
            mock,
            graph,
            leak,
            pending,
            query_cap: cap,
            inner_budget: budget,
            overflow: false,
        };
        let step = inner.next(incoming, &mut env, &mut inner_rng);
        if env.overflow {
            return Ok(AdversaryStep::Halt);
        }
        let mock = self.mock.as_mut().expect("setup ran");
        mock.inner = inner;
        mock.inner_rng = inner_rng;
        step
    }
}

fn derive_all(data: &[Bits], h: &dyn RandomOracle, graph: &BipartiteRegularGraph) -> Vec<Bits> {
    let source = BlockSource::from_blocks(data).expect("shape checked");
    (0..graph.ell())
        .map(|i| derive_block(&source, graph, h, i).expect("shape checked"))
        .collect()
}

fn tree_for(data: &[Bits], h: &dyn RandomOracle, graph: &BipartiteRegularGraph, hasher: &MerkleHasher) -> MerkleTree {
    MerkleTree::build(hasher, &derive_all(data, h, graph)).expect("nonempty key")
}

/// Answers each challenge with one leakage query computing the opening.
#[derive(Clone)]
pub struct HonestDiskProver {
    pub hasher: MerkleHasher,
    pub graph: BipartiteRegularGraph,
}

impl DiskAdversary for HonestDiskProver {
    fn name(&self) -> &str {
        "honest-disk-prover"
    }

    fn next(&mut self, incoming: Option<&[u8]>, env: &mut dyn DataEnv, _: &mut ChaCha20Rng) -> Result<AdversaryStep> {
        let Some(msg) = incoming else {
            return Ok(AdversaryStep::Send(Vec::new()));
        };
        let n = self.hasher.width();
        let depth = self.graph.ell().next_power_of_two().trailing_zeros() as usize;
        let mut out = Vec::new();
        for i in decode_challenge(msg)? {
            let (graph, hasher) = (&self.graph, &self.hasher);
            let bits = env.leak(n * (1 + depth), &|d, h| {
                let tree = tree_for(d, h, graph, hasher);
                let leaf = derive_all(d, h, graph)[i as usize].clone();
                Bits::concat(std::iter::once(&leaf).chain(&tree.siblings(i as usize)))
            })?;
            let proof = MerkleProof {
                leaf_index: i,
                leaf: bits.slice(0, n),
                siblings: (1..=depth).map(|j| bits.slice(j * n, n)).collect(),
            };
            out.extend(proof.to_bytes());
        }
        Ok(AdversaryStep::Send(out))
    }
}

/// Leaks the data blocks behind each challenged leaf and recomputes the
/// leaf with a (bad) oracle query; only the path hashes are leaked whole.
#[derive(Clone)]
pub struct RecomputingProver {
    pub hasher: MerkleHasher,
    pub graph: BipartiteRegularGraph,
}

impl DiskAdversary for RecomputingProver {
    fn name(&self) -> &str {
        "recomputing-prover"
    }

    fn next(&mut self, incoming: Option<&[u8]>, env: &mut dyn DataEnv, _: &mut ChaCha20Rng) -> Result<AdversaryStep> {
        let Some(msg) = incoming else {
            return Ok(AdversaryStep::Send(Vec::new()));
        };
        let n = self.hasher.width();
        let depth = self.graph.ell().next_power_of_two().trailing_zeros() as usize;
        let mut out = Vec::new();
        for i in decode_challenge(msg)? {
            let row = self.graph.neighbors(i as usize)?.to_vec();
            let payload = env.leak(n * row.len(), &|d, _| Bits::concat(row.iter().map(|&j| &d[j as usize])))?;
            let leaf = env.query(&encode_query(i, &payload))?;
            let (graph, hasher) = (&self.graph, &self.hasher);
            let path = env.leak(n * depth, &|d, h| {
                Bits::concat(&tree_for(d, h, graph, hasher).siblings(i as usize))
            })?;
            let proof = MerkleProof {
                leaf_index: i,
                leaf,
                siblings: (0..depth).map(|j| path.slice(j * n, n)).collect(),
            };
            out.extend(proof.to_bytes());
        }
        Ok(AdversaryStep::Send(out))
    }
}

/// Leaks `bits` bits of nothing, then sends an empty answer.
#[derive(Clone)]
pub struct OverLeaker {
    pub bits: usize,
}

impl DiskAdversary for OverLeaker {
    fn name(&self) -> &str {
        "over-leaker"
    }

    fn next(&mut self, _: Option<&[u8]>, env: &mut dyn DataEnv, _: &mut ChaCha20Rng) -> Result<AdversaryStep> {
        env.leak(self.bits, &|_, _| Bits::default())?;
        Ok(AdversaryStep::Send(Vec::new()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionConfig {
    /// Indices challenged per run.
    pub challenges: Challenges,
    /// Leakage budget of the disk adversary, `λ − Δλ`.
    pub disk_budget: u64,
    /// The wrapper's extra allowance.
    pub delta_lambda: u64,
    /// Plays the role of `ℓ^e` when reporting the bad-query rate.
    pub threshold: usize,
    pub query_cap: u64,
    pub trials: u64,
    pub seed: u64,
}

/// The disk game: key `Disperse(D, H)` with fresh `D` and table oracle.
pub fn run_disk_game<A: DiskAdversary>(
    adversary: &A,
    sampler: &dyn DataSampler,
    graph: &BipartiteRegularGraph,
    hasher: &MerkleHasher,
    cfg: &ReductionConfig,
    seed: u64,
) -> GameTranscript {
    let n = sampler.block_bits();
    let keygen = |rng: &mut ChaCha20Rng| {
        let data = sampler.sample(rng);
        DiskKey {
            source: BlockSource::from_blocks(&data).expect("sampler yields blocks"),
            graph: graph.clone(),
            oracle: Box::new(TableOracle::new(rng.gen(), n).expect("n > 0")),
            subtree_height: 0,
        }
    };
    let mut ch = AuthChallenger::new(hasher.clone(), cfg.challenges.clone());
    let mut adv = DiskGameAdapter::new(adversary.clone(), cfg.query_cap);
    run_security_game(keygen, &mut ch, &mut adv, GameConfig::new(cfg.disk_budget, seed))
}

/// The uniform-key game against `A′`; also returns the inner bad-query
/// list.
pub fn run_wrapped_game<A: DiskAdversary>(
    adversary: &A,
    sampler: &dyn DataSampler,
    graph: &BipartiteRegularGraph,
    hasher: &MerkleHasher,
    cfg: &ReductionConfig,
    seed: u64,
) -> (GameTranscript, Vec<(u64, usize)>) {
    let (n, ell) = (sampler.block_bits(), graph.ell());
    let keygen = |rng: &mut ChaCha20Rng| (0..ell).map(|_| Bits::random(n, rng)).collect::<Vec<_>>();
    let mut ch = AuthChallenger::new(hasher.clone(), cfg.challenges.clone());
    let mut adv = WrappedAdversary::new(
        adversary.clone(),
        sampler,
        graph.clone(),
        cfg.query_cap,
        cfg.disk_budget,
    );
    let budget = cfg.disk_budget + cfg.delta_lambda;
    let t = run_security_game(keygen, &mut ch, &mut adv, GameConfig::new(budget, seed));
    let indices = adv.indices().to_vec();
    (t, indices)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub adversary: String,
    pub trials: u64,
    pub disk_accept_rate: f64,
    pub wrapped_accept_rate: f64,
    pub wrapped_halt_rate: f64,
    /// `Pr(|indices| ≥ threshold)` in the disk game.
    pub indices_rate: f64,
    /// `wrapped ≥ disk − indices`, with 3σ slack.
    pub holds: bool,
}

pub fn compare_reduction<A: DiskAdversary>(
    adversary: &A,
    sampler: &dyn DataSampler,
    graph: &BipartiteRegularGraph,
    hasher: &MerkleHasher,
    cfg: &ReductionConfig,
) -> ReductionReport {
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_rng(cfg.seed, t).gen::<u64>();
            let disk = run_disk_game(adversary, sampler, graph, hasher, cfg, s);
            let (wrapped, _) = run_wrapped_game(adversary, sampler, graph, hasher, cfg, s ^ 0x5eed);
            (
                disk.accepted(),
                disk.ledger.bad_indices.len() >= cfg.threshold,
                wrapped.accepted(),
                wrapped.outcome == Outcome::AdversaryHalted,
            )
        })
        .collect::<Vec<_>>();
    let trials = cfg.trials.max(1);
    let rate =
        |f: &dyn Fn(&(bool, bool, bool, bool)) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / trials as f64;
    let disk = rate(&|r| r.0);
    let indices = rate(&|r| r.1);
    let wrapped = rate(&|r| r.2);
    let halt = rate(&|r| r.3);
    let slack = 3.0
        * (binomial_sigma(disk, trials).powi(2)
            + binomial_sigma(indices, trials).powi(2)
            + binomial_sigma(wrapped, trials).powi(2))
        .sqrt()
        + 1.0 / trials as f64;
    ReductionReport {
        adversary: adversary.name().into(),
        trials: cfg.trials,
        disk_accept_rate: disk,
        wrapped_accept_rate: wrapped,
        wrapped_halt_rate: halt,
        indices_rate: indices,
        holds: wrapped >= disk - indices - slack,
    }
}

/// Leakage the [`RecomputingProver`] spends on `challenges` openings.
pub fn recomputing_cost(graph: &BipartiteRegularGraph, n: usize, challenges: usize) -> u64 {
    let depth = graph.ell().next_power_of_two().trailing_zeros() as usize;
    (challenges * n * (graph.degree() + depth)) as u64
}
