//! The two-phase guessing experiment: leak, query the oracle, guess `k1`
//! blocks, see the rest, then guess `k2` oracle values at fresh labels.

use std::collections::HashSet;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::data::DataSampler;
use super::env::LeakFn;
use super::ledger::LeakageOracle;
use super::stats::{trial_rng, within_upper_3sigma};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::oracle::{RandomOracle, TableOracle};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GuessingGameConfig {
    pub n: usize,
    pub ell: usize,
    pub k1: usize,
    pub k2: usize,
    pub lambda_leak: u64,
    /// Declared `H∞(X)/(ℓn)`.
    pub p: f64,
    /// Oracle labels are `label_bits` wide, so `N = 2^label_bits`.
    pub label_bits: usize,
}

impl GuessingGameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.ell == 0 {
            return Err(Error::invalid("n and ℓ must be positive"));
        }
        if self.k1 > self.ell {
            return Err(Error::invalid(format!("k1 = {} exceeds ℓ = {}", self.k1, self.ell)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p must lie in [0, 1]"));
        }
        if self.label_bits == 0 || self.label_bits > 63 {
            return Err(Error::invalid("label width must be in 1..=63 bits"));
        }
        if self.k2 as u64 > 1u64 << self.label_bits {
            return Err(Error::invalid("k2 exceeds the label space"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Leakage,
    First,
    Second,
    Done,
}

pub struct GuessingSecret {
    pub blocks: Vec<Bits>,
    pub oracle: TableOracle,
}

/// One play of the game. Adversaries drive it through the phase methods,
/// which enforce their order.
pub struct GuessingSession {
    config: GuessingGameConfig,
    leak: LeakageOracle<GuessingSecret>,
    phase: Phase,
    queried: HashSet<Vec<u8>>,
    guessed: Vec<usize>,
    phase1: bool,
    phase2: bool,
}

impl GuessingSession {
    pub fn new(config: GuessingGameConfig, secret: GuessingSecret) -> Self {
        GuessingSession {
            leak: LeakageOracle::new(secret, config.lambda_leak),
            config,
            phase: Phase::Leakage,
            queried: HashSet::new(),
            guessed: Vec::new(),
            phase1: false,
            phase2: false,
        }
    }

    pub fn config(&self) -> &GuessingGameConfig {
        &self.config
    }

    fn require(&self, allowed: &[Phase], what: &str) -> Result<()> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(Error::ProtocolViolation(format!(
                "{what} not allowed in phase {:?}",
                self.phase
            )))
        }
    }

    /// Leakage on `(X, H)`; only before the first oracle query.
    pub fn leak(&mut self, declared_bits: usize, f: LeakFn<'_>) -> Result<Bits> {
        self.require(&[Phase::Leakage], "leakage")?;
        self.leak.leak(declared_bits, |s| f(&s.blocks, &s.oracle))
    }

    pub fn leaked_bits(&self) -> u64 {
        self.leak.ledger().spent
    }

    /// `H_v` for a `label_bits`-wide label.
    pub fn query(&mut self, label: &Bits) -> Result<Bits> {
        self.require(&[Phase::Leakage, Phase::First], "oracle query")?;
        self.check_label(label)?;
        self.phase = Phase::First;
        self.queried.insert(label.as_bytes().to_vec());
        Ok(self.leak.secret().oracle.query(label.as_bytes()))
    }

    fn check_label(&self, label: &Bits) -> Result<()> {
        if label.len() != self.config.label_bits {
            return Err(Error::ProtocolViolation(format!(
                "label has {} bits, expected {}",
                label.len(),
                self.config.label_bits
            )));
        }
        Ok(())
    }

    /// Guesses for `k1` distinct blocks. Returns every block outside the
    /// guessed set, `None` at guessed positions.
    pub fn guess_blocks(&mut self, guesses: &[(usize, Bits)]) -> Result<Vec<Option<Bits>>> {
        self.require(&[Phase::Leakage, Phase::First], "block guess")?;
        let ell = self.config.ell;
        if guesses.len() != self.config.k1 {
            return Err(Error::ProtocolViolation(format!(
                "{} block guesses, k1 = {}",
                guesses.len(),
                self.config.k1
            )));
        }
        let mut seen = vec![false; ell];
        for (i, _) in guesses {
            if *i >= ell || std::mem::replace(&mut seen[*i], true) {
                return Err(Error::ProtocolViolation(format!("block index {i} invalid or repeated")));
            }
        }
        let blocks = &self.leak.secret().blocks;
        self.phase1 = guesses.iter().all(|(i, g)| &blocks[*i] == g);
        self.guessed = guesses.iter().map(|(i, _)| *i).collect();
        self.phase = Phase::Second;
        Ok((0..ell).map(|i| (!seen[i]).then(|| blocks[i].clone())).collect())
    }

    /// Guesses for `k2` distinct labels, none of them queried before.
    pub fn guess_oracle(&mut self, guesses: &[(Bits, Bits)]) -> Result<()> {
        self.require(&[Phase::Second], "oracle guess")?;
        if guesses.len() != self.config.k2 {
            return Err(Error::ProtocolViolation(format!(
                "{} oracle guesses, k2 = {}",
                guesses.len(),
                self.config.k2
            )));
        }
        let mut labels = HashSet::new();
        for (label, _) in guesses {
            self.check_label(label)?;
            if self.queried.contains(label.as_bytes()) {
                return Err(Error::ProtocolViolation(format!(
                    "label {} was queried",
                    label.to_hex()
                )));
            }
            if !labels.insert(label.as_bytes()) {
                return Err(Error::ProtocolViolation(format!("label {} repeated", label.to_hex())));
            }
        }
        let oracle = &self.leak.secret().oracle;
        self.phase2 = guesses.iter().all(|(l, v)| &oracle.query(l.as_bytes()) == v);
        self.phase = Phase::Done;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuessOutcome {
    pub phase1: bool,
    pub phase2: bool,
    pub forfeit: Option<String>,
}

impl GuessOutcome {
    pub fn win(&self) -> bool {
        self.forfeit.is_none() && self.phase1 && self.phase2
    }
}

pub trait GuessingAdversary: Sync {
    fn name(&self) -> &str;
    fn play(&self, session: &mut GuessingSession, rng: &mut ChaCha20Rng) -> Result<()>;
}

/// Samples `X` and a fresh oracle, then lets `adversary` play once.
pub fn run_guessing_game(
    config: &GuessingGameConfig,
    sampler: &dyn DataSampler,
    adversary: &dyn GuessingAdversary,
    rng: &mut ChaCha20Rng,
) -> Result<GuessOutcome> {
    config.validate()?;
    if sampler.block_bits() != config.n || sampler.block_count() != config.ell {
        return Err(Error::DimensionMismatch("sampler shape differs from the game".into()));
    }
    let blocks = sampler.sample(rng);
    let oracle = TableOracle::new(rng.gen(), config.n)?;
    let mut session = GuessingSession::new(*config, GuessingSecret { blocks, oracle });
    let forfeit = match adversary.play(&mut session, rng) {
        Err(e) => Some(e.to_string()),
        Ok(()) if session.phase != Phase::Done => Some("adversary stopped before the second phase".into()),
        Ok(()) => None,
    };
    Ok(GuessOutcome {
        phase1: session.phase1,
        phase2: session.phase2,
        forfeit,
    })
}

/// The guessing bound at one `(ε, β)` choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GuessingBound {
    pub value: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub delta: f64,
    /// `k1 > ℓ − ⌊βℓ/4⌋` and `pℓ < N` at the chosen `β`.
    pub hypothesis_met: bool,
}

/// `2^(−εn) + 2^(−(δn−1)) + 4ℓ²·2^(−βn/4) + 2^(−n((p−β)ℓ − λ − ε − 4δ + k2))`
/// with `λ = λ_leak/n` and `δ = label_bits/n`, minimized over a grid of
/// `ε > 0` and `0 < β < p`. Choices meeting the hypothesis are preferred.
pub fn guessing_bound(config: &GuessingGameConfig) -> GuessingBound {
    let n = config.n as f64;
    let ell = config.ell as f64;
    let p = config.p;
    let lambda = config.lambda_leak as f64 / n;
    let delta = config.label_bits as f64 / n;
    let k2 = config.k2 as f64;
    let capacity_ok = p * ell < (config.label_bits as f64).exp2();
    let eval = |eps: f64, beta: f64| {
        (-eps * n).exp2()
            + (-(delta * n - 1.0)).exp2()
            + 4.0 * ell * ell * (-beta * n / 4.0).exp2()
            + (-n * ((p - beta) * ell - lambda - eps - 4.0 * delta + k2)).exp2()
    };
    let mut best: Option<GuessingBound> = None;
    for bi in 1..200 {
        let beta = p * bi as f64 / 200.0;
        let met = capacity_ok && config.k1 as f64 > ell - (beta * ell / 4.0).floor();
        for ei in 1..=400 {
            let eps = ei as f64 * 0.05;
            let cand = GuessingBound {
                value: eval(eps, beta),
                epsilon: eps,
                beta,
                delta,
                hypothesis_met: met,
            };
            let better = match &best {
                None => true,
                Some(b) => (cand.hypothesis_met, -cand.value) > (b.hypothesis_met, -b.value),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or(GuessingBound {
        value: f64::INFINITY,
        epsilon: 0.0,
        beta: 0.0,
        delta,
        hypothesis_met: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuessingReport {
    pub adversary: String,
    pub trials: u64,
    pub wins: u64,
    pub phase1_wins: u64,
    pub phase2_wins: u64,
    pub forfeits: u64,
    pub win_rate: f64,
    pub phase1_rate: f64,
    pub phase2_rate: f64,
    pub bound: GuessingBound,
    /// `win_rate ≤ bound + 3σ`.
    pub consistent: bool,
}

/// Monte Carlo over independent trials, run in parallel.
pub fn estimate_guessing(
    config: &GuessingGameConfig,
    sampler: &dyn DataSampler,
    adversary: &dyn GuessingAdversary,
    trials: u64,
    seed: u64,
) -> Result<GuessingReport> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| run_guessing_game(config, sampler, adversary, &mut trial_rng(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let count = |f: &dyn Fn(&GuessOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    let wins = count(&|o| o.win());
    let phase1_wins = count(&|o| o.forfeit.is_none() && o.phase1);
    let phase2_wins = count(&|o| o.forfeit.is_none() && o.phase2);
    let forfeits = count(&|o| o.forfeit.is_some());
    let rate = |k: u64| if trials == 0 { 0.0 } else { k as f64 / trials as f64 };
    let bound = guessing_bound(config);
    Ok(GuessingReport {
        adversary: adversary.name().into(),
        trials,
        wins,
        phase1_wins,
        phase2_wins,
        forfeits,
        win_rate: rate(wins),
        phase1_rate: rate(phase1_wins),
        phase2_rate: rate(phase2_wins),
        consistent: within_upper_3sigma(rate(wins), bound.value, trials),
        bound,
    })
}

fn random_block_guesses(cfg: &GuessingGameConfig, rng: &mut dyn RngCore) -> Vec<(usize, Bits)> {
    (0..cfg.k1).map(|i| (i, Bits::random(cfg.n, rng))).collect()
}

fn random_labels(cfg: &GuessingGameConfig, count: usize, rng: &mut dyn RngCore) -> Vec<Bits> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let l = Bits::random(cfg.label_bits, rng);
        if seen.insert(l.as_bytes().to_vec()) {
            out.push(l);
        }
    }
    out
}

/// Leaks nothing, queries nothing, guesses uniformly.
pub struct ZeroKnowledgeGuesser;

impl GuessingAdversary for ZeroKnowledgeGuesser {
    fn name(&self) -> &str {
        "zero-knowledge"
    }

    fn play(&self, s: &mut GuessingSession, rng: &mut ChaCha20Rng) -> Result<()> {
        let cfg = *s.config();
        s.guess_blocks(&random_block_guesses(&cfg, rng))?;
        let guesses = random_labels(&cfg, cfg.k2, rng)
            .into_iter()
            .map(|l| (l, Bits::random(cfg.n, rng)))
            .collect::<Vec<_>>();
        s.guess_oracle(&guesses)
    }
}

/// Spends the budget on a prefix of `X` and guesses the fully leaked
/// blocks exactly, the others uniformly.
pub struct LeakBlocksGuesser;

impl GuessingAdversary for LeakBlocksGuesser {
    fn name(&self) -> &str {
        "leak-blocks"
    }

    fn play(&self, s: &mut GuessingSession, rng: &mut ChaCha20Rng) -> Result<()> {
        let cfg = *s.config();
        let width = (cfg.lambda_leak as usize).min(cfg.n * cfg.ell);
        let leaked = s.leak(width, &|x, _| Bits::concat(x).slice(0, width))?;
        let known = width / cfg.n;
        let guesses = (0..cfg.k1)
            .map(|i| {
                let g = if i < known {
                    leaked.slice(i * cfg.n, cfg.n)
                } else {
                    Bits::random(cfg.n, rng)
                };
                (i, g)
            })
            .collect::<Vec<_>>();
        s.guess_blocks(&guesses)?;
        let guesses = random_labels(&cfg, cfg.k2, rng)
            .into_iter()
            .map(|l| (l, Bits::random(cfg.n, rng)))
            .collect::<Vec<_>>();
        s.guess_oracle(&guesses)
    }
}

/// Spends the budget on oracle values at labels it never queries, then
/// guesses exactly those.
pub struct LeakOracleGuesser;

impl GuessingAdversary for LeakOracleGuesser {
    fn name(&self) -> &str {
        "leak-oracle"
    }

    fn play(&self, s: &mut GuessingSession, rng: &mut ChaCha20Rng) -> Result<()> {
        let cfg = *s.config();
        let labels = random_labels(&cfg, cfg.k2, rng);
        let affordable = (cfg.lambda_leak as usize / cfg.n).min(cfg.k2);
        let leaked = s.leak(affordable * cfg.n, &|_, h| {
            Bits::concat(
                labels[..affordable]
                    .iter()
                    .map(|l| h.query(l.as_bytes()))
                    .collect::<Vec<_>>()
                    .iter(),
            )
        })?;
        s.guess_blocks(&random_block_guesses(&cfg, rng))?;
        let guesses = labels
            .into_iter()
            .enumerate()
            .map(|(j, l)| {
                let v = if j < affordable {
                    leaked.slice(j * cfg.n, cfg.n)
                } else {
                    Bits::random(cfg.n, rng)
                };
                (l, v)
            })
            .collect::<Vec<_>>();
        s.guess_oracle(&guesses)
    }
}

/// Queries a label and then tries to guess it: always forfeits.
pub struct RequeryCheater;

impl GuessingAdversary for RequeryCheater {
    fn name(&self) -> &str {
        "requery-cheater"
    }

    fn play(&self, s: &mut GuessingSession, rng: &mut ChaCha20Rng) -> Result<()> {
        let cfg = *s.config();
        let labels = random_labels(&cfg, cfg.k2, rng);
        let values = labels.iter().map(|l| s.query(l)).collect::<Result<Vec<_>>>()?;
        s.guess_blocks(&random_block_guesses(&cfg, rng))?;
        s.guess_oracle(&labels.into_iter().zip(values).collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::data::UniformBlocks;

    fn toy() -> GuessingGameConfig {
        GuessingGameConfig {
            n: 8,
            ell: 4,
            k1: 3,
            k2: 1,
            lambda_leak: 8,
            p: 1.0,
            label_bits: 8,
        }
    }

    #[test]
    fn full_leak_wins_block_phase() {
        let cfg = GuessingGameConfig {
            lambda_leak: 32,
            ..toy()
        };
        let r = estimate_guessing(&cfg, &UniformBlocks { n: 8, ell: 4 }, &LeakBlocksGuesser, 200, 1).unwrap();
        assert_eq!(r.phase1_wins, 200);
        assert_eq!(r.forfeits, 0);
    }

    #[test]
    fn leaking_the_oracle_wins_second_phase() {
        let r = estimate_guessing(&toy(), &UniformBlocks { n: 8, ell: 4 }, &LeakOracleGuesser, 200, 2).unwrap();
        assert_eq!(r.phase2_wins, 200);
    }

    #[test]
    fn requery_forfeits() {
        let r = estimate_guessing(&toy(), &UniformBlocks { n: 8, ell: 4 }, &RequeryCheater, 50, 3).unwrap();
        assert_eq!(r.forfeits, 50);
        assert_eq!(r.wins, 0);
    }

    #[test]
    fn phase_order_is_enforced() {
        let secret = GuessingSecret {
            blocks: vec![Bits::zeros(8); 4],
            oracle: TableOracle::new(0, 8).unwrap(),
        };
        let mut s = GuessingSession::new(toy(), secret);
        s.query(&Bits::zeros(8)).unwrap();
        assert!(s.leak(1, &|_, _| Bits::zeros(1)).is_err());
        assert!(s.guess_oracle(&[]).is_err());
        assert!(s
            .guess_blocks(&[(0, Bits::zeros(8)), (0, Bits::zeros(8)), (1, Bits::zeros(8))])
            .is_err());
        let rest = s
            .guess_blocks(&[(0, Bits::zeros(8)), (2, Bits::zeros(8)), (3, Bits::zeros(8))])
            .unwrap();
        assert!(rest[0].is_none() && rest[1].is_some());
        assert!(s.phase1);
    }

    #[test]
    fn bound_at_toy_scale_is_vacuous_and_flags_hypothesis() {
        let b = guessing_bound(&toy());
        assert!(b.value >= 1.0);
        assert!(!b.hypothesis_met);
        assert_eq!(b.delta, 1.0);
    }

    #[test]
    fn bound_can_be_small_at_larger_scale() {
        let cfg = GuessingGameConfig {
            n: 256,
            ell: 16,
            k1: 16,
            k2: 1,
            lambda_leak: 256,
            p: 1.0,
            label_bits: 64,
        };
        let b = guessing_bound(&cfg);
        assert!(b.hypothesis_met);
        assert!(b.value < 1e-6, "{b:?}");
    }
}
