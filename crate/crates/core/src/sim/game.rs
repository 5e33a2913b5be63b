//! The challenger/adversary message loop.
//!
//! The adversary speaks first, on an empty message; the challenger answers
//! each message until it reaches `Accept` or `Reject`. The adversary sees
//! the key only through a [`LeakageOracle`].

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::ledger::{LeakageLedger, LeakageOracle};
use crate::error::Result;

pub const DEFAULT_ROUND_CAP: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accept,
    Reject,
    /// The round cap was reached before the challenger decided.
    Aborted,
    /// The adversary stopped with `⊥`.
    AdversaryHalted,
    /// The adversary broke the protocol (e.g. an over-wide leak).
    Forfeit(String),
}

pub enum ChallengerStep {
    Continue(Vec<u8>),
    Accept,
    Reject,
}

pub enum AdversaryStep {
    Send(Vec<u8>),
    Halt,
}

pub trait Challenger<K> {
    fn setup(&mut self, key: &K, rng: &mut ChaCha20Rng) -> Result<()>;
    fn respond(&mut self, msg: &[u8], rng: &mut ChaCha20Rng) -> Result<ChallengerStep>;
}

pub trait Adversary<K> {
    fn setup(&mut self, _leak: &mut LeakageOracle<K>, _rng: &mut ChaCha20Rng) -> Result<()> {
        Ok(())
    }

    /// `incoming` is `None` on the first call.
    fn next(
        &mut self,
        incoming: Option<&[u8]>,
        leak: &mut LeakageOracle<K>,
        rng: &mut ChaCha20Rng,
    ) -> Result<AdversaryStep>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GameConfig {
    pub leakage_budget: u64,
    pub round_cap: u64,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(leakage_budget: u64, seed: u64) -> Self {
        GameConfig {
            leakage_budget,
            round_cap: DEFAULT_ROUND_CAP,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Adversary,
    Challenger,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameTranscript {
    pub messages: Vec<(Party, Vec<u8>)>,
    pub outcome: Outcome,
    pub rounds: u64,
    pub ledger: LeakageLedger,
}

impl GameTranscript {
    pub fn accepted(&self) -> bool {
        self.outcome == Outcome::Accept
    }

    /// Canonical byte form, for reproducibility checks.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (party, msg) in &self.messages {
            out.push(*party as u8);
            out.extend_from_slice(&(msg.len() as u64).to_le_bytes());
            out.extend_from_slice(msg);
        }
        out.extend_from_slice(serde_json::to_string(&self.outcome).unwrap().as_bytes());
        out.extend_from_slice(&self.rounds.to_le_bytes());
        out.extend_from_slice(serde_json::to_string(&self.ledger).unwrap().as_bytes());
        out
    }
}

/// Independent streams for key generation, challenger and adversary.
fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn run_security_game<K, G, C, A>(
    keygen: G,
    challenger: &mut C,
    adversary: &mut A,
    config: GameConfig,
) -> GameTranscript
where
    G: FnOnce(&mut ChaCha20Rng) -> K,
    C: Challenger<K>,
    A: Adversary<K>,
{
    let mut key_rng = rng_for(config.seed, 0);
    let mut ch_rng = rng_for(config.seed, 1);
    let mut adv_rng = rng_for(config.seed, 2);
    let key = keygen(&mut key_rng);
    let mut messages = Vec::new();
    let finish = |messages, outcome, rounds, leak: LeakageOracle<K>| GameTranscript {
        messages,
        outcome,
        rounds,
        ledger: leak.into_ledger(),
    };
    if let Err(e) = challenger.setup(&key, &mut ch_rng) {
        let leak = LeakageOracle::new(key, config.leakage_budget);
        return finish(messages, Outcome::Forfeit(format!("challenger setup: {e}")), 0, leak);
    }
    let mut leak = LeakageOracle::new(key, config.leakage_budget);
    if let Err(e) = adversary.setup(&mut leak, &mut adv_rng) {
        return finish(messages, Outcome::Forfeit(e.to_string()), 0, leak);
    }
    let mut incoming: Option<Vec<u8>> = None;
    for round in 1..=config.round_cap {
        let msg = match adversary.next(incoming.as_deref(), &mut leak, &mut adv_rng) {
            Ok(AdversaryStep::Send(m)) => m,
            Ok(AdversaryStep::Halt) => return finish(messages, Outcome::AdversaryHalted, round, leak),
            Err(e) => return finish(messages, Outcome::Forfeit(e.to_string()), round, leak),
        };
        messages.push((Party::Adversary, msg.clone()));
        match challenger.respond(&msg, &mut ch_rng) {
            Ok(ChallengerStep::Continue(reply)) => {
                messages.push((Party::Challenger, reply.clone()));
                incoming = Some(reply);
            }
            Ok(ChallengerStep::Accept) => return finish(messages, Outcome::Accept, round, leak),
            // a message the challenger cannot parse is a failed attempt
            Ok(ChallengerStep::Reject) | Err(_) => return finish(messages, Outcome::Reject, round, leak),
        }
    }
    finish(messages, Outcome::Aborted, config.round_cap, leak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;

    struct AlwaysAccept;
    impl<K> Challenger<K> for AlwaysAccept {
        fn setup(&mut self, _: &K, _: &mut ChaCha20Rng) -> Result<()> {
            Ok(())
        }
        fn respond(&mut self, _: &[u8], _: &mut ChaCha20Rng) -> Result<ChallengerStep> {
            Ok(ChallengerStep::Accept)
        }
    }

    struct Echo;
    impl<K> Challenger<K> for Echo {
        fn setup(&mut self, _: &K, _: &mut ChaCha20Rng) -> Result<()> {
            Ok(())
        }
        fn respond(&mut self, m: &[u8], _: &mut ChaCha20Rng) -> Result<ChallengerStep> {
            Ok(ChallengerStep::Continue(m.to_vec()))
        }
    }

    struct Chatty;
    impl Adversary<u64> for Chatty {
        fn next(
            &mut self,
            _: Option<&[u8]>,
            leak: &mut LeakageOracle<u64>,
            _: &mut ChaCha20Rng,
        ) -> Result<AdversaryStep> {
            let bit = leak.leak(1, |k| Bits::from_u64(k & 1, 1))?;
            Ok(AdversaryStep::Send(bit.into_bytes()))
        }
    }

    #[test]
    fn accept_in_one_round() {
        let t = run_security_game(|_| 7u64, &mut AlwaysAccept, &mut Chatty, GameConfig::new(8, 0));
        assert_eq!(t.outcome, Outcome::Accept);
        assert_eq!(t.rounds, 1);
        assert_eq!(t.ledger.spent, 1);
    }

    #[test]
    fn round_cap_aborts_and_budget_forfeits() {
        let cfg = GameConfig {
            leakage_budget: 1000,
            round_cap: 5,
            seed: 0,
        };
        let t = run_security_game(|_| 7u64, &mut Echo, &mut Chatty, cfg);
        assert_eq!(t.outcome, Outcome::Aborted);
        let t = run_security_game(|_| 7u64, &mut Echo, &mut Chatty, GameConfig::new(3, 0));
        assert!(matches!(t.outcome, Outcome::Forfeit(_)));
        assert_eq!(t.ledger.spent, 3);
    }

    #[test]
    fn transcripts_are_reproducible() {
        let cfg = GameConfig {
            leakage_budget: 100,
            round_cap: 20,
            seed: 9,
        };
        let a = run_security_game(
            |r: &mut ChaCha20Rng| rand::Rng::gen::<u64>(r),
            &mut Echo,
            &mut Chatty,
            cfg,
        );
        let b = run_security_game(
            |r: &mut ChaCha20Rng| rand::Rng::gen::<u64>(r),
            &mut Echo,
            &mut Chatty,
            cfg,
        );
        assert_eq!(a.to_bytes(), b.to_bytes());
    }
}
