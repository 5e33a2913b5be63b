use serde::Serialize;

use super::bad_query::TrackedOracle;
use super::ledger::{LeakageLedger, LeakageOracle};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::oracle::RandomOracle;

/// A leakage function over the private blocks and the oracle it is
/// evaluated against.
pub type LeakFn<'a> = &'a dyn Fn(&[Bits], &dyn RandomOracle) -> Bits;

/// What an adversary against derived keys may touch: the random oracle and
/// a budgeted leakage oracle on the data.
pub trait DataEnv {
    fn query(&mut self, msg: &[u8]) -> Result<Bits>;
    fn leak(&mut self, declared_bits: usize, f: LeakFn<'_>) -> Result<Bits>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    Query { msg: Vec<u8>, answer: Bits },
    Leak { bits: usize, answer: Bits },
}

/// The honest environment: a tracked oracle, leakage on the real data
/// evaluated against the untracked oracle, and a query cap `q`.
pub struct RealEnv<'a, O> {
    leak: LeakageOracle<Vec<Bits>>,
    oracle: &'a TrackedOracle<O>,
    query_cap: u64,
    pub trace: Vec<TraceEvent>,
}

impl<'a, O: RandomOracle> RealEnv<'a, O> {
    pub fn new(data: Vec<Bits>, oracle: &'a TrackedOracle<O>, budget: u64, query_cap: u64) -> Self {
        RealEnv {
            leak: LeakageOracle::new(data, budget),
            oracle,
            query_cap,
            trace: Vec::new(),
        }
    }

    pub fn ledger(&self) -> LeakageLedger {
        let mut l = self.leak.ledger().clone();
        l.oracle_queries = self.oracle.query_count();
        l.bad_indices = self.oracle.bad_indices();
        l
    }
}

impl<O: RandomOracle> DataEnv for RealEnv<'_, O> {
    fn query(&mut self, msg: &[u8]) -> Result<Bits> {
        if self.oracle.query_count() >= self.query_cap {
            return Err(Error::QueryBudgetExceeded(self.query_cap));
        }
        let answer = self.oracle.query(msg);
        self.trace.push(TraceEvent::Query {
            msg: msg.to_vec(),
            answer: answer.clone(),
        });
        Ok(answer)
    }

    fn leak(&mut self, declared_bits: usize, f: LeakFn<'_>) -> Result<Bits> {
        let base = self.oracle.base();
        let answer = self.leak.leak(declared_bits, |d| f(d, base))?;
        self.trace.push(TraceEvent::Leak {
            bits: declared_bits,
            answer: answer.clone(),
        });
        Ok(answer)
    }
}

/// `⌈log₂ x⌉`, with `bits_for(1) = 0`.
pub fn bits_for(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as usize
    }
}
