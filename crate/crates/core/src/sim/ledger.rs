use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Leakage budget `λ`, bits spent so far, oracle query count `q` and the
/// bad-query list `(ordinal, right vertex)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LeakageLedger {
    pub budget: u64,
    pub spent: u64,
    pub oracle_queries: u64,
    pub bad_indices: Vec<(u64, usize)>,
}

impl LeakageLedger {
    pub fn new(budget: u64) -> Self {
        LeakageLedger {
            budget,
            ..Default::default()
        }
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.spent
    }

    /// Charges `bits`, or refuses without changing anything.
    pub fn debit(&mut self, bits: u64) -> Result<()> {
        if bits > self.remaining() {
            return Err(Error::BudgetExceeded {
                requested: bits,
                remaining: self.remaining(),
            });
        }
        self.spent += bits;
        Ok(())
    }

    /// Counts one oracle query and returns its 1-based ordinal.
    pub fn record_query(&mut self) -> u64 {
        self.oracle_queries += 1;
        self.oracle_queries
    }

    /// Records vertex `i` as hit by query `ordinal`, unless it was already
    /// hit earlier. Returns whether a new entry was added.
    pub fn record_bad(&mut self, ordinal: u64, i: usize) -> bool {
        if self.bad_indices.iter().any(|&(_, j)| j == i) {
            return false;
        }
        debug_assert!(self.bad_indices.last().is_none_or(|&(k, _)| k < ordinal));
        self.bad_indices.push((ordinal, i));
        true
    }
}

/// Budgeted access to a secret through caller-supplied functions.
#[derive(Debug)]
pub struct LeakageOracle<S> {
    secret: S,
    ledger: LeakageLedger,
}

impl<S> LeakageOracle<S> {
    pub fn new(secret: S, budget: u64) -> Self {
        LeakageOracle {
            secret,
            ledger: LeakageLedger::new(budget),
        }
    }

    /// Evaluates `f` on the secret and charges `declared_bits`. Shorter
    /// outputs are zero-padded to the declared width; wider ones are a
    /// protocol violation. Refusals leave the ledger untouched.
    pub fn leak<F>(&mut self, declared_bits: usize, f: F) -> Result<Bits>
    where
        F: FnOnce(&S) -> Bits,
    {
        let declared = declared_bits as u64;
        if declared > self.ledger.remaining() {
            return Err(Error::BudgetExceeded {
                requested: declared,
                remaining: self.ledger.remaining(),
            });
        }
        let out = f(&self.secret);
        if out.len() > declared_bits {
            return Err(Error::ProtocolViolation(format!(
                "leakage function returned {} bits, declared {declared_bits}",
                out.len()
            )));
        }
        self.ledger.debit(declared)?;
        let mut padded = out;
        padded.push_bits(&Bits::zeros(declared_bits - padded.len()));
        Ok(padded)
    }

    pub fn ledger(&self) -> &LeakageLedger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut LeakageLedger {
        &mut self.ledger
    }

    pub(crate) fn secret(&self) -> &S {
        &self.secret
    }

    pub fn into_ledger(self) -> LeakageLedger {
        self.ledger
    }
}
