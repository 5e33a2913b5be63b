//! Counting blocks of high min-entropy.

use crate::error::{Error, Result};

/// Number of entries `x_i ≥ γ·n`.
pub fn high_entropy_block_count(entries: &[f64], gamma: f64, n: f64) -> Result<usize> {
    if !(n > 0.0) {
        return Err(Error::invalid("block length must be positive"));
    }
    if let Some(x) = entries.iter().find(|&&x| !(0.0..=n).contains(&x)) {
        return Err(Error::invalid(format!("entry {x} outside [0, {n}]")));
    }
    Ok(entries.iter().filter(|&&x| x >= gamma * n).count())
}

/// `⌊(β − γ)/(1 − γ) · ℓ⌋`, with a small allowance so that exact ratios are
/// not floored one too low.
pub fn high_block_threshold(beta: f64, gamma: f64, ell: usize) -> usize {
    ((beta - gamma) / (1.0 - gamma) * ell as f64 + 1e-9).floor().max(0.0) as usize
}

/// Checks that more than `⌊(β − γ)/(1 − γ)·ℓ⌋` entries reach `γ·n`, where
/// `β = Σx_i/(ℓn)`. Returns `None` when `γ ≥ β` and nothing is claimed.
pub fn high_block_claim_holds(entries: &[f64], gamma: f64, n: f64) -> Result<Option<bool>> {
    let count = high_entropy_block_count(entries, gamma, n)?;
    let ell = entries.len();
    if ell == 0 || !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid("need at least one entry and γ in [0, 1)"));
    }
    let beta = entries.iter().sum::<f64>() / (ell as f64 * n);
    if gamma >= beta {
        return Ok(None);
    }
    Ok(Some(count > high_block_threshold(beta, gamma, ell)))
}
