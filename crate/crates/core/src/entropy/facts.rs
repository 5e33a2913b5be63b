//! Standalone checks of the elementary min-entropy inequalities the chain
//! rule is built from. Each returns both sides so callers can report slack.

use serde::Serialize;

use super::distribution::{JointDistribution, TOLERANCE};
use super::measures::{check_split, cond_min_entropy_avg, cond_min_entropy_event, conditional_rows, min_entropy};
use crate::error::{Error, Result};

/// `lhs ≥ rhs`, evaluated with the library tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs - TOLERANCE
    }

    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// `H̃∞(X | Y) ≥ H∞(X, Y) − λ` where `2^λ` is the support size of `Y`.
pub fn average_entropy_loss(dist: &JointDistribution, y_coords: &[usize]) -> Result<InequalityCheck> {
    check_split(dist, y_coords)?;
    let support = dist.marginal(y_coords)?.len() as f64;
    Ok(InequalityCheck {
        lhs: cond_min_entropy_avg(dist, y_coords)?,
        rhs: min_entropy(dist)? - support.log2(),
    })
}

/// `Pr_y[H∞(X | Y = y) ≥ H̃∞(X | Y) − log(1/δ)] ≥ 1 − δ`.
pub fn pointwise_concentration(dist: &JointDistribution, y_coords: &[usize], delta: f64) -> Result<InequalityCheck> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid("δ must lie in (0, 1]"));
    }
    let avg = cond_min_entropy_avg(dist, y_coords)?;
    let threshold = avg + delta.log2();
    let total = dist.total_f64();
    let mass: f64 = conditional_rows(dist, y_coords)
        .values()
        .filter(|r| r.entropy >= threshold - TOLERANCE)
        .map(|r| r.weight)
        .sum::<f64>()
        / total;
    Ok(InequalityCheck {
        lhs: mass,
        rhs: 1.0 - delta,
    })
}

/// `H∞(Z | E) ≥ H∞(Z) − log(1/Pr(E))` for `Z` the `target` coordinates.
pub fn event_conditioning_loss<F>(dist: &JointDistribution, event: F, target: &[usize]) -> Result<InequalityCheck>
where
    F: Fn(&[u8]) -> bool,
{
    let pr: f64 = dist.iter().filter(|(o, _)| event(o)).map(|(_, p)| p).sum();
    let lhs = cond_min_entropy_event(dist, &event, target)?;
    Ok(InequalityCheck {
        lhs,
        rhs: min_entropy(&dist.marginal(target)?)? + pr.log2(),
    })
}

/// `H∞(Y) ≥ H∞(X, Y) − max_y H∞(X | Y = y)`.
pub fn conditioning_value_entropy(dist: &JointDistribution, y_coords: &[usize]) -> Result<InequalityCheck> {
    check_split(dist, y_coords)?;
    let max_cond = conditional_rows(dist, y_coords)
        .values()
        .map(|r| r.entropy)
        .fold(0.0, f64::max);
    Ok(InequalityCheck {
        lhs: min_entropy(&dist.marginal(y_coords)?)?,
        rhs: min_entropy(dist)? - max_cond,
    })
}
