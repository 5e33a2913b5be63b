//! Hints for many blocks, built by descending induction over coordinates.
//!
//! Stage `k` (from `ℓ` down to 2) refines every class `h` of the current
//! hint by a bucket hint for `X_k` given `(X_1, …, X_{k−1})`, computed on the
//! distribution conditioned on `h`. With `s = H∞(X_1, …, X_ℓ)/ℓ` and
//! `c = H∞(X_1, …, X_k | h)/s` the stage uses `K = 2D⌈c⌉` buckets and
//! `ε = 1/(2Dc)`.
//!
//! The final check conditions each `X_i` on the composite label and on the
//! realized prefix `X_1..X_{i−1}`, taking the worst prefix.

use std::collections::BTreeMap;

use serde::Serialize;

use super::distribution::{JointDistribution, TOLERANCE};
use super::hint::build_hint;
use super::measures::min_entropy;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultivariateBucket {
    /// One sub-bucket per stage, stage `ℓ` first; 0 marks a class that was
    /// not refined because its prefix entropy was already zero.
    pub label: Vec<usize>,
    pub probability: f64,
    /// `min_prefix H∞(X_i | Hint = h, X_<i = prefix)` per coordinate.
    pub per_coord: Vec<f64>,
    pub sum_bits: f64,
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultivariateViolation {
    FailingMassExceedsBound { bad_prob: f64, bound: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultivariateCertificate {
    pub arity: usize,
    pub d_param: f64,
    /// `s = H∞(X_1, …, X_ℓ)/ℓ`.
    pub s: f64,
    /// `sℓ(1 − 1/D)`.
    pub target_bits: f64,
    pub buckets: Vec<MultivariateBucket>,
    pub bad_prob: f64,
    /// `2Dℓ(ℓ−1)·2^(−s/2D)`.
    pub mass_bound: f64,
    pub violations: Vec<MultivariateViolation>,
    /// Composite label of every outcome, keyed by outcome.
    #[serde(skip)]
    pub assignment: BTreeMap<Vec<u8>, Vec<usize>>,
}

impl MultivariateCertificate {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn bucket(&self, label: &[usize]) -> Option<&MultivariateBucket> {
        self.buckets.iter().find(|b| b.label == label)
    }
}

/// `(K, ε)` for one refinement step at relative entropy `c`.
pub fn stage_params(c: f64, d_param: f64) -> (usize, f64) {
    let c = snap(c);
    let k = (2.0 * d_param * c.ceil() - 1e-9).ceil().max(1.0) as usize;
    (k, 1.0 / (2.0 * d_param * c))
}

fn snap(c: f64) -> f64 {
    let r = c.round();
    if (c - r).abs() < 1e-9 {
        r
    } else {
        c
    }
}

/// Builds the composite hint and certifies the per-bucket sum against
/// `sℓ(1 − 1/D)`.
pub fn multivariate_hint(dist: &JointDistribution, d_param: f64) -> Result<MultivariateCertificate> {
    let ell = dist.arity();
    if ell < 2 {
        return Err(Error::invalid("multivariate hint needs at least two coordinates"));
    }
    if !(d_param > 0.0) || !d_param.is_finite() {
        return Err(Error::invalid("D must be positive"));
    }
    let joint = min_entropy(dist)?;
    if joint <= 0.0 {
        return Err(Error::invalid("multivariate hint requires positive joint min-entropy"));
    }
    let s = joint / ell as f64;

    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); dist.len()];
    for k in (2..=ell).rev() {
        let classes = group_labels(&labels);
        let prefix: Vec<usize> = (0..k).collect();
        for members in classes.values() {
            let class = dist.select(members).expect("class is nonempty");
            let marginal = class.marginal(&prefix)?;
            let n_h = min_entropy(&marginal)?;
            if n_h <= TOLERANCE {
                for &i in members {
                    labels[i].push(0);
                }
                continue;
            }
            let (buckets, _) = stage_params(n_h / s, d_param);
            let y_coords: Vec<usize> = (0..k - 1).collect();
            let hint = build_hint(&marginal, &y_coords, buckets)?;
            for &i in members {
                let y = &dist.outcome(i)[..k - 1];
                labels[i].push(hint.bucket_of(y).expect("prefix in support"));
            }
        }
    }

    let total = dist.total_f64();
    let target_bits = s * ell as f64 * (1.0 - 1.0 / d_param);
    let mut buckets = Vec::new();
    let mut bad_prob = 0.0;
    for (label, members) in group_labels(&labels) {
        let class = dist.select(&members).expect("class is nonempty");
        let probability = members.iter().map(|&i| dist.weight_f64(i)).sum::<f64>() / total;
        let per_coord = (0..ell)
            .map(|i| worst_prefix_entropy(&class, i))
            .collect::<Result<Vec<f64>>>()?;
        let sum_bits: f64 = per_coord.iter().sum();
        let good = sum_bits >= target_bits - TOLERANCE;
        if !good {
            bad_prob += probability;
        }
        buckets.push(MultivariateBucket {
            label,
            probability,
            per_coord,
            sum_bits,
            good,
        });
    }
    let mass_bound = 2.0 * d_param * (ell * (ell - 1)) as f64 * (-s / (2.0 * d_param)).exp2();
    let mut violations = Vec::new();
    if bad_prob > mass_bound + TOLERANCE {
        violations.push(MultivariateViolation::FailingMassExceedsBound {
            bad_prob,
            bound: mass_bound,
        });
    }
    let assignment = (0..dist.len())
        .map(|i| (dist.outcome(i).to_vec(), labels[i].clone()))
        .collect();
    Ok(MultivariateCertificate {
        arity: ell,
        d_param,
        s,
        target_bits,
        buckets,
        bad_prob,
        mass_bound,
        violations,
        assignment,
    })
}

fn group_labels(labels: &[Vec<usize>]) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut out: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        out.entry(l.clone()).or_default().push(i);
    }
    out
}

fn worst_prefix_entropy(class: &JointDistribution, i: usize) -> Result<f64> {
    let prefix: Vec<usize> = (0..i).collect();
    let mut worst = f64::INFINITY;
    for members in class.group_by(&prefix).values() {
        let sub = class.select(members).expect("nonempty");
        worst = worst.min(min_entropy(&sub.marginal(&[i])?)?);
    }
    Ok(worst)
}
