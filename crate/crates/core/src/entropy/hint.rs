//! Spoiling-knowledge hints and chain-rule certificates.
//!
//! A hint buckets each value `y` of the conditioning coordinates by its
//! pointwise conditional min-entropy `H∞(X | Y = y)` relative to the joint
//! min-entropy `N`. Bucket `i` (1-based) covers `[(i−1)N/K, iN/K)`; the top
//! bucket is closed and also absorbs values at or above `N`, which occur when
//! a heavy `y` carries a nearly uniform `X`.
//!
//! Once the hint is revealed, every bucket of non-negligible probability
//! satisfies `H∞(X | Y = y, Hint = h) + H∞(Y | Hint = h) > (1 − ε − 1/K)·N`
//! for all `y` in the bucket, and the buckets failing this carry total mass
//! at most `K·2^(−εN)`. [`chain_rule_certificate`] checks both facts by
//! exhaustive computation.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use super::distribution::{JointDistribution, TOLERANCE};
use super::measures::{check_split, conditional_rows, max_and_total, min_entropy, ConditionalRow};
use crate::error::{Error, Result};

/// Assignment of conditioning values to hint buckets `1..=bucket_count`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HintFunction {
    pub bucket_count: usize,
    pub y_coords: Vec<usize>,
    pub assignment: BTreeMap<Vec<u8>, usize>,
    /// `Pr(Hint = h)` for every bucket with positive mass.
    pub bucket_probs: BTreeMap<usize, f64>,
    /// `H∞(X | Y = y)` for every `y` in the support.
    pub conditional_entropy: BTreeMap<Vec<u8>, f64>,
    /// `N = H∞(X, Y)`.
    pub joint_entropy: f64,
}

impl HintFunction {
    pub fn bucket_of(&self, y: &[u8]) -> Option<usize> {
        self.assignment.get(y).copied()
    }

    /// Conditioning values assigned to bucket `h`.
    pub fn members(&self, h: usize) -> impl Iterator<Item = &Vec<u8>> {
        self.assignment.iter().filter(move |(_, &b)| b == h).map(|(y, _)| y)
    }
}

/// Builds the bucket hint for `X | Y` with `K` buckets, `Y` given by
/// `y_coords`. Requires `H∞(X, Y) > 0`.
pub fn build_hint(dist: &JointDistribution, y_coords: &[usize], k: usize) -> Result<HintFunction> {
    check_split(dist, y_coords)?;
    if k == 0 {
        return Err(Error::invalid("bucket count must be at least 1"));
    }
    let joint = min_entropy(dist)?;
    if joint <= 0.0 {
        return Err(Error::invalid("hint requires positive joint min-entropy"));
    }
    let rows = conditional_rows(dist, y_coords);
    let exact_joint = exact_joint(dist);
    let total = max_and_total(dist).1;

    let mut assignment = BTreeMap::new();
    let mut conditional_entropy = BTreeMap::new();
    let mut bucket_mass: BTreeMap<usize, f64> = BTreeMap::new();
    for (y, row) in rows {
        let bucket = match (&exact_joint, row.exact) {
            (Some((wmax, w_total)), Some((m, wy))) => exact_bucket(m, wy, *wmax, *w_total, k),
            _ => float_bucket(row.entropy, joint, k),
        };
        *bucket_mass.entry(bucket).or_insert(0.0) += row.weight;
        conditional_entropy.insert(y.clone(), row.entropy);
        assignment.insert(y, bucket);
    }
    let bucket_probs = bucket_mass.into_iter().map(|(h, w)| (h, w / total)).collect();
    Ok(HintFunction {
        bucket_count: k,
        y_coords: y_coords.to_vec(),
        assignment,
        bucket_probs,
        conditional_entropy,
        joint_entropy: joint,
    })
}

fn exact_joint(dist: &JointDistribution) -> Option<(u64, u64)> {
    match dist.weights() {
        super::distribution::Weights::Exact(w) => Some((*w.iter().max()?, w.iter().sum())),
        super::distribution::Weights::Real(_) => None,
    }
}

/// Smallest `i < K` with `H∞(X|Y=y) < iN/K`, else `K`. With
/// `H∞(X|Y=y) = log(w_y/m)` and `N = log(W/w_max)` the test is
/// `m^K · W^i > w_max^i · w_y^K`, decided in exact integer arithmetic.
fn exact_bucket(m: u64, wy: u64, wmax: u64, total: u64, k: usize) -> usize {
    let lhs_base = BigUint::from(m).pow(k as u32);
    let rhs_base = BigUint::from(wy).pow(k as u32);
    let total = BigUint::from(total);
    let wmax = BigUint::from(wmax);
    let mut total_pow = BigUint::from(1u8);
    let mut wmax_pow = BigUint::from(1u8);
    for i in 1..k {
        total_pow *= &total;
        wmax_pow *= &wmax;
        if &lhs_base * &total_pow > &wmax_pow * &rhs_base {
            return i;
        }
    }
    k
}

fn float_bucket(h: f64, joint: f64, k: usize) -> usize {
    (1..k)
        .find(|&i| h < i as f64 * joint / k as f64 - TOLERANCE)
        .unwrap_or(k)
}

/// Per-bucket figures of a chain-rule certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BucketReport {
    pub bucket: usize,
    pub probability: f64,
    /// `min_{y ∈ h} H∞(X | Y = y, Hint = h)`.
    pub min_cond_entropy: f64,
    /// `H∞(Y | Hint = h)`.
    pub y_entropy: f64,
    pub lhs_bits: f64,
    pub good: bool,
}

/// A way in which a certificate contradicts the chain rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Total mass of failing buckets exceeds `K·2^(−εN)`.
    FailingMassExceedsBound { bad_prob: f64, bound: f64 },
    /// A bucket with `Pr(Hint = h) ≥ 2^(−εN)` fails the inequality.
    HeavyBucketFails {
        bucket: usize,
        probability: f64,
        lhs_bits: f64,
        rhs_bits: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainRuleCertificate {
    /// `N = H∞(X, Y)`.
    pub joint_entropy: f64,
    pub epsilon: f64,
    pub bucket_count: usize,
    pub buckets: Vec<BucketReport>,
    /// `(h, lhs_bits)` for buckets satisfying the inequality.
    pub good_buckets: Vec<(usize, f64)>,
    pub bad_prob: f64,
    /// `(1 − ε − 1/K)·N`.
    pub bound_rhs: f64,
    /// `K·2^(−εN)`.
    pub mass_bound: f64,
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub hint: HintFunction,
}

impl ChainRuleCertificate {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively certifies the bucketed chain rule for `X | Y` at `(K, ε)`.
///
/// A certificate that contradicts the rule is still returned, with its
/// [`Violation`]s listed; errors are reserved for invalid input.
pub fn chain_rule_certificate(
    dist: &JointDistribution,
    y_coords: &[usize],
    k: usize,
    epsilon: f64,
) -> Result<ChainRuleCertificate> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let hint = build_hint(dist, y_coords, k)?;
    let joint = hint.joint_entropy;
    let rows = conditional_rows(dist, y_coords);
    let bound_rhs = (1.0 - epsilon - 1.0 / k as f64) * joint;
    let mass_bound = k as f64 * (-epsilon * joint).exp2();
    let heavy_threshold = (-epsilon * joint).exp2();

    let mut per_bucket: BTreeMap<usize, Vec<&ConditionalRow>> = BTreeMap::new();
    for (y, row) in &rows {
        per_bucket.entry(hint.assignment[y]).or_default().push(row);
    }

    let mut buckets = Vec::new();
    let mut good_buckets = Vec::new();
    let mut violations = Vec::new();
    let mut bad_prob = 0.0;
    for (h, members) in per_bucket {
        let probability = hint.bucket_probs[&h];
        let min_cond_entropy = members.iter().map(|r| r.entropy).fold(f64::INFINITY, f64::min);
        let y_entropy = bucket_y_entropy(&members);
        let lhs_bits = min_cond_entropy + y_entropy;
        let good = lhs_bits > bound_rhs - TOLERANCE;
        if good {
            good_buckets.push((h, lhs_bits));
        } else {
            bad_prob += probability;
            if probability >= heavy_threshold * (1.0 + TOLERANCE) {
                violations.push(Violation::HeavyBucketFails {
                    bucket: h,
                    probability,
                    lhs_bits,
                    rhs_bits: bound_rhs,
                });
            }
        }
        buckets.push(BucketReport {
            bucket: h,
            probability,
            min_cond_entropy,
            y_entropy,
            lhs_bits,
            good,
        });
    }
    if bad_prob > mass_bound + TOLERANCE {
        violations.push(Violation::FailingMassExceedsBound {
            bad_prob,
            bound: mass_bound,
        });
    }
    Ok(ChainRuleCertificate {
        joint_entropy: joint,
        epsilon,
        bucket_count: k,
        buckets,
        good_buckets,
        bad_prob,
        bound_rhs,
        mass_bound,
        violations,
        hint,
    })
}

/// `H∞(Y | Hint = h)` from the rows of one bucket.
fn bucket_y_entropy(members: &[&ConditionalRow]) -> f64 {
    if let Some(exact) = members
        .iter()
        .map(|r| r.exact.map(|(_, w)| w))
        .collect::<Option<Vec<u64>>>()
    {
        let max = *exact.iter().max().unwrap() as f64;
        let sum = exact.iter().map(|&w| w as u128).sum::<u128>() as f64;
        return (sum.log2() - max.log2()).max(0.0);
    }
    let max = members.iter().map(|r| r.weight).fold(0.0, f64::max);
    let sum: f64 = members.iter().map(|r| r.weight).sum();
    (sum.log2() - max.log2()).max(0.0)
}

/// Instantiation for `H∞(X, Y) = m·n`: `ε = Δ/m`,
/// `K = ⌈m/Δ⌉`.
pub fn asymmetric_block_params(m: f64, delta: f64) -> Result<(usize, f64)> {
    if !(m > 0.0) || !(delta > 0.0) {
        return Err(Error::invalid("m and Δ must be positive"));
    }
    let k = (m / delta - 1e-9).ceil().max(1.0) as usize;
    Ok((k, delta / m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_arms_split_into_distinct_buckets() {
        let c = JointDistribution::cross(2, 0).unwrap();
        let hint = build_hint(&c, &[0], 2).unwrap();
        // y = e: X uniform over 4 values (2 bits); y ≠ e: X fixed (0 bits)
        assert_eq!(hint.conditional_entropy[&vec![0]], 2.0);
        for y in 1..4u8 {
            assert_eq!(hint.conditional_entropy[&vec![y]], 0.0);
        }
        let arm = hint.bucket_of(&[0]).unwrap();
        let rest = hint.bucket_of(&[1]).unwrap();
        assert_ne!(arm, rest);
        assert_eq!(rest, 1);
        // 2 ≥ N/2 ≈ 1.40, so the arm lands in the top bucket
        assert_eq!(arm, 2);
    }

    #[test]
    fn independent_x_lands_in_one_bucket() {
        let d = JointDistribution::uniform(2, 3).unwrap();
        let hint = build_hint(&d, &[1], 4).unwrap();
        assert_eq!(hint.bucket_probs.len(), 1);
        // H(X|Y=y) = 3 = N/2 sits on the boundary 2N/4: half-open buckets
        // send it up to bucket 3
        assert_eq!(hint.bucket_probs.keys().next(), Some(&3));
    }

    #[test]
    fn boundary_goes_to_upper_bucket_exactly() {
        // N = 2 bits, y=0 has H(X|y) = 1 = N/2 exactly
        let d = JointDistribution::from_weights(
            2,
            2,
            [(vec![0, 0], 1), (vec![1, 0], 1), (vec![0, 1], 1), (vec![0, 2], 1)],
        )
        .unwrap();
        let hint = build_hint(&d, &[1], 2).unwrap();
        assert_eq!(hint.bucket_of(&[0]), Some(2));
        assert_eq!(hint.bucket_of(&[1]), Some(1));
    }

    #[test]
    fn single_bucket_is_constant() {
        let c = JointDistribution::cross(3, 2).unwrap();
        let hint = build_hint(&c, &[0], 1).unwrap();
        assert!(hint.assignment.values().all(|&b| b == 1));
        let cert = chain_rule_certificate(&c, &[0], 1, 0.5).unwrap();
        assert!(cert.holds());
        assert_eq!(cert.buckets.len(), 1);
    }

    #[test]
    fn cross_certificate_passes() {
        let c = JointDistribution::cross(2, 0).unwrap();
        let cert = chain_rule_certificate(&c, &[0], 2, 0.1).unwrap();
        assert!(cert.holds(), "{cert:?}");
    }

    #[test]
    fn product_of_uniforms_has_only_good_buckets() {
        let d = JointDistribution::uniform(2, 4).unwrap();
        for k in [1, 2, 3, 8] {
            for eps in [0.05, 0.25, 0.9] {
                let cert = chain_rule_certificate(&d, &[0], k, eps).unwrap();
                assert_eq!(cert.bad_prob, 0.0);
                assert!(cert.holds());
            }
        }
    }

    #[test]
    fn rejects_zero_entropy_and_bad_params() {
        let p = JointDistribution::point_mass(vec![1, 1], 2).unwrap();
        assert!(build_hint(&p, &[0], 2).is_err());
        let c = JointDistribution::cross(2, 0).unwrap();
        assert!(build_hint(&c, &[0], 0).is_err());
        assert!(chain_rule_certificate(&c, &[0], 2, 0.0).is_err());
    }

    #[test]
    fn float_and_exact_tables_bucket_alike() {
        let c = JointDistribution::cross(3, 1).unwrap();
        let f = JointDistribution::from_probabilities(2, 3, c.iter().map(|(o, p)| (o.to_vec(), p))).unwrap();
        for k in 1..6 {
            assert_eq!(
                build_hint(&c, &[0], k).unwrap().assignment,
                build_hint(&f, &[0], k).unwrap().assignment
            );
        }
    }

    #[test]
    fn block_parameters() {
        assert_eq!(asymmetric_block_params(4.0, 1.0).unwrap(), (4, 0.25));
        assert_eq!(asymmetric_block_params(5.0, 2.0).unwrap(), (3, 0.4));
    }
}
