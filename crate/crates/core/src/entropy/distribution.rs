use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};

/// Largest table the lab will hold.
pub const MAX_TABLE_ENTRIES: u64 = 1 << 24;
/// Widest coordinate supported.
pub const MAX_BLOCK_BITS: u8 = 8;
/// Comparison tolerance for floating-point probabilities and entropies.
pub const TOLERANCE: f64 = 1.0 / (1u64 << 30) as f64;

/// Probability masses, kept as exact integer weights when possible.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Weights {
    Exact(Vec<u64>),
    Real(Vec<f64>),
}

/// Explicit probability table over tuples of `arity` coordinates, each
/// coordinate a `block_bits`-bit value.
///
/// Only outcomes with positive mass are stored. Integer-weighted tables keep
/// their weights unnormalized, so conditioning is plain filtering and every
/// probability stays an exact rational `w / total`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    arity: usize,
    block_bits: u8,
    outcomes: Vec<u8>,
    weights: Weights,
}

impl JointDistribution {
    /// Builds an exact table from integer weights. Duplicate outcomes are
    /// merged, zero weights dropped.
    pub fn from_weights<I>(arity: usize, block_bits: u8, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, u64)>,
    {
        check_shape(arity, block_bits)?;
        let mut table: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
        for (outcome, w) in entries {
            check_outcome(arity, block_bits, &outcome)?;
            if w == 0 {
                continue;
            }
            let slot = table.entry(outcome).or_insert(0);
            *slot = slot.checked_add(w).ok_or_else(|| Error::invalid("weight overflow"))?;
        }
        check_size(table.len() as u64)?;
        let total: u128 = table.values().map(|&w| w as u128).sum();
        if total == 0 {
            return Err(Error::invalid("empty distribution"));
        }
        if total > u64::MAX as u128 {
            return Err(Error::invalid("total weight exceeds 64 bits"));
        }
        let mut outcomes = Vec::with_capacity(table.len() * arity);
        let mut weights = Vec::with_capacity(table.len());
        for (o, w) in table {
            outcomes.extend_from_slice(&o);
            weights.push(w);
        }
        Ok(JointDistribution {
            arity,
            block_bits,
            outcomes,
            weights: Weights::Exact(weights),
        })
    }

    /// Builds a floating-point table. Probabilities must be nonnegative and
    /// sum to one within 2^-40.
    pub fn from_probabilities<I>(arity: usize, block_bits: u8, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, f64)>,
    {
        check_shape(arity, block_bits)?;
        let mut table: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (outcome, p) in entries {
            check_outcome(arity, block_bits, &outcome)?;
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::invalid(format!("bad probability {p}")));
            }
            if p == 0.0 {
                continue;
            }
            *table.entry(outcome).or_insert(0.0) += p;
        }
        check_size(table.len() as u64)?;
        if table.is_empty() {
            return Err(Error::invalid("empty distribution"));
        }
        let sum: f64 = table.values().sum();
        if (sum - 1.0).abs() > 2f64.powi(-40) {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        let mut outcomes = Vec::with_capacity(table.len() * arity);
        let mut weights = Vec::with_capacity(table.len());
        for (o, p) in table {
            outcomes.extend_from_slice(&o);
            weights.push(p);
        }
        Ok(JointDistribution {
            arity,
            block_bits,
            outcomes,
            weights: Weights::Real(weights),
        })
    }

    pub fn uniform(arity: usize, block_bits: u8) -> Result<Self> {
        check_shape(arity, block_bits)?;
        let side = 1u64 << block_bits;
        let count = side
            .checked_pow(arity as u32)
            .filter(|&c| c <= MAX_TABLE_ENTRIES)
            .ok_or(Error::TooLarge {
                entries: u64::MAX,
                limit: MAX_TABLE_ENTRIES,
            })?;
        let entries = (0..count).map(|mut idx| {
            let mut o = vec![0u8; arity];
            for slot in o.iter_mut().rev() {
                *slot = (idx % side) as u8;
                idx /= side;
            }
            (o, 1u64)
        });
        Self::from_weights(arity, block_bits, entries)
    }

    pub fn point_mass(outcome: Vec<u8>, block_bits: u8) -> Result<Self> {
        let arity = outcome.len();
        Self::from_weights(arity, block_bits, [(outcome, 1)])
    }

    /// Uniform over `{0,1}^n × {e} ∪ {e} × {0,1}^n` (2^(n+1) − 1 points).
    pub fn cross(block_bits: u8, e: u8) -> Result<Self> {
        check_shape(2, block_bits)?;
        if (e as u32) >> block_bits != 0 {
            return Err(Error::invalid("cross centre out of range"));
        }
        let side = 1u16 << block_bits;
        let entries = (0..side).flat_map(|v| {
            let v = v as u8;
            [(vec![v, e], 1u64), (vec![e, v], 1u64)]
        });
        // the centre (e, e) appears twice above; dedupe to keep it uniform
        let mut seen = std::collections::BTreeSet::new();
        let entries: Vec<_> = entries.filter(|(o, _)| seen.insert(o.clone())).collect();
        Self::from_weights(2, block_bits, entries)
    }

    /// Independent product of two exact distributions.
    pub fn product(a: &Self, b: &Self) -> Result<Self> {
        if a.block_bits != b.block_bits {
            return Err(Error::DimensionMismatch("block widths differ".into()));
        }
        let (wa, wb) = match (&a.weights, &b.weights) {
            (Weights::Exact(x), Weights::Exact(y)) => (x, y),
            _ => return Err(Error::invalid("product requires exact weights")),
        };
        let mut entries = Vec::with_capacity(a.len() * b.len());
        for i in 0..a.len() {
            for j in 0..b.len() {
                let mut o = a.outcome(i).to_vec();
                o.extend_from_slice(b.outcome(j));
                let w = wa[i]
                    .checked_mul(wb[j])
                    .ok_or_else(|| Error::invalid("weight overflow"))?;
                entries.push((o, w));
            }
        }
        Self::from_weights(a.arity + b.arity, a.block_bits, entries)
    }

    /// Pseudo-random exact distribution for corpus testing. The generator
    /// mixes dense, sparse and skewed weight profiles.
    pub fn random<R: Rng + ?Sized>(arity: usize, block_bits: u8, rng: &mut R) -> Result<Self> {
        check_shape(arity, block_bits)?;
        let side = 1u64 << block_bits;
        let count = side.pow(arity as u32);
        check_size(count)?;
        let profile = rng.gen_range(0..4u8);
        let mut entries = Vec::new();
        for idx in 0..count {
            let w: u64 = match profile {
                0 => rng.gen_range(0..=1000),
                1 => {
                    if rng.gen_bool(0.15) {
                        rng.gen_range(1..=100)
                    } else {
                        0
                    }
                }
                2 => 1u64 << rng.gen_range(0..12),
                _ => {
                    if rng.gen_bool(0.5) {
                        rng.gen_range(1..=4)
                    } else {
                        0
                    }
                }
            };
            if w > 0 {
                entries.push((index_to_outcome(idx, arity, side), w));
            }
        }
        if entries.is_empty() {
            entries.push((index_to_outcome(rng.gen_range(0..count), arity, side), 1));
        }
        Self::from_weights(arity, block_bits, entries)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn block_bits(&self) -> u8 {
        self.block_bits
    }

    /// Number of outcomes with positive probability.
    pub fn len(&self) -> usize {
        match &self.weights {
            Weights::Exact(w) => w.len(),
            Weights::Real(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact(_))
    }

    pub fn outcome(&self, i: usize) -> &[u8] {
        &self.outcomes[i * self.arity..(i + 1) * self.arity]
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &[u8]> {
        self.outcomes.chunks_exact(self.arity)
    }

    pub(crate) fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Unnormalized weight of outcome `i` as a float.
    pub(crate) fn weight_f64(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Exact(w) => w[i] as f64,
            Weights::Real(w) => w[i],
        }
    }

    pub(crate) fn total_f64(&self) -> f64 {
        match &self.weights {
            Weights::Exact(w) => w.iter().map(|&x| x as u128).sum::<u128>() as f64,
            Weights::Real(w) => w.iter().sum(),
        }
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.weight_f64(i) / self.total_f64()
    }

    /// Iterator of `(outcome, probability)`.
    pub fn iter(&self) -> impl Iterator<Item = (&[u8], f64)> + '_ {
        let total = self.total_f64();
        (0..self.len()).map(move |i| (self.outcome(i), self.weight_f64(i) / total))
    }

    /// Restriction to the outcomes satisfying `event` (renormalization
    /// implied). `None` when the event has zero probability.
    pub fn filter<F: Fn(&[u8]) -> bool>(&self, event: F) -> Option<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| event(self.outcome(i))).collect();
        self.select(&keep)
    }

    /// Restriction to the given outcome indices.
    pub(crate) fn select(&self, keep: &[usize]) -> Option<Self> {
        if keep.is_empty() {
            return None;
        }
        let mut outcomes = Vec::with_capacity(keep.len() * self.arity);
        for &i in keep {
            outcomes.extend_from_slice(self.outcome(i));
        }
        let weights = match &self.weights {
            Weights::Exact(w) => Weights::Exact(keep.iter().map(|&i| w[i]).collect()),
            Weights::Real(w) => {
                let kept: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
                let sum: f64 = kept.iter().sum();
                if sum <= 0.0 {
                    return None;
                }
                Weights::Real(kept.into_iter().map(|x| x / sum).collect())
            }
        };
        Some(JointDistribution {
            arity: self.arity,
            block_bits: self.block_bits,
            outcomes,
            weights,
        })
    }

    /// Marginal over the listed coordinates, in the listed order.
    pub fn marginal(&self, coords: &[usize]) -> Result<Self> {
        self.check_coords(coords)?;
        if coords.is_empty() {
            return Err(Error::invalid("marginal over no coordinates"));
        }
        let groups = self.group_by(coords);
        let mut outcomes = Vec::with_capacity(groups.len() * coords.len());
        let weights = match &self.weights {
            Weights::Exact(w) => {
                let mut out = Vec::with_capacity(groups.len());
                for (key, members) in &groups {
                    outcomes.extend_from_slice(key);
                    out.push(members.iter().map(|&i| w[i]).sum());
                }
                Weights::Exact(out)
            }
            Weights::Real(w) => {
                let mut out = Vec::with_capacity(groups.len());
                for (key, members) in &groups {
                    outcomes.extend_from_slice(key);
                    out.push(members.iter().map(|&i| w[i]).sum());
                }
                Weights::Real(out)
            }
        };
        Ok(JointDistribution {
            arity: coords.len(),
            block_bits: self.block_bits,
            outcomes,
            weights,
        })
    }

    /// Groups outcome indices by their projection onto `coords`.
    pub(crate) fn group_by(&self, coords: &[usize]) -> BTreeMap<Vec<u8>, Vec<usize>> {
        let mut groups: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
        for i in 0..self.len() {
            let o = self.outcome(i);
            let key: Vec<u8> = coords.iter().map(|&c| o[c]).collect();
            groups.entry(key).or_default().push(i);
        }
        groups
    }

    pub(crate) fn check_coords(&self, coords: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.arity];
        for &c in coords {
            if c >= self.arity {
                return Err(Error::OutOfRange {
                    index: c,
                    bound: self.arity,
                });
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::invalid(format!("coordinate {c} listed twice")));
            }
        }
        Ok(())
    }

    /// Draws an outcome index.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.weights {
            Weights::Exact(w) => {
                let total: u64 = w.iter().sum();
                let mut r = rng.gen_range(0..total);
                for (i, &x) in w.iter().enumerate() {
                    if r < x {
                        return i;
                    }
                    r -= x;
                }
                w.len() - 1
            }
            Weights::Real(w) => {
                let mut r: f64 = rng.gen::<f64>();
                for (i, &x) in w.iter().enumerate() {
                    if r < x {
                        return i;
                    }
                    r -= x;
                }
                w.len() - 1
            }
        }
    }
}

fn index_to_outcome(mut idx: u64, arity: usize, side: u64) -> Vec<u8> {
    let mut o = vec![0u8; arity];
    for slot in o.iter_mut().rev() {
        *slot = (idx % side) as u8;
        idx /= side;
    }
    o
}

fn check_shape(arity: usize, block_bits: u8) -> Result<()> {
    if arity == 0 {
        return Err(Error::invalid("arity must be at least 1"));
    }
    if block_bits == 0 || block_bits > MAX_BLOCK_BITS {
        return Err(Error::invalid(format!(
            "block width {block_bits} outside 1..={MAX_BLOCK_BITS}"
        )));
    }
    Ok(())
}

fn check_outcome(arity: usize, block_bits: u8, outcome: &[u8]) -> Result<()> {
    if outcome.len() != arity {
        return Err(Error::invalid(format!(
            "outcome has {} coordinates, expected {arity}",
            outcome.len()
        )));
    }
    if let Some(&bad) = outcome.iter().find(|&&v| (v as u32) >> block_bits != 0) {
        return Err(Error::invalid(format!(
            "coordinate value {bad} does not fit in {block_bits} bits"
        )));
    }
    Ok(())
}

fn check_size(entries: u64) -> Result<()> {
    if entries > MAX_TABLE_ENTRIES {
        return Err(Error::TooLarge {
            entries,
            limit: MAX_TABLE_ENTRIES,
        });
    }
    Ok(())
}
