use std::collections::BTreeMap;
use std::hash::Hash;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Standard deviation of an empirical rate with true value `p`.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// One-sided check `rate ≤ bound + 3σ`, σ taken at `min(bound, 1)`.
pub fn within_upper_3sigma(rate: f64, bound: f64, trials: u64) -> bool {
    let b = bound.min(1.0);
    rate <= b + 3.0 * binomial_sigma(b, trials) + 1e-12
}

/// Two-sided check `|rate − p| ≤ 3σ`.
pub fn within_3sigma(rate: f64, p: f64, trials: u64) -> bool {
    (rate - p).abs() <= 3.0 * binomial_sigma(p, trials) + 1e-12
}

pub fn histogram<K: Ord + Clone, I: IntoIterator<Item = K>>(items: I) -> BTreeMap<K, u64> {
    let mut h = BTreeMap::new();
    for k in items {
        *h.entry(k).or_insert(0) += 1;
    }
    h
}

/// Total variation distance between two empirical histograms.
pub fn total_variation<K: Ord + Eq + Hash>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let mut sum = 0.0;
    for (k, &ca) in a {
        let cb = b.get(k).copied().unwrap_or(0);
        sum += (ca as f64 / na as f64 - cb as f64 / nb as f64).abs();
    }
    for (k, &cb) in b {
        if !a.contains_key(k) {
            sum += cb as f64 / nb as f64;
        }
    }
    sum / 2.0
}

/// Per-trial generator: the experiment seed selects the key, the trial the
/// stream, so trials are independent of scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_of_identical_and_disjoint() {
        let a = histogram([1, 1, 2, 3]);
        assert_eq!(total_variation(&a, &a), 0.0);
        let b = histogram([4, 5]);
        assert_eq!(total_variation(&a, &b), 1.0);
        let c = histogram([1, 1, 2, 2]);
        assert!((total_variation(&a, &c) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sigma_checks() {
        assert!(within_upper_3sigma(0.0, 0.0, 10));
        assert!(!within_upper_3sigma(0.01, 0.0, 10));
        assert!(within_3sigma(0.26, 0.25, 10_000));
        assert!(!within_3sigma(0.3, 0.25, 10_000));
    }
}
