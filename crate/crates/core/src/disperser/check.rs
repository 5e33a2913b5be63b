use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::graph::BipartiteRegularGraph;
use crate::error::{Error, Result};

/// Largest number of subsets the exhaustive check will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Every `K`-subset of right vertices; `parallel` splits the work by
    /// first element across the rayon pool.
    Exhaustive { parallel: bool },
    /// Uniformly drawn `K`-subsets.
    Sampled { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CheckedMode {
    Exhaustive {
        subsets: u128,
        /// `min |N(S)|` over all `K`-subsets.
        min_neighborhood: usize,
    },
    Sampled {
        trials: u64,
        failures: u64,
        failure_rate: f64,
        /// One-sided Hoeffding upper bound on the failure probability.
        failure_upper_bound: f64,
        confidence: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisperserWitness {
    pub k: usize,
    pub l: usize,
    pub pass: bool,
    /// A `K`-subset with `|N(S)| < L`; in exhaustive mode the
    /// lexicographically smallest one.
    pub counterexample: Option<Vec<u32>>,
    pub checked: CheckedMode,
}

const SAMPLED_CONFIDENCE: f64 = 0.95;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Checks that every `K`-subset of right vertices has at least `L` distinct
/// left neighbours.
pub fn check_disperser(graph: &BipartiteRegularGraph, k: usize, l: usize, mode: CheckMode) -> Result<DisperserWitness> {
    let ell = graph.ell();
    if k == 0 || k > ell || l == 0 || l > ell {
        return Err(Error::invalid(format!(
            "need 1 ≤ K ≤ ℓ and 1 ≤ L ≤ ℓ (K = {k}, L = {l}, ℓ = {ell})"
        )));
    }
    match mode {
        CheckMode::Exhaustive { parallel } => {
            let subsets = binomial(ell, k);
            if subsets > EXHAUSTIVE_LIMIT {
                return Err(Error::CombinatorialBlowup {
                    ell,
                    k,
                    subsets,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let scan = |first: usize| scan_first(graph, k, l, first);
            let parts: Vec<(usize, Option<Vec<u32>>)> = if parallel {
                (0..=ell - k).into_par_iter().map(scan).collect()
            } else {
                (0..=ell - k).map(scan).collect()
            };
            let min_neighborhood = parts.iter().map(|p| p.0).min().unwrap_or(ell);
            let counterexample = parts.into_iter().find_map(|p| p.1);
            Ok(DisperserWitness {
                k,
                l,
                pass: counterexample.is_none(),
                counterexample,
                checked: CheckedMode::Exhaustive {
                    subsets,
                    min_neighborhood,
                },
            })
        }
        CheckMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(Error::invalid("sampled mode needs at least one trial"));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut marks = Marks::new(ell);
            let mut failures = 0u64;
            let mut counterexample = None;
            for _ in 0..trials {
                let mut s: Vec<u32> = sample(&mut rng, ell, k).into_iter().map(|v| v as u32).collect();
                if marks.neighborhood(graph, &s) < l {
                    failures += 1;
                    if counterexample.is_none() {
                        s.sort_unstable();
                        counterexample = Some(s);
                    }
                }
            }
            let rate = failures as f64 / trials as f64;
            let slack = ((1.0 / (1.0 - SAMPLED_CONFIDENCE)).ln() / (2.0 * trials as f64)).sqrt();
            Ok(DisperserWitness {
                k,
                l,
                pass: failures == 0,
                counterexample,
                checked: CheckedMode::Sampled {
                    trials,
                    failures,
                    failure_rate: rate,
                    failure_upper_bound: (rate + slack).min(1.0),
                    confidence: SAMPLED_CONFIDENCE,
                },
            })
        }
    }
}

/// `min |N(S)|` over all `K`-subsets, i.e. the largest `L` for which the
/// graph is a `(K, L)`-disperser.
pub fn min_expansion(graph: &BipartiteRegularGraph, k: usize) -> Result<usize> {
    let w = check_disperser(graph, k, 1, CheckMode::Exhaustive { parallel: true })?;
    match w.checked {
        CheckedMode::Exhaustive { min_neighborhood, .. } => Ok(min_neighborhood),
        CheckedMode::Sampled { .. } => unreachable!(),
    }
}

/// Enumerates the `K`-subsets whose smallest element is `first`, in
/// lexicographic order.
fn scan_first(graph: &BipartiteRegularGraph, k: usize, l: usize, first: usize) -> (usize, Option<Vec<u32>>) {
    let ell = graph.ell();
    let mut marks = Marks::new(ell);
    let mut s: Vec<u32> = std::iter::once(first as u32)
        .chain((first + 1..first + k).map(|v| v as u32))
        .collect();
    let mut min = ell;
    let mut witness = None;
    loop {
        let size = marks.neighborhood(graph, &s);
        min = min.min(size);
        if size < l && witness.is_none() {
            witness = Some(s.clone());
        }
        // next combination of the tail, keeping s[0] fixed
        let mut i = k;
        loop {
            if i <= 1 {
                return (min, witness);
            }
            i -= 1;
            if (s[i] as usize) < ell - k + i {
                break;
            }
        }
        s[i] += 1;
        for j in i + 1..k {
            s[j] = s[j - 1] + 1;
        }
    }
}

/// Generation-stamped membership marks for counting neighbourhoods.
struct Marks {
    stamp: Vec<u32>,
    current: u32,
}

impl Marks {
    fn new(ell: usize) -> Self {
        Marks {
            stamp: vec![0; ell],
            current: 0,
        }
    }

    fn neighborhood(&mut self, graph: &BipartiteRegularGraph, s: &[u32]) -> usize {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.stamp.fill(0);
            self.current = 1;
        }
        let mut count = 0;
        for &v in s {
            for &u in graph.row(v as usize) {
                let slot = &mut self.stamp[u as usize];
                if *slot != self.current {
                    *slot = self.current;
                    count += 1;
                }
            }
        }
        count
    }
}

/// `N(S) ⊄ T`: the neighbourhood of `S` escapes `T`. Holds for every
/// `|S| ≥ K`, `|T| < L` whenever the graph is a `(K, L)`-disperser.
pub fn superset_monotonicity_check(graph: &BipartiteRegularGraph, s: &[u32], t: &[u32]) -> Result<bool> {
    let ell = graph.ell();
    let mut in_t = vec![false; ell];
    for &v in s.iter().chain(t) {
        if v as usize >= ell {
            return Err(Error::OutOfRange {
                index: v as usize,
                bound: ell,
            });
        }
    }
    for &v in t {
        in_t[v as usize] = true;
    }
    Ok(s.iter()
        .flat_map(|&v| graph.row(v as usize))
        .any(|&u| !in_t[u as usize]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disperser::sample_regular_graph;

    const EX: CheckMode = CheckMode::Exhaustive { parallel: false };

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn complete_graph_passes() {
        let g = BipartiteRegularGraph::complete(8).unwrap();
        assert!(check_disperser(&g, 1, 8, EX).unwrap().pass);
    }

    #[test]
    fn identity_fails_with_first_pair() {
        let g = BipartiteRegularGraph::identity(8).unwrap();
        let w = check_disperser(&g, 2, 3, EX).unwrap();
        assert!(!w.pass);
        assert_eq!(w.counterexample, Some(vec![0, 1]));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        for seed in 0..10 {
            let g = sample_regular_graph(12, 2, seed).unwrap();
            for l in 3..8 {
                let a = check_disperser(&g, 3, l, EX).unwrap();
                let b = check_disperser(&g, 3, l, CheckMode::Exhaustive { parallel: true }).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn counterexample_is_lexicographically_first() {
        let g = sample_regular_graph(9, 2, 4).unwrap();
        let l = min_expansion(&g, 3).unwrap() + 1;
        let w = check_disperser(&g, 3, l, EX).unwrap();
        let mut first = None;
        'outer: for a in 0..9u32 {
            for b in a + 1..9 {
                for c in b + 1..9 {
                    let mut n: Vec<u32> = [a, b, c]
                        .iter()
                        .flat_map(|&v| g.neighbors(v as usize).unwrap().to_vec())
                        .collect();
                    n.sort_unstable();
                    n.dedup();
                    if n.len() < l {
                        first = Some(vec![a, b, c]);
                        break 'outer;
                    }
                }
            }
        }
        assert_eq!(w.counterexample, first);
    }

    #[test]
    fn blowup_is_refused() {
        let g = sample_regular_graph(64, 2, 0).unwrap();
        assert!(matches!(
            check_disperser(&g, 32, 10, EX),
            Err(Error::CombinatorialBlowup { .. })
        ));
        let w = check_disperser(&g, 32, 10, CheckMode::Sampled { trials: 100, seed: 1 }).unwrap();
        assert!(w.pass);
    }

    #[test]
    fn sampled_reports_rate() {
        let g = BipartiteRegularGraph::identity(6).unwrap();
        let w = check_disperser(&g, 2, 3, CheckMode::Sampled { trials: 50, seed: 3 }).unwrap();
        assert!(!w.pass);
        match w.checked {
            CheckedMode::Sampled {
                failures, failure_rate, ..
            } => {
                assert_eq!(failures, 50);
                assert_eq!(failure_rate, 1.0);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn superset_check_on_complete_graph() {
        let g = BipartiteRegularGraph::complete(5).unwrap();
        assert!(superset_monotonicity_check(&g, &[2], &[0, 1, 2, 3]).unwrap());
        assert!(!superset_monotonicity_check(&g, &[2], &[0, 1, 2, 3, 4]).unwrap());
        assert!(superset_monotonicity_check(&g, &[7], &[]).is_err());
    }
}
