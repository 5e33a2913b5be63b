use std::collections::BTreeMap;

use super::distribution::{JointDistribution, Weights};
use crate::error::{Error, Result};

/// Largest single-outcome weight together with the total weight.
pub(crate) fn max_and_total(dist: &JointDistribution) -> (f64, f64) {
    match dist.weights() {
        Weights::Exact(w) => {
            let max = *w.iter().max().expect("nonempty") as f64;
            let total = w.iter().map(|&x| x as u128).sum::<u128>() as f64;
            (max, total)
        }
        Weights::Real(w) => {
            let max = w.iter().cloned().fold(0.0, f64::max);
            (max, w.iter().sum())
        }
    }
}

/// `H∞(D) = −log₂ max_x Pr(D = x)`, in bits.
pub fn min_entropy(dist: &JointDistribution) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::invalid("empty distribution"));
    }
    let (max, total) = max_and_total(dist);
    Ok(clamp_zero(total.log2() - max.log2()))
}

/// Worst-case min-entropy of the `target` coordinates given `event`.
pub fn cond_min_entropy_event<F>(dist: &JointDistribution, event: F, target: &[usize]) -> Result<f64>
where
    F: Fn(&[u8]) -> bool,
{
    dist.check_coords(target)?;
    let conditioned = dist.filter(event).ok_or(Error::ZeroProbabilityEvent)?;
    min_entropy(&conditioned.marginal(target)?)
}

/// Average-case conditional min-entropy `H̃∞(X | Y)` where `Y` is formed by
/// `y_coords` and `X` by the remaining coordinates:
/// `−log₂ Σ_y max_x Pr(X = x, Y = y)`.
pub fn cond_min_entropy_avg(dist: &JointDistribution, y_coords: &[usize]) -> Result<f64> {
    check_split(dist, y_coords)?;
    let groups = dist.group_by(y_coords);
    let guess = match dist.weights() {
        Weights::Exact(w) => {
            let total: u128 = w.iter().map(|&x| x as u128).sum();
            let best: u128 = groups
                .values()
                .map(|members| members.iter().map(|&i| w[i]).max().unwrap() as u128)
                .sum();
            best as f64 / total as f64
        }
        Weights::Real(w) => {
            let total: f64 = w.iter().sum();
            let best: f64 = groups
                .values()
                .map(|members| members.iter().map(|&i| w[i]).fold(0.0, f64::max))
                .sum();
            best / total
        }
    };
    Ok(clamp_zero(-guess.log2()))
}

/// One value `y` of the conditioning coordinates with the statistics needed
/// for exact comparisons.
#[derive(Clone, Debug)]
pub(crate) struct ConditionalRow {
    /// Marginal weight `w(y)`.
    pub weight: f64,
    /// Exact counterparts when the table is integer-weighted.
    pub exact: Option<(u64, u64)>,
    /// `H∞(X | Y = y)` in bits.
    pub entropy: f64,
}

/// Per-`y` conditional min-entropies `H∞(X | Y = y)`.
pub(crate) fn conditional_rows(dist: &JointDistribution, y_coords: &[usize]) -> BTreeMap<Vec<u8>, ConditionalRow> {
    let groups = dist.group_by(y_coords);
    groups
        .into_iter()
        .map(|(y, members)| {
            let row = match dist.weights() {
                Weights::Exact(w) => {
                    let max = members.iter().map(|&i| w[i]).max().unwrap();
                    let sum: u64 = members.iter().map(|&i| w[i]).sum();
                    ConditionalRow {
                        weight: sum as f64,
                        exact: Some((max, sum)),
                        entropy: clamp_zero((sum as f64).log2() - (max as f64).log2()),
                    }
                }
                Weights::Real(w) => {
                    let max = members.iter().map(|&i| w[i]).fold(0.0, f64::max);
                    let sum: f64 = members.iter().map(|&i| w[i]).sum();
                    ConditionalRow {
                        weight: sum,
                        exact: None,
                        entropy: clamp_zero(sum.log2() - max.log2()),
                    }
                }
            };
            (y, row)
        })
        .collect()
}

/// Per-`y` conditional min-entropies `H∞(X | Y = y)` keyed by `y`.
pub fn pointwise_cond_min_entropy(dist: &JointDistribution, y_coords: &[usize]) -> Result<BTreeMap<Vec<u8>, f64>> {
    check_split(dist, y_coords)?;
    Ok(conditional_rows(dist, y_coords)
        .into_iter()
        .map(|(y, r)| (y, r.entropy))
        .collect())
}

pub(crate) fn check_split(dist: &JointDistribution, y_coords: &[usize]) -> Result<()> {
    dist.check_coords(y_coords)?;
    if y_coords.is_empty() || y_coords.len() >= dist.arity() {
        return Err(Error::invalid(
            "conditioning coordinates must be a nonempty proper subset",
        ));
    }
    Ok(())
}

// -log2 of values within an ulp of one can come out as -0.0 or -1e-16.
fn clamp_zero(x: f64) -> f64 {
    if x < 0.0 && x > -1e-12 {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn uniform_and_point_mass() {
        let u = JointDistribution::uniform(3, 1).unwrap();
        assert!(close(min_entropy(&u).unwrap(), 3.0));
        let p = JointDistribution::point_mass(vec![1, 2], 2).unwrap();
        assert_eq!(min_entropy(&p).unwrap(), 0.0);
    }

    #[test]
    fn cross_min_entropy_is_log7() {
        let c = JointDistribution::cross(2, 0).unwrap();
        assert!(close(min_entropy(&c).unwrap(), 7f64.log2()));
    }

    #[test]
    fn cross_arm_event_gives_full_second_coordinate() {
        let c = JointDistribution::cross(2, 3).unwrap();
        let h = cond_min_entropy_event(&c, |o| o[0] == 3, &[1]).unwrap();
        assert!(close(h, 2.0));
    }

    #[test]
    fn event_of_whole_space_is_identity() {
        let c = JointDistribution::cross(3, 5).unwrap();
        let h = cond_min_entropy_event(&c, |_| true, &[0, 1]).unwrap();
        assert!(close(h, min_entropy(&c).unwrap()));
    }

    #[test]
    fn zero_probability_event_is_rejected() {
        let c = JointDistribution::cross(2, 0).unwrap();
        assert!(matches!(
            cond_min_entropy_event(&c, |o| o == [1, 1], &[0]),
            Err(Error::ZeroProbabilityEvent)
        ));
    }

    #[test]
    fn full_disclosure_and_independence() {
        let same = JointDistribution::from_weights(2, 3, (0..8u8).map(|v| (vec![v, v], 1))).unwrap();
        assert_eq!(cond_min_entropy_avg(&same, &[1]).unwrap(), 0.0);
        let indep = JointDistribution::uniform(2, 3).unwrap();
        assert!(close(cond_min_entropy_avg(&indep, &[1]).unwrap(), 3.0));
    }

    #[test]
    fn cross_average_conditional_meets_marginal() {
        // Σ_y max_x Pr(x, y) = 1/7 (y = e) + 3 · 1/7 = 4/7, which coincides
        // with the marginal's largest mass Pr(X₂ = e) = 4/7.
        for n in 1..=4u8 {
            let c = JointDistribution::cross(n, 0).unwrap();
            let avg = cond_min_entropy_avg(&c, &[0]).unwrap();
            let marginal = min_entropy(&c.marginal(&[1]).unwrap()).unwrap();
            let expected = ((2f64.powi(n as i32 + 1) - 1.0) / 2f64.powi(n as i32)).log2();
            assert!(close(avg, expected), "n={n}");
            assert!(close(marginal, expected), "n={n}");
        }
    }

    #[test]
    fn split_must_be_proper() {
        let c = JointDistribution::cross(2, 0).unwrap();
        assert!(cond_min_entropy_avg(&c, &[]).is_err());
        assert!(cond_min_entropy_avg(&c, &[0, 1]).is_err());
        assert!(cond_min_entropy_avg(&c, &[2]).is_err());
    }
}
