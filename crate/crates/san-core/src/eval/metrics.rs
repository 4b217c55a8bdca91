//! Ranking metrics: AUC and unnormalized precision-at-K.

use crate::error::{Error, Result};

fn check_finite(scores: &[f64], what: &str) -> Result<()> {
    if scores.iter().all(|s| s.is_finite()) {
        Ok(())
    } else {
        Err(Error::precondition(format!("{what} scores must be finite")))
    }
}

/// Probability that a random positive outscores a random negative, with
/// ties counting half:
/// `(#{p > n} + 0.5·#{p = n}) / (|pos|·|neg|)`.
///
/// Computed from a single sort rather than the quadratic pair
/// enumeration; both give bit-identical results because every
/// intermediate count is an exactly representable float.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::precondition(
            "AUC needs at least one positive and one negative score",
        ));
    }
    check_finite(pos, "positive")?;
    check_finite(neg, "negative")?;
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut wins = 0.0;
    let mut neg_below = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let p = all[i..j].iter().filter(|&&(_, is_pos)| is_pos).count() as f64;
        let n = (j - i) as f64 - p;
        wins += p * neg_below + 0.5 * p * n;
        neg_below += n;
        i = j;
    }
    Ok(wins / (pos.len() as f64 * neg.len() as f64))
}

/// Operating points of the score threshold sweep, as (false positive
/// rate, true positive rate) pairs from (0,0) to (1,1). Tied scores move
/// as one block, producing a single point.
pub fn roc_points(pos: &[f64], neg: &[f64]) -> Result<Vec<(f64, f64)>> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::precondition(
            "an ROC curve needs at least one positive and one negative score",
        ));
    }
    check_finite(pos, "positive")?;
    check_finite(neg, "negative")?;
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        for &(_, is_pos) in &all[i..j] {
            if is_pos {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp as f64 / neg.len() as f64, tp as f64 / pos.len() as f64));
        i = j;
    }
    Ok(points)
}

/// One user's scored candidates, each flagged relevant or not.
#[derive(Debug, Clone, Default)]
pub struct RankedCandidates {
    /// (score, is_relevant) per candidate, in any order.
    pub entries: Vec<(f64, bool)>,
}

/// Expected number of relevant candidates in each user's top K, averaged
/// over users. Unnormalized: the result lives in [0, K], not [0, 1].
///
/// A block of tied scores straddling the K cutoff contributes its
/// expected relevant count under a uniform random ordering of the block
/// (q relevant among m tied candidates filling r remaining slots yield
/// q·r/m). Users with fewer than K candidates contribute all their
/// relevant candidates as-is.
pub fn precision_at_k(users: &[RankedCandidates], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::precondition("precision cutoff K must be at least 1"));
    }
    if users.is_empty() {
        return Err(Error::precondition(
            "precision needs at least one ranked user",
        ));
    }
    let mut total = 0.0;
    for user in users {
        check_finite(
            &user.entries.iter().map(|&(s, _)| s).collect::<Vec<_>>(),
            "candidate",
        )?;
        let mut entries = user.entries.clone();
        entries.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut slots = k;
        let mut i = 0;
        while i < entries.len() && slots > 0 {
            let mut j = i;
            while j < entries.len() && entries[j].0 == entries[i].0 {
                j += 1;
            }
            let m = j - i;
            let q = entries[i..j].iter().filter(|&&(_, rel)| rel).count();
            if m <= slots {
                total += q as f64;
                slots -= m;
            } else {
                total += q as f64 * slots as f64 / m as f64;
                slots = 0;
            }
            i = j;
        }
    }
    Ok(total / users.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Oracle: enumerate every (positive, negative) pair.
    fn quadratic_auc(pos: &[f64], neg: &[f64]) -> f64 {
        let mut wins = 0.0;
        for &p in pos {
            for &n in neg {
                if p > n {
                    wins += 1.0;
                } else if p == n {
                    wins += 0.5;
                }
            }
        }
        wins / (pos.len() as f64 * neg.len() as f64)
    }

    #[test]
    fn auc_counts_pairwise_wins_with_half_credit_ties() {
        assert_eq!(auc(&[0.9, 0.7], &[0.8, 0.1]).unwrap(), 0.75);
        assert_eq!(auc(&[1.0, 1.0], &[1.0]).unwrap(), 0.5);
        assert_eq!(auc(&[0.2; 5], &[0.2; 7]).unwrap(), 0.5);
        assert_eq!(auc(&[2.0, 3.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.0], &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn auc_matches_quadratic_oracle_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n_pos = rng.random_range(1..40);
            let n_neg = rng.random_range(1..40);
            // Coarse grid of scores so ties actually occur.
            let mut draw = |n: usize| -> Vec<f64> {
                (0..n).map(|_| rng.random_range(0..10) as f64 / 10.0).collect()
            };
            let pos = draw(n_pos);
            let neg = draw(n_neg);
            assert_eq!(auc(&pos, &neg).unwrap(), quadratic_auc(&pos, &neg));
        }
    }

    #[test]
    fn auc_complement_and_transform_invariance() {
        let pos = [0.11, 0.52, 0.93, 0.34];
        let neg = [0.25, 0.46, 0.07];
        let a = auc(&pos, &neg).unwrap();
        assert_relative_eq!(a + auc(&neg, &pos).unwrap(), 1.0, epsilon = 1e-15);
        // A strictly increasing transform leaves every comparison intact.
        let t = |s: f64| (3.0 * s).exp() + 1.0;
        let tp: Vec<f64> = pos.iter().map(|&s| t(s)).collect();
        let tn: Vec<f64> = neg.iter().map(|&s| t(s)).collect();
        assert_eq!(auc(&tp, &tn).unwrap(), a);
    }

    #[test]
    fn auc_rejects_empty_and_non_finite_input() {
        assert!(auc(&[], &[1.0]).is_err());
        assert!(auc(&[1.0], &[]).is_err());
        assert!(auc(&[f64::NAN], &[1.0]).is_err());
        assert!(auc(&[1.0], &[f64::INFINITY]).is_err());
    }

    #[test]
    fn roc_sweeps_from_origin_to_corner() {
        let points = roc_points(&[0.9, 0.7], &[0.8, 0.1]).unwrap();
        assert_eq!(
            points,
            vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        // Tied block moves as one step.
        let tied = roc_points(&[0.5], &[0.5]).unwrap();
        assert_eq!(tied, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    fn user(entries: &[(f64, bool)]) -> RankedCandidates {
        RankedCandidates { entries: entries.to_vec() }
    }

    #[test]
    fn precision_counts_top_k_relevant() {
        let u = user(&[(0.9, true), (0.8, true), (0.3, false), (0.1, false)]);
        assert_eq!(precision_at_k(&[u.clone()], 2).unwrap(), 2.0);
        assert_eq!(precision_at_k(&[u], 3).unwrap(), 2.0);
        // Averaged across users.
        let a = user(&[(0.9, true), (0.2, false)]);
        let b = user(&[(0.9, false), (0.2, false)]);
        assert_eq!(precision_at_k(&[a, b], 1).unwrap(), 0.5);
    }

    #[test]
    fn straddling_tie_block_contributes_its_expectation() {
        // Four candidates all tied, two relevant, K=2: 2·(2/4) = 1.
        let u = user(&[(0.5, true), (0.5, false), (0.5, true), (0.5, false)]);
        assert_eq!(precision_at_k(&[u], 2).unwrap(), 1.0);
        // A clear winner plus a straddling block of three with one
        // relevant: 1 + 1·(1/3).
        let u = user(&[(0.9, true), (0.5, false), (0.5, true), (0.5, false)]);
        assert_relative_eq!(
            precision_at_k(&[u], 2).unwrap(),
            1.0 + 1.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn short_candidate_lists_count_as_is() {
        let u = user(&[(0.9, true), (0.1, true)]);
        assert_eq!(precision_at_k(&[u], 4).unwrap(), 2.0);
        let empty = user(&[]);
        assert_eq!(precision_at_k(&[empty], 3).unwrap(), 0.0);
    }

    #[test]
    fn precision_is_monotone_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let users: Vec<RankedCandidates> = (0..5)
            .map(|_| {
                let n = rng.random_range(0..12);
                user(
                    &(0..n)
                        .map(|_| {
                            (rng.random_range(0..5) as f64 / 5.0, rng.random_bool(0.4))
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let mut last = 0.0;
        for k in 1..8 {
            let p = precision_at_k(&users, k).unwrap();
            assert!(p >= last - 1e-12, "Pre@{k} = {p} dropped below Pre@{} = {last}", k - 1);
            last = p;
        }
    }

    /// Monte-Carlo oracle: shuffle tied blocks uniformly and count the
    /// relevant candidates in the top K.
    fn shuffled_precision(
        users: &[RankedCandidates],
        k: usize,
        rounds: usize,
        rng: &mut ChaCha8Rng,
    ) -> (f64, f64) {
        let mut samples = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let mut total = 0.0;
            for u in users {
                let mut entries: Vec<(f64, bool, u64)> = u
                    .entries
                    .iter()
                    .map(|&(s, r)| (s, r, rng.random()))
                    .collect();
                // Random key breaks ties uniformly; scores still dominate.
                entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)));
                total += entries
                    .iter()
                    .take(k)
                    .filter(|&&(_, r, _)| r)
                    .count() as f64;
            }
            samples.push(total / users.len() as f64);
        }
        let mean = samples.iter().sum::<f64>() / rounds as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / rounds as f64;
        (mean, (var / rounds as f64).sqrt())
    }

    #[test]
    fn tie_expectation_matches_shuffle_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for trial in 0..4 {
            let users: Vec<RankedCandidates> = (0..3)
                .map(|_| {
                    let n = rng.random_range(3..10);
                    user(
                        &(0..n)
                            .map(|_| {
                                (rng.random_range(0..3) as f64, rng.random_bool(0.5))
                            })
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            let k = rng.random_range(1..5);
            let exact = precision_at_k(&users, k).unwrap();
            let (mc, se) = shuffled_precision(&users, k, 4000, &mut rng);
            let slack = 3.0 * se.max(1e-9);
            assert!(
                (exact - mc).abs() <= slack,
                "trial {trial}: exact {exact} vs Monte-Carlo {mc} ± {slack}"
            );
        }
    }

    #[test]
    fn precision_rejects_degenerate_input() {
        assert!(precision_at_k(&[], 2).is_err());
        assert!(precision_at_k(&[user(&[(1.0, true)])], 0).is_err());
        assert!(precision_at_k(&[user(&[(f64::NAN, true)])], 1).is_err());
    }
}
