//! Labeled candidate pairs for the two prediction tasks.
//!
//! For the link task, positives are the social links present in the test
//! snapshot but not the train snapshot (new links when train precedes test,
//! missing links otherwise) and negatives are pairs linked in neither.
//! [`Scope`] controls the candidate universe: hop-2 pairs sharing a common
//! social neighbor in the train graph, or any-hop pairs (optionally keeping
//! only positives whose endpoints both have a social link in train).
//!
//! For the attribute task, labels come from [`remove_user_attributes`]: a
//! sampled user's removed positive links are the inference targets and
//! their negative links are the negative examples.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeRef, Snapshot, SocialAttributeNetwork};

/// Which kind of link a candidate set is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    SocialLink,
    AttributeLink,
}

/// Candidate label relative to the test snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Pos,
    Neg,
}

/// Candidate universe for the link task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    /// Pairs at social distance exactly two in train (≥1 common social
    /// neighbor, not adjacent), both classes.
    #[serde(rename = "hop2cat1")]
    Hop2Cat1,
    /// Unrestricted pairs.
    #[serde(rename = "anyhop")]
    AnyHop,
    /// Any-hop, keeping only positives whose endpoints both have ≥1 social
    /// link in train.
    #[serde(rename = "cat1")]
    Category1,
    /// Any-hop, all positives (the union of categories 1 and 2).
    #[serde(rename = "cat1and2")]
    Category1And2,
}

impl std::str::FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scope> {
        match s {
            "hop2cat1" => Ok(Scope::Hop2Cat1),
            "anyhop" => Ok(Scope::AnyHop),
            "cat1" => Ok(Scope::Category1),
            "cat1and2" => Ok(Scope::Category1And2),
            other => Err(Error::parse(
                "scope",
                None,
                format!("unknown scope {other:?} (want hop2cat1|anyhop|cat1|cat1and2)"),
            )),
        }
    }
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scope::Hop2Cat1 => "hop2cat1",
            Scope::AnyHop => "anyhop",
            Scope::Category1 => "cat1",
            Scope::Category1And2 => "cat1and2",
        })
    }
}

/// How many negative examples to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeMode {
    /// Every non-link in the scope. Feasible for hop-2 scopes and small
    /// networks; the any-hop universe grows as N².
    Exhaustive,
    /// A seeded uniform sample of at most `ratio × |positives|` negatives.
    Capped { ratio: f64 },
}

/// Options for [`extract_labels`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelParams {
    pub scope: Scope,
    pub negatives: NegativeMode,
    /// Seed for the capped negative sample (unused in exhaustive mode).
    pub seed: u64,
}

/// Labeled candidate pairs for one task.
///
/// Invariants: no duplicates; no pair is a train link; labels reflect test
/// membership; pairs are sorted, which fixes iteration order everywhere
/// downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub task: Task,
    pub scope: Scope,
    pub pairs: Vec<(NodeRef, NodeRef, Label)>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n_pos(&self) -> usize {
        self.pairs.iter().filter(|&&(_, _, l)| l == Label::Pos).count()
    }

    pub fn n_neg(&self) -> usize {
        self.len() - self.n_pos()
    }
}

fn same_social_universe(a: &SocialAttributeNetwork, b: &SocialAttributeNetwork) -> Result<()> {
    let matches = a.n_social() == b.n_social()
        && match (a.names(), b.names()) {
            (Some(na), Some(nb)) => na.social == nb.social,
            _ => true,
        };
    if matches {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "snapshots cover different social universes ({} vs {} nodes)",
            a.n_social(),
            b.n_social()
        )))
    }
}

/// Unordered pairs at social distance exactly 2 in `net`: not adjacent, at
/// least one common social neighbor (sorted, each pair once with u < v).
fn hop2_pairs(net: &SocialAttributeNetwork) -> Vec<(u32, u32)> {
    let mut seen: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    for t in 0..net.n_social() {
        let nbrs = net.social_neighbors(t);
        for (i, &(u, _)) in nbrs.iter().enumerate() {
            for &(v, _) in &nbrs[i + 1..] {
                // Neighbor lists are sorted, so u < v already.
                if net.has_social_edge(u as usize, v as usize) {
                    continue;
                }
                let key = ((u as u64) << 32) | v as u64;
                if seen.insert(key) {
                    out.push((u, v));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Extract labeled social-link candidates from a train/test snapshot pair.
///
/// Positives are test links absent from train; negatives are pairs linked
/// in neither snapshot, restricted (like the positives) to the scope's
/// candidate universe. The direction — new links versus missing links — is
/// purely a matter of which snapshot is passed as `test`.
pub fn extract_labels(
    train: &Snapshot,
    test: &Snapshot,
    task: Task,
    params: &LabelParams,
) -> Result<CandidateSet> {
    if task != Task::SocialLink {
        return Err(Error::precondition(
            "extract_labels handles the social-link task; attribute-task labels \
             come from remove_user_attributes",
        ));
    }
    same_social_universe(&train.network, &test.network)?;
    let tr = &train.network;
    let te = &test.network;
    let n = tr.n_social();

    // Positives: test edges absent from train.
    let mut positives: Vec<(u32, u32)> = te
        .social_edges()
        .filter(|&(u, v, _)| !tr.has_social_edge(u, v))
        .map(|(u, v, _)| (u as u32, v as u32))
        .collect();

    let mut negatives: Vec<(u32, u32)> = Vec::new();
    match params.scope {
        Scope::Hop2Cat1 => {
            let universe = hop2_pairs(tr);
            let hop2: HashSet<u64> = universe
                .iter()
                .map(|&(u, v)| ((u as u64) << 32) | v as u64)
                .collect();
            positives.retain(|&(u, v)| hop2.contains(&(((u as u64) << 32) | v as u64)));
            negatives.extend(
                universe
                    .iter()
                    .filter(|&&(u, v)| !te.has_social_edge(u as usize, v as usize))
                    .copied(),
            );
        }
        Scope::AnyHop | Scope::Category1 | Scope::Category1And2 => {
            if params.scope == Scope::Category1 {
                positives.retain(|&(u, v)| {
                    !tr.social_neighbors(u as usize).is_empty()
                        && !tr.social_neighbors(v as usize).is_empty()
                });
            }
            match params.negatives {
                NegativeMode::Exhaustive => {
                    for u in 0..n as u32 {
                        for v in (u + 1)..n as u32 {
                            if !tr.has_social_edge(u as usize, v as usize)
                                && !te.has_social_edge(u as usize, v as usize)
                            {
                                negatives.push((u, v));
                            }
                        }
                    }
                }
                NegativeMode::Capped { .. } => {} // sampled below
            }
        }
    }

    if let NegativeMode::Capped { ratio } = params.negatives {
        if !(ratio > 0.0) {
            return Err(Error::precondition("negative cap ratio must be > 0"));
        }
        let target = ((positives.len() as f64) * ratio).ceil() as usize;
        match params.scope {
            Scope::Hop2Cat1 => {
                // The universe is already materialized: sample from it.
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                if negatives.len() > target {
                    let picked =
                        rand::seq::index::sample(&mut rng, negatives.len(), target);
                    let mut keep: Vec<usize> = picked.into_iter().collect();
                    keep.sort_unstable();
                    negatives = keep.into_iter().map(|i| negatives[i]).collect();
                }
            }
            _ => {
                // Rejection-sample the huge any-hop universe.
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                let mut chosen: HashSet<u64> = HashSet::with_capacity(target);
                let mut attempts = 0usize;
                let attempt_budget = target.saturating_mul(100) + 1000;
                while chosen.len() < target && attempts < attempt_budget {
                    attempts += 1;
                    let u = rng.random_range(0..n as u32);
                    let v = rng.random_range(0..n as u32);
                    if u == v {
                        continue;
                    }
                    let (u, v) = (u.min(v), u.max(v));
                    if tr.has_social_edge(u as usize, v as usize)
                        || te.has_social_edge(u as usize, v as usize)
                    {
                        continue;
                    }
                    if chosen.insert(((u as u64) << 32) | v as u64) {
                        negatives.push((u, v));
                    }
                }
                if chosen.len() < target {
                    log::warn!(
                        "negative sampling starved: wanted {target}, found {} in {attempts} attempts",
                        chosen.len()
                    );
                }
                negatives.sort_unstable();
            }
        }
    }

    let mut pairs: Vec<(NodeRef, NodeRef, Label)> = Vec::with_capacity(
        positives.len() + negatives.len(),
    );
    pairs.extend(positives.iter().map(|&(u, v)| {
        (
            NodeRef::social(u as usize),
            NodeRef::social(v as usize),
            Label::Pos,
        )
    }));
    pairs.extend(negatives.iter().map(|&(u, v)| {
        (
            NodeRef::social(u as usize),
            NodeRef::social(v as usize),
            Label::Neg,
        )
    }));
    pairs.sort_unstable();
    Ok(CandidateSet {
        task: Task::SocialLink,
        scope: params.scope,
        pairs,
    })
}

/// Attribute links taken away from sampled users, as labeled examples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RemovedAttributes {
    /// Removed positive links: the inference targets.
    pub positives: Vec<(NodeRef, NodeRef)>,
    /// Removed negative links: the negative examples for evaluation.
    pub negatives: Vec<(NodeRef, NodeRef)>,
}

/// Strip all attribute links (both signs) of the given users, returning the
/// stripped network plus the removed links.
///
/// The removed positive links are the inference targets; the removed
/// negative links are kept aside as labeled negative examples. Social
/// links, mutex pairs and every other user's links are untouched.
pub fn remove_user_attributes(
    net: &SocialAttributeNetwork,
    users: &BTreeSet<usize>,
) -> Result<(SocialAttributeNetwork, RemovedAttributes)> {
    if let Some(&max) = users.iter().next_back() {
        if max >= net.n_social() {
            return Err(Error::UnknownNode(NodeRef::social(max)));
        }
    }
    let n = net.n_social();
    let mut removed = RemovedAttributes::default();
    let mut pos_attr: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    let mut neg_attr: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    for u in 0..n {
        if users.contains(&u) {
            removed.positives.extend(
                net.positive_attributes(u)
                    .iter()
                    .map(|&(a, _)| (NodeRef::social(u), NodeRef::attribute(a as usize))),
            );
            removed.negatives.extend(
                net.negative_attributes(u)
                    .iter()
                    .map(|&(a, _)| (NodeRef::social(u), NodeRef::attribute(a as usize))),
            );
            pos_attr.push(Vec::new());
            neg_attr.push(Vec::new());
        } else {
            pos_attr.push(net.positive_attributes(u).to_vec());
            neg_attr.push(net.negative_attributes(u).to_vec());
        }
    }
    let social_adj = (0..n).map(|u| net.social_neighbors(u).to_vec()).collect();
    let names = net
        .names()
        .map(|nm| (nm.social.clone(), nm.attribute.clone()));
    let stripped = SocialAttributeNetwork::from_raw_parts_unchecked(
        social_adj,
        pos_attr,
        neg_attr,
        net.n_attributes(),
        net.mutex_pairs().to_vec(),
        net.social_node_weights().to_vec(),
        net.attribute_node_weights().to_vec(),
        names,
    );
    Ok((stripped, removed))
}

/// Seeded uniform sample of `round(fraction × N)` distinct social nodes.
pub fn sample_users(n_social: usize, fraction: f64, seed: u64) -> Result<BTreeSet<usize>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::precondition(format!(
            "sample fraction {fraction} outside [0, 1]"
        )));
    }
    let count = ((n_social as f64) * fraction).round() as usize;
    let count = count.min(n_social);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, n_social, count)
        .into_iter()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NetworkBuilder, Sign};
    use rand::{Rng, SeedableRng};

    fn snapshot(label: &str, ordinal: i64, n: usize, edges: &[(usize, usize)]) -> Snapshot {
        let mut b = NetworkBuilder::with_sizes(n, 0);
        for &(u, v) in edges {
            b.social_edge(NodeRef::social(u), NodeRef::social(v)).unwrap();
        }
        Snapshot::new(b.build().unwrap(), label, ordinal)
    }

    fn params(scope: Scope) -> LabelParams {
        LabelParams {
            scope,
            negatives: NegativeMode::Exhaustive,
            seed: 0,
        }
    }

    #[test]
    fn star_graph_hop2_labels() {
        // Star: s=0 with leaves 1,2,3; test adds the leaf pair (1,2).
        let train = snapshot("T1", 1, 4, &[(0, 1), (0, 2), (0, 3)]);
        let test = snapshot("T2", 2, 4, &[(0, 1), (0, 2), (0, 3), (1, 2)]);
        let set = extract_labels(&train, &test, Task::SocialLink, &params(Scope::Hop2Cat1)).unwrap();
        let expect = vec![
            (NodeRef::social(1), NodeRef::social(2), Label::Pos),
            (NodeRef::social(1), NodeRef::social(3), Label::Neg),
            (NodeRef::social(2), NodeRef::social(3), Label::Neg),
        ];
        assert_eq!(set.pairs, expect);
    }

    #[test]
    fn distance_three_pairs_are_outside_hop2_scope() {
        // Path 0-1-2-3: (0,3) is at distance 3; adding it in test must not
        // produce a hop-2 positive.
        let train = snapshot("T1", 1, 4, &[(0, 1), (1, 2), (2, 3)]);
        let test = snapshot("T2", 2, 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let set = extract_labels(&train, &test, Task::SocialLink, &params(Scope::Hop2Cat1)).unwrap();
        assert_eq!(set.n_pos(), 0);
        assert_eq!(set.n_neg(), 2); // (0,2) and (1,3)
    }

    #[test]
    fn identical_snapshots_has_no_positives() {
        let train = snapshot("T", 1, 5, &[(0, 1), (1, 2), (3, 4)]);
        let set =
            extract_labels(&train, &train, Task::SocialLink, &params(Scope::Category1And2)).unwrap();
        assert_eq!(set.n_pos(), 0);
        assert!(set.n_neg() > 0);
    }

    #[test]
    fn anyhop_positive_count_is_edge_set_difference() {
        let train = snapshot("T1", 1, 6, &[(0, 1), (1, 2), (2, 3)]);
        let test = snapshot("T2", 2, 6, &[(0, 1), (1, 2), (0, 5), (4, 5)]);
        let set =
            extract_labels(&train, &test, Task::SocialLink, &params(Scope::Category1And2)).unwrap();
        assert_eq!(set.n_pos(), 2); // (0,5) and (4,5); (2,3) disappeared, not new
        // 15 unordered pairs − |train ∪ test links| (5) − positives already
        // excluded: negatives are pairs in neither, so 15 − 5 = 10 minus... the
        // two positives are in test, leaving 15 − 3(train) − 2(test-only) = 10.
        assert_eq!(set.n_neg(), 10);
    }

    #[test]
    fn category1_keeps_only_anchored_positives() {
        // Node 4 and 5 are isolated in train; (4,5) in test is a category-2
        // link, (0,4) likewise (one endpoint anchored is not enough? no:
        // category 1 needs BOTH endpoints with ≥1 train social link).
        let train = snapshot("T1", 1, 6, &[(0, 1), (1, 2)]);
        let test = snapshot("T2", 2, 6, &[(0, 1), (1, 2), (4, 5), (0, 4), (0, 2)]);
        let cat1 =
            extract_labels(&train, &test, Task::SocialLink, &params(Scope::Category1)).unwrap();
        assert_eq!(cat1.n_pos(), 1); // only (0,2)
        let both =
            extract_labels(&train, &test, Task::SocialLink, &params(Scope::Category1And2)).unwrap();
        assert_eq!(both.n_pos(), 3);
    }

    #[test]
    fn candidates_never_include_train_links_and_never_duplicate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..5 {
            let n = 20;
            let mut tr_edges = BTreeSet::new();
            let mut te_edges = BTreeSet::new();
            for _ in 0..40 {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                if u != v {
                    if rng.random_bool(0.5) {
                        tr_edges.insert((u.min(v), u.max(v)));
                    }
                    if rng.random_bool(0.5) {
                        te_edges.insert((u.min(v), u.max(v)));
                    }
                }
            }
            let train = snapshot("T1", 1, n, &tr_edges.iter().copied().collect::<Vec<_>>());
            let test = snapshot("T2", 2, n, &te_edges.iter().copied().collect::<Vec<_>>());
            for scope in [Scope::Hop2Cat1, Scope::AnyHop, Scope::Category1] {
                let set = extract_labels(&train, &test, Task::SocialLink, &params(scope)).unwrap();
                let mut seen = BTreeSet::new();
                for &(u, v, label) in &set.pairs {
                    assert!(seen.insert((u, v)), "duplicate pair (trial {trial})");
                    assert!(
                        !train.network.has_social_edge(u.index(), v.index()),
                        "train link leaked into candidates"
                    );
                    let in_test = test.network.has_social_edge(u.index(), v.index());
                    assert_eq!(label == Label::Pos, in_test, "label disagrees with test");
                    if scope == Scope::Hop2Cat1 {
                        let nu: BTreeSet<u32> = train.network.social_neighbors(u.index())
                            .iter().map(|&(x, _)| x).collect();
                        let nv: BTreeSet<u32> = train.network.social_neighbors(v.index())
                            .iter().map(|&(x, _)| x).collect();
                        assert!(
                            nu.intersection(&nv).next().is_some(),
                            "hop-2 candidate lacks a common neighbor"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn capped_negatives_are_seeded_and_bounded() {
        let train = snapshot("T1", 1, 40, &[(0, 1), (1, 2), (2, 3)]);
        let test = snapshot("T2", 2, 40, &[(0, 1), (1, 2), (2, 3), (0, 2), (1, 3)]);
        let capped = LabelParams {
            scope: Scope::Category1And2,
            negatives: NegativeMode::Capped { ratio: 10.0 },
            seed: 11,
        };
        let a = extract_labels(&train, &test, Task::SocialLink, &capped).unwrap();
        assert_eq!(a.n_pos(), 2);
        assert_eq!(a.n_neg(), 20);
        let b = extract_labels(&train, &test, Task::SocialLink, &capped).unwrap();
        assert_eq!(a, b, "same seed, same sample");
        let other_seed = LabelParams { seed: 12, ..capped };
        let c = extract_labels(&train, &test, Task::SocialLink, &other_seed).unwrap();
        assert_ne!(a, c, "different seed should move the sample");
    }

    #[test]
    fn attribute_task_and_universe_mismatch_are_rejected() {
        let train = snapshot("T1", 1, 4, &[(0, 1)]);
        let test = snapshot("T2", 2, 5, &[(0, 1)]);
        assert!(
            extract_labels(&train, &train, Task::AttributeLink, &params(Scope::AnyHop)).is_err()
        );
        assert!(extract_labels(&train, &test, Task::SocialLink, &params(Scope::AnyHop)).is_err());
    }

    fn attributed_network() -> SocialAttributeNetwork {
        let mut b = NetworkBuilder::with_sizes(3, 12);
        b.social_edge(NodeRef::social(0), NodeRef::social(1)).unwrap();
        // User 0: 4 positive, 6 negative links; user 1: 1 of each.
        for a in 0..4 {
            b.attribute_link(NodeRef::social(0), NodeRef::attribute(a), Sign::Positive)
                .unwrap();
        }
        for a in 4..10 {
            b.attribute_link(NodeRef::social(0), NodeRef::attribute(a), Sign::Negative)
                .unwrap();
        }
        b.attribute_link(NodeRef::social(1), NodeRef::attribute(10), Sign::Positive)
            .unwrap();
        b.attribute_link(NodeRef::social(1), NodeRef::attribute(11), Sign::Negative)
            .unwrap();
        b.build().unwrap()
    }

    #[test]
    fn removal_returns_targets_and_negatives() {
        let net = attributed_network();
        let users: BTreeSet<usize> = [0].into_iter().collect();
        let (stripped, removed) = remove_user_attributes(&net, &users).unwrap();
        assert_eq!(removed.positives.len(), 4);
        assert_eq!(removed.negatives.len(), 6);
        assert_eq!(stripped.positive_attributes(0), &[]);
        assert_eq!(stripped.negative_attributes(0), &[]);
        // Untouched user keeps everything; social structure intact.
        assert_eq!(stripped.positive_attributes(1).len(), 1);
        assert!(stripped.has_social_edge(0, 1));
        assert!(stripped.validate().is_empty());
    }

    #[test]
    fn removing_nobody_is_identity() {
        let net = attributed_network();
        let (same, removed) = remove_user_attributes(&net, &BTreeSet::new()).unwrap();
        assert_eq!(same, net);
        assert_eq!(removed, RemovedAttributes::default());
    }

    #[test]
    fn removal_rejects_unknown_users() {
        let net = attributed_network();
        let users: BTreeSet<usize> = [17].into_iter().collect();
        assert!(remove_user_attributes(&net, &users).is_err());
    }

    #[test]
    fn sampling_rounds_and_reproduces() {
        let sample = sample_users(5200, 0.1, 9).unwrap();
        assert_eq!(sample.len(), 520);
        assert!(sample.iter().all(|&u| u < 5200));
        assert_eq!(sample, sample_users(5200, 0.1, 9).unwrap());
        assert_ne!(sample, sample_users(5200, 0.1, 10).unwrap());
        assert!(sample_users(10, 1.5, 0).is_err());
        assert!(sample_users(10, 0.0, 0).unwrap().is_empty());
    }
}
