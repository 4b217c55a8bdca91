//! Unsupervised link and attribute scorers.
//!
//! Local scorers weight the common positive neighborhood of a candidate
//! pair ([`cn_san`], [`aa_san`]); global scorers factorize the network's
//! positive adjacency ([`fit_lra`]) or diffuse probability mass through it
//! ([`rwwr`]); hybrid scorers factorize the local score matrices
//! ([`cn_plus_lra`], [`aa_plus_lra`]). [`score_candidates`] runs any of
//! them over a whole candidate set, amortizing factorizations across the
//! batch and random walks across distinct sources.
//!
//! On a network without attributes — in particular on
//! [`project_social`](crate::graph::SocialAttributeNetwork::project_social)
//! output — every scorer here coincides with its classic social-only form,
//! so the same code paths serve both the attribute-aware and the
//! social-only configurations of an experiment.

mod lra;
mod rwwr;

pub use lra::{aa_plus_lra, cn_plus_lra, fit_lra, lra_score, LowRankModel, Provenance};
pub use rwwr::{rwwr, rwwr_on, rwwr_score, RwwrParams, WalkGraph};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeRef, SocialAttributeNetwork};
use crate::labels::{CandidateSet, Task};
use crate::linalg::{CsrMatrix, SvdParams};

/// Scorer selection plus hyperparameters, as used by [`score_candidates`]
/// and serialized into experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scorer", rename_all = "snake_case")]
pub enum ScorerSpec {
    /// Uniform noise in [0, 1), keyed per pair: a floor for sanity checks.
    Random { seed: u64 },
    /// Sum of node weights over the pair's common positive neighbors.
    CommonNeighbors,
    /// Common neighbors discounted by the log of their degree.
    AdamicAdar,
    /// Entry of the rank-r reconstruction of the positive adjacency.
    LowRank { rank: usize, seed: u64 },
    /// Rank-r reconstruction of the common-neighbor score matrix.
    CnLowRank { rank: usize, seed: u64 },
    /// Rank-r reconstruction of the degree-discounted score matrix.
    AaLowRank { rank: usize, seed: u64 },
    /// Stationary probability of a restarting random walk.
    RandomWalkRestart { params: RwwrParams },
    /// Marginal attribute frequency, identical for every user.
    AttributeFrequency,
}

impl std::fmt::Display for ScorerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScorerSpec::Random { seed } => write!(f, "random seed={seed}"),
            ScorerSpec::CommonNeighbors => write!(f, "common_neighbors"),
            ScorerSpec::AdamicAdar => write!(f, "adamic_adar"),
            ScorerSpec::LowRank { rank, seed } => write!(f, "low_rank rank={rank} seed={seed}"),
            ScorerSpec::CnLowRank { rank, seed } => {
                write!(f, "cn_low_rank rank={rank} seed={seed}")
            }
            ScorerSpec::AaLowRank { rank, seed } => {
                write!(f, "aa_low_rank rank={rank} seed={seed}")
            }
            ScorerSpec::RandomWalkRestart { params } => write!(
                f,
                "random_walk_restart alpha={} tol={:e} max_iters={}",
                params.alpha, params.tol, params.max_iters
            ),
            ScorerSpec::AttributeFrequency => write!(f, "attribute_frequency"),
        }
    }
}

/// Counters for conditions a scorer tolerated rather than failed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Common-neighbor terms dropped because the neighbor's discount degree
    /// was below 2 (log ≤ 0). Impossible in a validated network; nonzero
    /// values indicate corrupt data.
    pub skipped_degenerate_terms: u64,
}

/// One score per candidate pair, in candidate order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub task: Task,
    /// Scorer id and hyperparameters, echoed into the CSV header.
    pub scorer: String,
    pub entries: Vec<(NodeRef, NodeRef, f64)>,
    pub diagnostics: Diagnostics,
}

impl ScoreTable {
    /// Render as CSV: a comment line naming the scorer, a header, then one
    /// `u,v,score` row per candidate. Byte-deterministic.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# scorer={}\n", self.scorer));
        out.push_str("u,v,score\n");
        for &(u, v, s) in &self.entries {
            out.push_str(&format!("{u},{v},{s}\n"));
        }
        out
    }
}

fn check_social(net: &SocialAttributeNetwork, node: NodeRef) -> Result<usize> {
    if node.is_social() && node.index() < net.n_social() {
        Ok(node.index())
    } else {
        Err(Error::UnknownNode(node))
    }
}

fn check_attribute(net: &SocialAttributeNetwork, node: NodeRef) -> Result<usize> {
    if node.is_attribute() && node.index() < net.n_attributes() {
        Ok(node.index())
    } else {
        Err(Error::UnknownNode(node))
    }
}

/// Resolve a candidate pair to (social index, social index) or
/// (social index, attribute index), rejecting anything else.
fn resolve_pair(
    net: &SocialAttributeNetwork,
    u: NodeRef,
    v: NodeRef,
) -> Result<(usize, usize, Task)> {
    if v.is_social() {
        Ok((check_social(net, u)?, check_social(net, v)?, Task::SocialLink))
    } else {
        Ok((
            check_social(net, u)?,
            check_attribute(net, v)?,
            Task::AttributeLink,
        ))
    }
}

/// Call `f(id)` for every id present in both sorted weighted lists.
fn for_common(a: &[(u32, f64)], b: &[(u32, f64)], mut f: impl FnMut(u32)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i].0);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Common-neighbor score: the sum of node weights over the pair's common
/// positive neighbors.
///
/// For a social pair the common neighborhood mixes social nodes (via
/// social links) and attribute nodes (via positive links); for a
/// (social, attribute) pair it consists of the users who are social
/// neighbors of one endpoint and positively linked to the other.
pub fn cn_san(net: &SocialAttributeNetwork, u: NodeRef, v: NodeRef) -> Result<f64> {
    let (u, v, task) = resolve_pair(net, u, v)?;
    let mut score = 0.0;
    match task {
        Task::SocialLink => {
            let sw = net.social_node_weights();
            let aw = net.attribute_node_weights();
            for_common(net.social_neighbors(u), net.social_neighbors(v), |t| {
                score += sw[t as usize];
            });
            for_common(net.positive_attributes(u), net.positive_attributes(v), |t| {
                score += aw[t as usize];
            });
        }
        Task::AttributeLink => {
            let sw = net.social_node_weights();
            for_common(net.social_neighbors(u), net.attribute_positive_users(v), |t| {
                score += sw[t as usize];
            });
        }
    }
    Ok(score)
}

/// Number of distinct attributes both users are positively linked to.
pub fn common_positive_attributes(
    net: &SocialAttributeNetwork,
    u: NodeRef,
    v: NodeRef,
) -> Result<usize> {
    let u = check_social(net, u)?;
    let v = check_social(net, v)?;
    let mut count = 0;
    for_common(net.positive_attributes(u), net.positive_attributes(v), |_| count += 1);
    Ok(count)
}

/// Social degree of a node: neighbors reached over social links for a
/// user, positively linked users for an attribute.
fn social_degree(net: &SocialAttributeNetwork, t: u32, attribute: bool) -> usize {
    if attribute {
        net.attribute_positive_users(t as usize).len()
    } else {
        net.social_neighbors(t as usize).len()
    }
}

fn aa_term(weight: f64, degree: usize, skipped: &mut u64) -> f64 {
    if degree < 2 {
        *skipped += 1;
        0.0
    } else {
        weight / (degree as f64).ln()
    }
}

/// Degree-discounted common-neighbor score.
///
/// Each common positive neighbor contributes its node weight divided by
/// the natural log of its degree. For a social pair the discount uses the
/// neighbor's social degree (hubs and widespread attributes count less);
/// for a (social, attribute) pair it uses the neighbor's total positive
/// degree, so users with sprawling attribute sets count less. Neighbors
/// with discount degree below 2 cannot occur in a validated network; such
/// terms are skipped and counted in the returned diagnostics.
pub fn aa_san(net: &SocialAttributeNetwork, u: NodeRef, v: NodeRef) -> Result<f64> {
    let mut skipped = 0;
    aa_san_with_diag(net, u, v, &mut skipped)
}

fn aa_san_with_diag(
    net: &SocialAttributeNetwork,
    u: NodeRef,
    v: NodeRef,
    skipped: &mut u64,
) -> Result<f64> {
    let (u, v, task) = resolve_pair(net, u, v)?;
    let mut score = 0.0;
    match task {
        Task::SocialLink => {
            let sw = net.social_node_weights();
            let aw = net.attribute_node_weights();
            for_common(net.social_neighbors(u), net.social_neighbors(v), |t| {
                score += aa_term(sw[t as usize], social_degree(net, t, false), skipped);
            });
            for_common(net.positive_attributes(u), net.positive_attributes(v), |t| {
                score += aa_term(aw[t as usize], social_degree(net, t, true), skipped);
            });
        }
        Task::AttributeLink => {
            let sw = net.social_node_weights();
            for_common(net.social_neighbors(u), net.attribute_positive_users(v), |t| {
                let total = net.social_neighbors(t as usize).len()
                    + net.positive_attributes(t as usize).len();
                score += aa_term(sw[t as usize], total, skipped);
            });
        }
    }
    Ok(score)
}

/// Marginal frequency of an attribute: its positive-link count over the
/// total number of positive links, or 0 when the network has none. The
/// score ignores the user entirely.
pub fn baseline_attribute(net: &SocialAttributeNetwork, attribute: NodeRef) -> Result<f64> {
    let a = check_attribute(net, attribute)?;
    let total = net.positive_link_count();
    if total == 0 {
        return Ok(0.0);
    }
    Ok(net.attribute_positive_users(a).len() as f64 / total as f64)
}

/// Positive adjacency of the whole network: an N×(N+M) matrix whose first
/// N columns hold the weighted social links and whose last M columns hold
/// the weighted positive attribute links. Negative links and mutex pairs
/// do not appear.
pub fn build_san_adjacency(net: &SocialAttributeNetwork) -> CsrMatrix {
    let n = net.n_social();
    let rows = (0..n)
        .map(|u| {
            let mut row: Vec<(u32, f64)> =
                net.social_neighbors(u).iter().map(|&(v, w)| (v, w)).collect();
            row.extend(
                net.positive_attributes(u)
                    .iter()
                    .map(|&(a, w)| (n as u32 + a, w)),
            );
            row
        })
        .collect();
    CsrMatrix::from_rows(n + net.n_attributes(), rows)
}

/// Materialize every pairwise common-neighbor score for a task as a sparse
/// matrix: N×N over social pairs (diagonal zero — self-pairs are not
/// candidates) or N×M over (user, attribute) pairs. Scores are nonzero
/// only for pairs at distance two, which keeps the matrix sparse.
pub fn build_cn_matrix(net: &SocialAttributeNetwork, task: Task) -> CsrMatrix {
    build_score_matrix(net, task, false).0
}

/// As [`build_cn_matrix`] but with the degree-discounted scores; also
/// returns the count of skipped degenerate terms (0 for valid networks).
pub fn build_aa_matrix(net: &SocialAttributeNetwork, task: Task) -> (CsrMatrix, u64) {
    build_score_matrix(net, task, true)
}

fn build_score_matrix(
    net: &SocialAttributeNetwork,
    task: Task,
    discounted: bool,
) -> (CsrMatrix, u64) {
    let n = net.n_social();
    let m = net.n_attributes();
    let mut skipped = 0u64;
    match task {
        Task::SocialLink => {
            // Scatter: each node t adds its (possibly discounted) weight to
            // every unordered pair of its positive neighbors.
            let mut rows: Vec<std::collections::BTreeMap<u32, f64>> = vec![Default::default(); n];
            let mut scatter = |ids: &mut dyn Iterator<Item = u32>, w: f64, deg: usize| {
                let ids: Vec<u32> = ids.collect();
                if ids.len() < 2 {
                    return; // cannot be a common neighbor of any pair
                }
                let contribution = if discounted {
                    aa_term(w, deg, &mut skipped)
                } else {
                    w
                };
                if contribution == 0.0 {
                    return;
                }
                for (i, &a) in ids.iter().enumerate() {
                    for &b in &ids[i + 1..] {
                        *rows[a as usize].entry(b).or_insert(0.0) += contribution;
                        *rows[b as usize].entry(a).or_insert(0.0) += contribution;
                    }
                }
            };
            for t in 0..n {
                let nbrs = net.social_neighbors(t);
                scatter(
                    &mut nbrs.iter().map(|&(v, _)| v),
                    net.social_node_weights()[t],
                    nbrs.len(),
                );
            }
            for t in 0..m {
                let users = net.attribute_positive_users(t);
                scatter(
                    &mut users.iter().map(|&(v, _)| v),
                    net.attribute_node_weights()[t],
                    users.len(),
                );
            }
            let rows = rows.into_iter().map(|r| r.into_iter().collect()).collect();
            (CsrMatrix::from_rows(n, rows), skipped)
        }
        Task::AttributeLink => {
            // Each user t joins its social neighbors to its positive
            // attributes.
            let mut rows: Vec<std::collections::BTreeMap<u32, f64>> = vec![Default::default(); n];
            for t in 0..n {
                let nbrs = net.social_neighbors(t);
                let attrs = net.positive_attributes(t);
                if nbrs.is_empty() || attrs.is_empty() {
                    continue;
                }
                let w = net.social_node_weights()[t];
                let contribution = if discounted {
                    aa_term(w, nbrs.len() + attrs.len(), &mut skipped)
                } else {
                    w
                };
                if contribution == 0.0 {
                    continue;
                }
                for &(u, _) in nbrs {
                    for &(a, _) in attrs {
                        *rows[u as usize].entry(a).or_insert(0.0) += contribution;
                    }
                }
            }
            let rows = rows.into_iter().map(|r| r.into_iter().collect()).collect();
            (CsrMatrix::from_rows(m, rows), skipped)
        }
    }
}

/// Mix a pair identity into a seed so the random scorer gives each pair a
/// value independent of batch composition and order.
fn pair_seed(seed: u64, u: NodeRef, v: NodeRef) -> u64 {
    fn mix(mut x: u64) -> u64 {
        // splitmix64 finalizer: full avalanche in three rounds.
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
        x ^ (x >> 31)
    }
    fn pack(n: NodeRef) -> u64 {
        ((n.is_attribute() as u64) << 32) | n.index() as u64
    }
    mix(mix(seed ^ pack(u)).wrapping_add(pack(v)))
}

fn random_score(seed: u64, u: NodeRef, v: NodeRef) -> f64 {
    ChaCha8Rng::seed_from_u64(pair_seed(seed, u, v)).random::<f64>()
}

/// Score every candidate with one scorer, in candidate order.
///
/// Global scorers do their expensive work once per batch: one
/// factorization for the low-rank family, one walk per distinct source
/// for the restarting random walk. The result is deterministic given
/// (network, candidates, spec) regardless of thread count.
pub fn score_candidates(
    net: &SocialAttributeNetwork,
    candidates: &CandidateSet,
    spec: &ScorerSpec,
) -> Result<ScoreTable> {
    // Validate pair shapes once so scorers can assume them.
    for &(u, v, _) in &candidates.pairs {
        let (_, _, task) = resolve_pair(net, u, v)?;
        if task != candidates.task {
            return Err(Error::precondition(format!(
                "candidate ({u}, {v}) does not match task {:?}",
                candidates.task
            )));
        }
    }
    let pairs: Vec<(NodeRef, NodeRef)> =
        candidates.pairs.iter().map(|&(u, v, _)| (u, v)).collect();
    let mut diagnostics = Diagnostics::default();

    let scores: Vec<f64> = match *spec {
        ScorerSpec::Random { seed } => {
            pairs.iter().map(|&(u, v)| random_score(seed, u, v)).collect()
        }
        ScorerSpec::CommonNeighbors => pairs
            .par_iter()
            .map(|&(u, v)| cn_san(net, u, v))
            .collect::<Result<_>>()?,
        ScorerSpec::AdamicAdar => {
            let with_diag: Vec<(f64, u64)> = pairs
                .par_iter()
                .map(|&(u, v)| {
                    let mut skipped = 0;
                    aa_san_with_diag(net, u, v, &mut skipped).map(|s| (s, skipped))
                })
                .collect::<Result<_>>()?;
            diagnostics.skipped_degenerate_terms =
                with_diag.iter().map(|&(_, k)| k).sum();
            with_diag.into_iter().map(|(s, _)| s).collect()
        }
        ScorerSpec::LowRank { rank, seed } => {
            let model = fit_lra(net, rank, seed, &SvdParams::default())?;
            pairs
                .iter()
                .map(|&(u, v)| lra_score(&model, u, v))
                .collect::<Result<_>>()?
        }
        ScorerSpec::CnLowRank { rank, seed } => {
            let matrix = build_cn_matrix(net, candidates.task);
            let model = LowRankModel::fit_matrix(
                &matrix,
                rank,
                score_provenance(candidates.task),
                net.n_social(),
                seed,
                &SvdParams::default(),
            )?;
            pairs
                .iter()
                .map(|&(u, v)| lra_score(&model, u, v))
                .collect::<Result<_>>()?
        }
        ScorerSpec::AaLowRank { rank, seed } => {
            let (matrix, skipped) = build_aa_matrix(net, candidates.task);
            diagnostics.skipped_degenerate_terms = skipped;
            let model = LowRankModel::fit_matrix(
                &matrix,
                rank,
                score_provenance(candidates.task),
                net.n_social(),
                seed,
                &SvdParams::default(),
            )?;
            pairs
                .iter()
                .map(|&(u, v)| lra_score(&model, u, v))
                .collect::<Result<_>>()?
        }
        ScorerSpec::RandomWalkRestart { params } => {
            let walk = WalkGraph::build(net);
            let mut sources: Vec<usize> = Vec::new();
            for &(u, v) in &pairs {
                sources.push(u.index());
                if candidates.task == Task::SocialLink {
                    sources.push(v.index());
                }
            }
            sources.sort_unstable();
            sources.dedup();
            let walks: Vec<Vec<f64>> = sources
                .par_iter()
                .map(|&s| rwwr_on(&walk, s, &params))
                .collect::<Result<_>>()?;
            let dist =
                |s: usize| &walks[sources.binary_search(&s).expect("walked every source")];
            let n = net.n_social();
            pairs
                .iter()
                .map(|&(u, v)| match candidates.task {
                    Task::SocialLink => {
                        (dist(u.index())[v.index()] + dist(v.index())[u.index()]) / 2.0
                    }
                    Task::AttributeLink => dist(u.index())[n + v.index()],
                })
                .collect()
        }
        ScorerSpec::AttributeFrequency => {
            if candidates.task != Task::AttributeLink {
                return Err(Error::precondition(
                    "the attribute-frequency scorer only applies to attribute candidates",
                ));
            }
            pairs
                .iter()
                .map(|&(_, a)| baseline_attribute(net, a))
                .collect::<Result<_>>()?
        }
    };

    Ok(ScoreTable {
        task: candidates.task,
        scorer: spec.to_string(),
        entries: pairs
            .iter()
            .zip(scores)
            .map(|(&(u, v), s)| (u, v, s))
            .collect(),
        diagnostics,
    })
}

fn score_provenance(task: Task) -> Provenance {
    match task {
        Task::SocialLink => Provenance::SocialScores,
        Task::AttributeLink => Provenance::AttributeScores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NetworkBuilder, Restrict, Sign};
    use crate::labels::Label;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    /// Two users sharing one social neighbor and one positive attribute,
    /// plus assorted clutter that must not affect their score.
    fn shared_neighborhood() -> SocialAttributeNetwork {
        let mut b = NetworkBuilder::with_sizes(5, 3);
        let s = NodeRef::social;
        let a = NodeRef::attribute;
        b.social_edge(s(0), s(2)).unwrap(); // 2 is the common social neighbor
        b.social_edge(s(1), s(2)).unwrap();
        b.social_edge(s(0), s(3)).unwrap(); // one-sided neighbors
        b.social_edge(s(1), s(4)).unwrap();
        b.attribute_link(s(0), a(0), Sign::Positive).unwrap(); // common attribute
        b.attribute_link(s(1), a(0), Sign::Positive).unwrap();
        b.attribute_link(s(0), a(1), Sign::Positive).unwrap();
        b.attribute_link(s(1), a(2), Sign::Negative).unwrap();
        b.attribute_link(s(0), a(2), Sign::Negative).unwrap(); // negative: never common
        b.build().unwrap()
    }

    #[test]
    fn common_neighbor_score_counts_social_and_attribute_neighbors() {
        let net = shared_neighborhood();
        let score = cn_san(&net, NodeRef::social(0), NodeRef::social(1)).unwrap();
        assert_eq!(score, 2.0); // neighbor s2 + attribute a0, unit weights
        assert_eq!(
            cn_san(&net, NodeRef::social(3), NodeRef::social(4)).unwrap(),
            0.0
        );
    }

    #[test]
    fn scores_are_symmetric_for_social_pairs() {
        let net = shared_neighborhood();
        let (u, v) = (NodeRef::social(0), NodeRef::social(1));
        assert_eq!(cn_san(&net, u, v).unwrap(), cn_san(&net, v, u).unwrap());
        assert_eq!(aa_san(&net, u, v).unwrap(), aa_san(&net, v, u).unwrap());
    }

    #[test]
    fn node_weights_scale_contributions() {
        let mut b = NetworkBuilder::with_sizes(3, 0);
        let s = NodeRef::social;
        b.social_edge(s(0), s(2)).unwrap();
        b.social_edge(s(1), s(2)).unwrap();
        b.node_weight(s(2), 2.5).unwrap();
        let net = b.build().unwrap();
        assert_eq!(cn_san(&net, s(0), s(1)).unwrap(), 2.5);
    }

    #[test]
    fn degree_discount_uses_social_degree_for_social_pairs() {
        let net = shared_neighborhood();
        // s2 has social degree 2; a0 has 2 positive users.
        let expect = 1.0 / 2.0_f64.ln() + 1.0 / 2.0_f64.ln();
        assert_relative_eq!(
            aa_san(&net, NodeRef::social(0), NodeRef::social(1)).unwrap(),
            expect,
            max_relative = 1e-12
        );
    }

    #[test]
    fn degree_discount_uses_total_degree_for_attribute_pairs() {
        // Candidate (s0, a0) with common neighbor s1, whose total positive
        // degree is 4: two social links plus two positive attributes.
        let mut b = NetworkBuilder::with_sizes(3, 3);
        let s = NodeRef::social;
        let a = NodeRef::attribute;
        b.social_edge(s(0), s(1)).unwrap();
        b.social_edge(s(1), s(2)).unwrap();
        b.attribute_link(s(1), a(0), Sign::Positive).unwrap();
        b.attribute_link(s(1), a(1), Sign::Positive).unwrap();
        let net = b.build().unwrap();
        // t = s1: 2 social neighbors + 2 positive attributes = 4.
        assert_relative_eq!(
            aa_san(&net, s(0), a(0)).unwrap(),
            1.0 / 4.0_f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn attribute_pair_common_neighbors_need_social_link_and_positive_link() {
        let net = shared_neighborhood();
        // (s1, a1): a1's only holder s0 is not a neighbor of s1 → 0.
        assert_eq!(cn_san(&net, NodeRef::social(1), NodeRef::attribute(1)).unwrap(), 0.0);
        // (s1, a0): s1's neighbors {s2, s4} hold no a0 → 0.
        assert_eq!(cn_san(&net, NodeRef::social(1), NodeRef::attribute(0)).unwrap(), 0.0);
        // (s3, a0): s3's neighbor s0 holds a0 → 1.
        assert_eq!(cn_san(&net, NodeRef::social(3), NodeRef::attribute(0)).unwrap(), 1.0);
    }

    fn random_network(seed: u64, n: usize, m: usize) -> SocialAttributeNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = NetworkBuilder::with_sizes(n, m);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random_bool(0.2) {
                    b.social_edge(NodeRef::social(u), NodeRef::social(v)).unwrap();
                }
            }
            for a in 0..m {
                if rng.random_bool(0.15) {
                    let sign = if rng.random_bool(0.8) { Sign::Positive } else { Sign::Negative };
                    b.attribute_link(NodeRef::social(u), NodeRef::attribute(a), sign).unwrap();
                }
            }
        }
        b.build().unwrap()
    }

    /// Oracle: recompute a score from the public neighborhood API with set
    /// intersections, independent of the merge in the implementation.
    fn naive_score(
        net: &SocialAttributeNetwork,
        u: NodeRef,
        v: NodeRef,
        discounted: bool,
    ) -> f64 {
        use std::collections::BTreeSet;
        let (gu, gv, social_pair) = if v.is_social() {
            (
                net.neighbors(u, Sign::Positive, Restrict::All).unwrap(),
                net.neighbors(v, Sign::Positive, Restrict::All).unwrap(),
                true,
            )
        } else {
            (
                net.neighbors(u, Sign::Positive, Restrict::SocialOnly).unwrap(),
                net.neighbors(v, Sign::Positive, Restrict::SocialOnly).unwrap(),
                false,
            )
        };
        let gu: BTreeSet<NodeRef> = gu.into_iter().collect();
        let gv: BTreeSet<NodeRef> = gv.into_iter().collect();
        gu.intersection(&gv)
            .map(|&t| {
                let w = net.node_weight(t).unwrap();
                if !discounted {
                    return w;
                }
                let degree = if social_pair {
                    net.degree(t, Sign::Positive, Restrict::SocialOnly).unwrap()
                } else {
                    net.degree(t, Sign::Positive, Restrict::All).unwrap()
                };
                w / (degree as f64).ln()
            })
            .sum()
    }

    #[test]
    fn scores_match_set_intersection_oracle_on_random_networks() {
        for seed in 0..3 {
            let net = random_network(seed, 14, 6);
            for u in 0..14 {
                for v in (u + 1)..14 {
                    let (u, v) = (NodeRef::social(u), NodeRef::social(v));
                    assert_relative_eq!(
                        cn_san(&net, u, v).unwrap(),
                        naive_score(&net, u, v, false),
                        max_relative = 1e-12
                    );
                    assert_relative_eq!(
                        aa_san(&net, u, v).unwrap(),
                        naive_score(&net, u, v, true),
                        max_relative = 1e-12
                    );
                }
                for a in 0..6 {
                    let (u, a) = (NodeRef::social(u), NodeRef::attribute(a));
                    assert_relative_eq!(
                        cn_san(&net, u, a).unwrap(),
                        naive_score(&net, u, a, false),
                        max_relative = 1e-12
                    );
                    assert_relative_eq!(
                        aa_san(&net, u, a).unwrap(),
                        naive_score(&net, u, a, true),
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn adding_a_common_neighbor_raises_scores() {
        let mut b = NetworkBuilder::with_sizes(4, 0);
        let s = NodeRef::social;
        b.social_edge(s(0), s(2)).unwrap();
        b.social_edge(s(1), s(2)).unwrap();
        let before = b.clone();
        b.social_edge(s(0), s(3)).unwrap();
        b.social_edge(s(1), s(3)).unwrap();
        let (before, after) = (before.build().unwrap(), b.build().unwrap());
        let cn_before = cn_san(&before, s(0), s(1)).unwrap();
        let cn_after = cn_san(&after, s(0), s(1)).unwrap();
        assert_eq!(cn_after, cn_before + 1.0);
        assert!(aa_san(&after, s(0), s(1)).unwrap() >= aa_san(&before, s(0), s(1)).unwrap());
    }

    #[test]
    fn projection_reduces_to_social_only_common_neighbors() {
        let net = random_network(7, 12, 5);
        let social = net.project_social();
        for u in 0..12 {
            for v in (u + 1)..12 {
                let (u, v) = (NodeRef::social(u), NodeRef::social(v));
                // On the projected network, without attributes and with
                // unit weights, the score is just the common-neighbor count.
                let mut count = 0.0;
                for_common(net.social_neighbors(u.index()), net.social_neighbors(v.index()), |_| {
                    count += 1.0;
                });
                assert_eq!(cn_san(&social, u, v).unwrap(), count);
            }
        }
    }

    #[test]
    fn score_matrices_match_pairwise_scores() {
        let net = random_network(3, 12, 5);
        let s_social = build_cn_matrix(&net, Task::SocialLink);
        let (s_social_aa, skipped_social) = build_aa_matrix(&net, Task::SocialLink);
        assert_eq!(skipped_social, 0);
        for u in 0..12 {
            for v in 0..12 {
                let want = if u == v {
                    0.0 // self-pairs are excluded from the score matrix
                } else {
                    cn_san(&net, NodeRef::social(u), NodeRef::social(v)).unwrap()
                };
                assert_relative_eq!(s_social.get(u, v), want, max_relative = 1e-12);
                if u != v {
                    let want = aa_san(&net, NodeRef::social(u), NodeRef::social(v)).unwrap();
                    assert_relative_eq!(s_social_aa.get(u, v), want, max_relative = 1e-12);
                }
            }
        }
        let s_attr = build_cn_matrix(&net, Task::AttributeLink);
        let (s_attr_aa, _) = build_aa_matrix(&net, Task::AttributeLink);
        for u in 0..12 {
            for a in 0..5 {
                let (nu, na) = (NodeRef::social(u), NodeRef::attribute(a));
                assert_relative_eq!(
                    s_attr.get(u, a),
                    cn_san(&net, nu, na).unwrap(),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    s_attr_aa.get(u, a),
                    aa_san(&net, nu, na).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn adjacency_holds_social_then_attribute_columns() {
        let net = shared_neighborhood();
        let x = build_san_adjacency(&net);
        assert_eq!((x.nrows(), x.ncols()), (5, 8));
        assert_eq!(x.get(0, 2), 1.0); // social link (0,2)
        assert_eq!(x.get(2, 0), 1.0);
        assert_eq!(x.get(0, 5), 1.0); // positive link (0, a0)
        assert_eq!(x.get(0, 7), 0.0); // negative link (0, a2) excluded
        assert_eq!(x.nnz(), 8 + 3); // 4 social edges both ways + 3 positive links
    }

    #[test]
    fn attribute_frequency_is_a_marginal_distribution() {
        let net = random_network(5, 15, 6);
        let total = net.positive_link_count() as f64;
        let mut sum = 0.0;
        for a in 0..6 {
            let f = baseline_attribute(&net, NodeRef::attribute(a)).unwrap();
            assert_eq!(f, net.attribute_positive_users(a).len() as f64 / total);
            sum += f;
        }
        assert_relative_eq!(sum, 1.0, max_relative = 1e-12);
        // No positive links at all → a flat zero, not a division by zero.
        let empty = NetworkBuilder::with_sizes(2, 2).build().unwrap();
        assert_eq!(baseline_attribute(&empty, NodeRef::attribute(0)).unwrap(), 0.0);
    }

    fn candidate_set(task: Task, pairs: &[(NodeRef, NodeRef)]) -> CandidateSet {
        CandidateSet {
            task,
            scope: crate::labels::Scope::AnyHop,
            pairs: pairs.iter().map(|&(u, v)| (u, v, Label::Neg)).collect(),
        }
    }

    #[test]
    fn batch_scoring_equals_pointwise_calls() {
        let net = random_network(9, 14, 6);
        let mut pairs = Vec::new();
        for u in 0..14 {
            for v in (u + 1)..14 {
                if !net.has_social_edge(u, v) {
                    pairs.push((NodeRef::social(u), NodeRef::social(v)));
                }
            }
        }
        let set = candidate_set(Task::SocialLink, &pairs);
        let specs = [
            ScorerSpec::CommonNeighbors,
            ScorerSpec::AdamicAdar,
            ScorerSpec::Random { seed: 4 },
        ];
        for spec in specs {
            let table = score_candidates(&net, &set, &spec).unwrap();
            assert_eq!(table.entries.len(), pairs.len());
            for &(u, v, s) in &table.entries {
                let pointwise = match spec {
                    ScorerSpec::CommonNeighbors => cn_san(&net, u, v).unwrap(),
                    ScorerSpec::AdamicAdar => aa_san(&net, u, v).unwrap(),
                    ScorerSpec::Random { seed } => random_score(seed, u, v),
                    _ => unreachable!(),
                };
                assert_eq!(s, pointwise, "batch and pointwise disagree for ({u}, {v})");
            }
            // Bit-identical on a rerun.
            assert_eq!(table, score_candidates(&net, &set, &spec).unwrap());
        }
    }

    #[test]
    fn random_scores_ignore_batch_composition() {
        let net = random_network(2, 8, 0);
        let spec = ScorerSpec::Random { seed: 31 };
        let big = candidate_set(
            Task::SocialLink,
            &[
                (NodeRef::social(0), NodeRef::social(3)),
                (NodeRef::social(1), NodeRef::social(4)),
                (NodeRef::social(2), NodeRef::social(5)),
            ],
        );
        let small = candidate_set(Task::SocialLink, &[(NodeRef::social(1), NodeRef::social(4))]);
        let big_table = score_candidates(&net, &big, &spec).unwrap();
        let small_table = score_candidates(&net, &small, &spec).unwrap();
        assert_eq!(big_table.entries[1].2, small_table.entries[0].2);
        for &(_, _, s) in &big_table.entries {
            assert!((0.0..1.0).contains(&s));
        }
        // A different seed moves every score.
        let other = score_candidates(&net, &big, &ScorerSpec::Random { seed: 32 }).unwrap();
        assert!(big_table
            .entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a.2 != b.2));
    }

    #[test]
    fn scorer_and_task_mismatches_are_rejected() {
        let net = shared_neighborhood();
        let social_pairs = candidate_set(
            Task::SocialLink,
            &[(NodeRef::social(3), NodeRef::social(4))],
        );
        assert!(score_candidates(&net, &social_pairs, &ScorerSpec::AttributeFrequency).is_err());
        // Pair kind contradicting the declared task.
        let mislabeled = candidate_set(
            Task::AttributeLink,
            &[(NodeRef::social(3), NodeRef::social(4))],
        );
        assert!(score_candidates(&net, &mislabeled, &ScorerSpec::CommonNeighbors).is_err());
        assert!(cn_san(&net, NodeRef::social(0), NodeRef::social(99)).is_err());
        assert!(aa_san(&net, NodeRef::attribute(0), NodeRef::attribute(1)).is_err());
    }

    #[test]
    fn empty_candidate_set_scores_to_empty_table() {
        let net = shared_neighborhood();
        let set = candidate_set(Task::SocialLink, &[]);
        let table = score_candidates(&net, &set, &ScorerSpec::CommonNeighbors).unwrap();
        assert!(table.entries.is_empty());
    }

    #[test]
    fn csv_names_scorer_and_is_stable() {
        let net = shared_neighborhood();
        let set = candidate_set(
            Task::AttributeLink,
            &[
                (NodeRef::social(3), NodeRef::attribute(0)),
                (NodeRef::social(4), NodeRef::attribute(1)),
            ],
        );
        let table = score_candidates(&net, &set, &ScorerSpec::CommonNeighbors).unwrap();
        let csv = table.to_csv();
        assert_eq!(
            csv,
            "# scorer=common_neighbors\nu,v,score\ns3,a0,1\ns4,a1,0\n"
        );
    }

    #[test]
    fn common_positive_attribute_count_matches_intersection() {
        let net = shared_neighborhood();
        assert_eq!(
            common_positive_attributes(&net, NodeRef::social(0), NodeRef::social(1)).unwrap(),
            1
        );
        assert_eq!(
            common_positive_attributes(&net, NodeRef::social(3), NodeRef::social(4)).unwrap(),
            0
        );
    }

    #[test]
    fn scorer_spec_round_trips_through_json() {
        let specs = [
            ScorerSpec::Random { seed: 7 },
            ScorerSpec::CommonNeighbors,
            ScorerSpec::LowRank { rank: 8, seed: 1 },
            ScorerSpec::RandomWalkRestart { params: RwwrParams::default() },
        ];
        for spec in specs {
            let json = serde_json::to_string(&spec).unwrap();
            let back: ScorerSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(spec, back);
        }
    }
}
