//! Supervised prediction: topological features per candidate pair, class
//! balancing, and a linear classifier whose decision values rank
//! candidates.
//!
//! Link candidates get the six unsupervised scores — common neighbors,
//! degree-discounted common neighbors, the low-rank family, and the
//! restarting walk — extracted from the social projection, the full
//! network, or both, per [`Variant`]. Attribute candidates get a
//! nine-feature vector with the low-rank scorers at two ranks. The
//! classifier ([`train`]) is logistic regression with L2 regularization
//! trained by deterministic full-batch gradient descent; [`select_l2`]
//! picks the regularization strength on a held-out split.

mod logistic;
mod pipeline;

pub use logistic::{select_l2, train, LinearModel, TrainParams};
pub use pipeline::{
    sai_pipeline, slp_pipeline, SaiParams, SlpOutcome, SlpParams, DEFAULT_LAMBDA_GRID,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeRef, SocialAttributeNetwork};
use crate::labels::{CandidateSet, Label, Task};
use crate::linalg::SvdParams;
use crate::scorers::{
    aa_san, build_aa_matrix, build_cn_matrix, cn_san, common_positive_attributes, fit_lra,
    lra_score, rwwr_on, LowRankModel, Provenance, RwwrParams, WalkGraph,
};

/// Feature set used by a supervised model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Six link features on the social projection.
    SlpI,
    /// [`Variant::SlpI`] plus the common-positive-attribute count.
    SlpII,
    /// Six link features on the full network.
    SlpSanIII,
    /// [`Variant::SlpI`] and [`Variant::SlpSanIII`] concatenated.
    SlpSanVI,
    /// Nine attribute-link features, with low-rank scorers at two ranks.
    Sai,
}

impl Variant {
    pub fn feature_count(self) -> usize {
        match self {
            Variant::SlpI | Variant::SlpSanIII => 6,
            Variant::SlpII => 7,
            Variant::SlpSanVI => 12,
            Variant::Sai => 9,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::SlpI => "slp1",
            Variant::SlpII => "slp2",
            Variant::SlpSanIII => "slpsan3",
            Variant::SlpSanVI => "slpsan6",
            Variant::Sai => "sai",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "slp1" => Ok(Variant::SlpI),
            "slp2" => Ok(Variant::SlpII),
            "slpsan3" => Ok(Variant::SlpSanIII),
            "slpsan6" => Ok(Variant::SlpSanVI),
            "sai" => Ok(Variant::Sai),
            other => Err(Error::parse(
                "variant",
                None,
                format!("unknown variant {other:?} (want slp1|slp2|slpsan3|slpsan6|sai)"),
            )),
        }
    }
}

/// Labeled feature rows for a set of candidate pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub variant: Variant,
    pub feature_names: Vec<String>,
    pub pairs: Vec<(NodeRef, NodeRef)>,
    /// One row per pair, `feature_names.len()` columns each.
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_pos(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::Pos).count()
    }

    pub fn n_neg(&self) -> usize {
        self.len() - self.n_pos()
    }

    /// CSV with a `u,v,label` prefix and one column per feature.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,label");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for ((&(u, v), row), &label) in self.pairs.iter().zip(&self.rows).zip(&self.labels) {
            let label = if label == Label::Pos { "pos" } else { "neg" };
            out.push_str(&format!("{u},{v},{label}"));
            for x in row {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Hyperparameters of the global scorers inside link-feature extraction.
/// Ranks are clamped to the factorized matrix's dimensions, so defaults
/// tuned for large networks stay usable on small test fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkFeatureParams {
    pub lra_rank: usize,
    pub cn_lra_rank: usize,
    pub aa_lra_rank: usize,
    pub svd_seed: u64,
    pub rwwr: RwwrParams,
}

impl Default for LinkFeatureParams {
    fn default() -> Self {
        LinkFeatureParams {
            lra_rank: 100,
            cn_lra_rank: 100,
            aa_lra_rank: 100,
            svd_seed: 0,
            rwwr: RwwrParams::default(),
        }
    }
}

/// Hyperparameters for attribute-feature extraction: the two ranks used
/// by each low-rank scorer (clamped to matrix dimensions), the
/// factorization seed, and the walk parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaiFeatureParams {
    pub rank1: usize,
    pub rank2: usize,
    pub svd_seed: u64,
    pub rwwr: RwwrParams,
}

impl Default for SaiFeatureParams {
    fn default() -> Self {
        SaiFeatureParams {
            rank1: 100,
            rank2: 1000,
            svd_seed: 0,
            rwwr: RwwrParams::default(),
        }
    }
}

fn clamp_rank(rank: usize, dim: usize) -> Result<usize> {
    if dim == 0 {
        return Err(Error::precondition(
            "cannot factorize a matrix with an empty dimension",
        ));
    }
    Ok(rank.clamp(1, dim))
}

/// Stationary walk distributions for each distinct pair endpoint, plus
/// helpers to read pair scores from them.
struct WalkCache {
    sources: Vec<usize>,
    walks: Vec<Vec<f64>>,
    n_social: usize,
}

impl WalkCache {
    fn build(
        net: &SocialAttributeNetwork,
        pairs: &[(NodeRef, NodeRef)],
        both_endpoints: bool,
        params: &RwwrParams,
    ) -> Result<WalkCache> {
        let walk = WalkGraph::build(net);
        let mut sources: Vec<usize> = Vec::with_capacity(pairs.len() * 2);
        for &(u, v) in pairs {
            sources.push(u.index());
            if both_endpoints {
                sources.push(v.index());
            }
        }
        sources.sort_unstable();
        sources.dedup();
        let walks = sources
            .par_iter()
            .map(|&s| rwwr_on(&walk, s, params))
            .collect::<Result<_>>()?;
        Ok(WalkCache {
            sources,
            walks,
            n_social: net.n_social(),
        })
    }

    fn distribution(&self, source: usize) -> &[f64] {
        &self.walks[self.sources.binary_search(&source).expect("cached walk")]
    }

    fn social_score(&self, u: NodeRef, v: NodeRef) -> f64 {
        (self.distribution(u.index())[v.index()] + self.distribution(v.index())[u.index()]) / 2.0
    }

    fn attribute_score(&self, u: NodeRef, a: NodeRef) -> f64 {
        self.distribution(u.index())[self.n_social + a.index()]
    }
}

/// The six link features on one network, named with a prefix.
fn link_feature_block(
    net: &SocialAttributeNetwork,
    pairs: &[(NodeRef, NodeRef)],
    prefix: &str,
    params: &LinkFeatureParams,
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let names = ["cn", "aa", "lra", "cn_lra", "aa_lra", "rwwr"]
        .iter()
        .map(|f| format!("{prefix}{f}"))
        .collect();
    let svd = SvdParams::default();
    let n = net.n_social();
    let adjacency_rank = clamp_rank(params.lra_rank, n.min(n + net.n_attributes()))?;
    let lra = fit_lra(net, adjacency_rank, params.svd_seed, &svd)?;
    let cn_matrix = build_cn_matrix(net, Task::SocialLink);
    let cn_model = LowRankModel::fit_matrix(
        &cn_matrix,
        clamp_rank(params.cn_lra_rank, n)?,
        Provenance::SocialScores,
        n,
        params.svd_seed,
        &svd,
    )?;
    let (aa_matrix, _) = build_aa_matrix(net, Task::SocialLink);
    let aa_model = LowRankModel::fit_matrix(
        &aa_matrix,
        clamp_rank(params.aa_lra_rank, n)?,
        Provenance::SocialScores,
        n,
        params.svd_seed,
        &svd,
    )?;
    let walks = WalkCache::build(net, pairs, true, &params.rwwr)?;
    let rows = pairs
        .iter()
        .map(|&(u, v)| {
            Ok(vec![
                cn_san(net, u, v)?,
                aa_san(net, u, v)?,
                lra_score(&lra, u, v)?,
                lra_score(&cn_model, u, v)?,
                lra_score(&aa_model, u, v)?,
                walks.social_score(u, v),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((names, rows))
}

fn concat_rows(left: Vec<Vec<f64>>, right: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    left.into_iter()
        .zip(right)
        .map(|(mut l, r)| {
            l.extend(r);
            l
        })
        .collect()
}

/// Extract one feature row per social-link candidate.
///
/// The variant chooses the source network(s): the social projection of
/// `net`, the full network, or both; the common-attribute count of
/// [`Variant::SlpII`] always reads the full network.
pub fn extract_link_features(
    net: &SocialAttributeNetwork,
    candidates: &CandidateSet,
    variant: Variant,
    params: &LinkFeatureParams,
) -> Result<FeatureMatrix> {
    if candidates.task != Task::SocialLink {
        return Err(Error::precondition(
            "link features require social-link candidates",
        ));
    }
    if variant == Variant::Sai {
        return Err(Error::precondition(
            "attribute features come from extract_attribute_features",
        ));
    }
    let pairs: Vec<(NodeRef, NodeRef)> =
        candidates.pairs.iter().map(|&(u, v, _)| (u, v)).collect();
    let labels: Vec<Label> = candidates.pairs.iter().map(|&(_, _, l)| l).collect();

    let (feature_names, rows) = match variant {
        Variant::SlpI => link_feature_block(&net.project_social(), &pairs, "social_", params)?,
        Variant::SlpII => {
            let (mut names, rows) =
                link_feature_block(&net.project_social(), &pairs, "social_", params)?;
            names.push("common_attributes".into());
            let rows = pairs
                .iter()
                .zip(rows)
                .map(|(&(u, v), mut row)| {
                    row.push(common_positive_attributes(net, u, v)? as f64);
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            (names, rows)
        }
        Variant::SlpSanIII => link_feature_block(net, &pairs, "san_", params)?,
        Variant::SlpSanVI => {
            let (mut names, social_rows) =
                link_feature_block(&net.project_social(), &pairs, "social_", params)?;
            let (san_names, san_rows) = link_feature_block(net, &pairs, "san_", params)?;
            names.extend(san_names);
            (names, concat_rows(social_rows, san_rows))
        }
        Variant::Sai => unreachable!(),
    };
    debug_assert_eq!(feature_names.len(), variant.feature_count());
    Ok(FeatureMatrix {
        variant,
        feature_names,
        pairs,
        rows,
        labels,
    })
}

/// Extract the nine-feature row per (user, attribute) candidate: the two
/// local scores, the walk probability, and the three low-rank scorers at
/// two ranks each.
pub fn extract_attribute_features(
    net: &SocialAttributeNetwork,
    candidates: &CandidateSet,
    params: &SaiFeatureParams,
) -> Result<FeatureMatrix> {
    if candidates.task != Task::AttributeLink {
        return Err(Error::precondition(
            "attribute features require attribute-link candidates",
        ));
    }
    let pairs: Vec<(NodeRef, NodeRef)> =
        candidates.pairs.iter().map(|&(u, v, _)| (u, v)).collect();
    let labels: Vec<Label> = candidates.pairs.iter().map(|&(_, _, l)| l).collect();
    let feature_names: Vec<String> = [
        "cn", "aa", "rwwr", "lra_rank1", "lra_rank2", "cn_lra_rank1", "cn_lra_rank2",
        "aa_lra_rank1", "aa_lra_rank2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    let svd = SvdParams::default();
    let n = net.n_social();
    let m = net.n_attributes();
    // Fit each distinct (matrix, rank) combination once; equal clamped
    // ranks share the fit, which also makes their columns identical.
    let adjacency_ranks = (
        clamp_rank(params.rank1, n.min(n + m))?,
        clamp_rank(params.rank2, n.min(n + m))?,
    );
    let score_ranks = (
        clamp_rank(params.rank1, n.min(m))?,
        clamp_rank(params.rank2, n.min(m))?,
    );
    let fit_pair = |fit_one: &dyn Fn(usize) -> Result<LowRankModel>,
                    ranks: (usize, usize)|
     -> Result<(LowRankModel, LowRankModel)> {
        let first = fit_one(ranks.0)?;
        let second = if ranks.1 == ranks.0 {
            first.clone()
        } else {
            fit_one(ranks.1)?
        };
        Ok((first, second))
    };
    let (lra1, lra2) = fit_pair(
        &|rank| fit_lra(net, rank, params.svd_seed, &svd),
        adjacency_ranks,
    )?;
    let cn_matrix = build_cn_matrix(net, Task::AttributeLink);
    let (cn1, cn2) = fit_pair(
        &|rank| {
            LowRankModel::fit_matrix(
                &cn_matrix,
                rank,
                Provenance::AttributeScores,
                n,
                params.svd_seed,
                &svd,
            )
        },
        score_ranks,
    )?;
    let (aa_matrix, _) = build_aa_matrix(net, Task::AttributeLink);
    let (aa1, aa2) = fit_pair(
        &|rank| {
            LowRankModel::fit_matrix(
                &aa_matrix,
                rank,
                Provenance::AttributeScores,
                n,
                params.svd_seed,
                &svd,
            )
        },
        score_ranks,
    )?;
    let walks = WalkCache::build(net, &pairs, false, &params.rwwr)?;

    let rows = pairs
        .iter()
        .map(|&(u, a)| {
            Ok(vec![
                cn_san(net, u, a)?,
                aa_san(net, u, a)?,
                walks.attribute_score(u, a),
                lra_score(&lra1, u, a)?,
                lra_score(&lra2, u, a)?,
                lra_score(&cn1, u, a)?,
                lra_score(&cn2, u, a)?,
                lra_score(&aa1, u, a)?,
                lra_score(&aa2, u, a)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        variant: Variant::Sai,
        feature_names,
        pairs,
        rows,
        labels,
    })
}

/// Balance classes by uniform downsampling of the negatives; positives
/// are kept exactly. Row order is preserved. With more positives than
/// negatives the input is returned unchanged with a warning.
pub fn downsample(matrix: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
    let pos: Vec<usize> = (0..matrix.len())
        .filter(|&i| matrix.labels[i] == Label::Pos)
        .collect();
    let neg: Vec<usize> = (0..matrix.len())
        .filter(|&i| matrix.labels[i] == Label::Neg)
        .collect();
    if pos.is_empty() {
        return Err(Error::precondition(
            "downsampling needs at least one positive example",
        ));
    }
    if pos.len() >= neg.len() {
        if pos.len() > neg.len() {
            log::warn!(
                "more positives ({}) than negatives ({}): keeping all examples",
                pos.len(),
                neg.len()
            );
        }
        return Ok(matrix.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = rand::seq::index::sample(&mut rng, neg.len(), pos.len())
        .into_iter()
        .map(|i| neg[i])
        .collect();
    keep.extend(pos);
    keep.sort_unstable();
    Ok(FeatureMatrix {
        variant: matrix.variant,
        feature_names: matrix.feature_names.clone(),
        pairs: keep.iter().map(|&i| matrix.pairs[i]).collect(),
        rows: keep.iter().map(|&i| matrix.rows[i].clone()).collect(),
        labels: keep.iter().map(|&i| matrix.labels[i]).collect(),
    })
}

/// Existing attribute links of a network as labeled training examples:
/// positive links are positives, negative links are negatives.
pub fn attribute_training_examples(net: &SocialAttributeNetwork) -> CandidateSet {
    let mut pairs = Vec::new();
    for u in 0..net.n_social() {
        for &(a, _) in net.positive_attributes(u) {
            pairs.push((
                NodeRef::social(u),
                NodeRef::attribute(a as usize),
                Label::Pos,
            ));
        }
        for &(a, _) in net.negative_attributes(u) {
            pairs.push((
                NodeRef::social(u),
                NodeRef::attribute(a as usize),
                Label::Neg,
            ));
        }
    }
    pairs.sort_unstable();
    CandidateSet {
        task: Task::AttributeLink,
        scope: crate::labels::Scope::AnyHop,
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NetworkBuilder, Sign};
    use crate::labels::Scope;
    use crate::scorers::{cn_plus_lra, rwwr_score, score_candidates, ScorerSpec};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn random_network(seed: u64, n: usize, m: usize) -> SocialAttributeNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = NetworkBuilder::with_sizes(n, m);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random_bool(0.25) {
                    b.social_edge(NodeRef::social(u), NodeRef::social(v)).unwrap();
                }
            }
            for a in 0..m {
                if rng.random_bool(0.2) {
                    let sign = if rng.random_bool(0.8) { Sign::Positive } else { Sign::Negative };
                    b.attribute_link(NodeRef::social(u), NodeRef::attribute(a), sign).unwrap();
                }
            }
        }
        b.build().unwrap()
    }

    fn social_candidates(net: &SocialAttributeNetwork, label_every: usize) -> CandidateSet {
        let mut pairs = Vec::new();
        for u in 0..net.n_social() {
            for v in (u + 1)..net.n_social() {
                if !net.has_social_edge(u, v) {
                    let label = if pairs.len() % label_every == 0 { Label::Pos } else { Label::Neg };
                    pairs.push((NodeRef::social(u), NodeRef::social(v), label));
                }
            }
        }
        CandidateSet { task: Task::SocialLink, scope: Scope::AnyHop, pairs }
    }

    fn attribute_candidates(net: &SocialAttributeNetwork, label_every: usize) -> CandidateSet {
        let mut pairs = Vec::new();
        for u in 0..net.n_social() {
            for a in 0..net.n_attributes() {
                if !net.has_positive_link(u, a) {
                    let label = if pairs.len() % label_every == 0 { Label::Pos } else { Label::Neg };
                    pairs.push((NodeRef::social(u), NodeRef::attribute(a), label));
                }
            }
        }
        CandidateSet { task: Task::AttributeLink, scope: Scope::AnyHop, pairs }
    }

    fn params(rank: usize) -> LinkFeatureParams {
        LinkFeatureParams {
            lra_rank: rank,
            cn_lra_rank: rank,
            aa_lra_rank: rank,
            svd_seed: 5,
            rwwr: RwwrParams::default(),
        }
    }

    #[test]
    fn feature_counts_match_each_variant() {
        let net = random_network(1, 12, 5);
        let candidates = social_candidates(&net, 3);
        for variant in [Variant::SlpI, Variant::SlpII, Variant::SlpSanIII, Variant::SlpSanVI] {
            let matrix = extract_link_features(&net, &candidates, variant, &params(4)).unwrap();
            assert_eq!(matrix.feature_names.len(), variant.feature_count());
            assert_eq!(matrix.len(), candidates.len());
            for row in &matrix.rows {
                assert_eq!(row.len(), variant.feature_count());
                assert!(row.iter().all(|x| x.is_finite()));
            }
        }
        let attr_candidates = attribute_candidates(&net, 3);
        let sai = SaiFeatureParams { svd_seed: 5, ..SaiFeatureParams::default() };
        let matrix = extract_attribute_features(&net, &attr_candidates, &sai).unwrap();
        assert_eq!(matrix.feature_names.len(), 9);
        for row in &matrix.rows {
            assert_eq!(row.len(), 9);
            assert!(row.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn link_columns_equal_standalone_scorers() {
        let net = random_network(2, 12, 5);
        let candidates = social_candidates(&net, 4);
        let matrix =
            extract_link_features(&net, &candidates, Variant::SlpSanIII, &params(4)).unwrap();
        let lra_table =
            score_candidates(&net, &candidates, &ScorerSpec::LowRank { rank: 4, seed: 5 }).unwrap();
        let cn_lra_table = cn_plus_lra(&net, &candidates, 4, 5, &SvdParams::default()).unwrap();
        for (i, &(u, v, _)) in candidates.pairs.iter().enumerate() {
            let row = &matrix.rows[i];
            assert_eq!(row[0], cn_san(&net, u, v).unwrap(), "cn column");
            assert_eq!(row[1], aa_san(&net, u, v).unwrap(), "aa column");
            assert_eq!(row[2], lra_table.entries[i].2, "lra column");
            assert_eq!(row[3], cn_lra_table.entries[i].2, "cn+lra column");
            assert_relative_eq!(
                row[5],
                rwwr_score(&net, u, v, &RwwrParams::default()).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn attribute_columns_equal_standalone_scorers() {
        let net = random_network(3, 10, 6);
        let candidates = attribute_candidates(&net, 4);
        let sai = SaiFeatureParams { rank1: 3, rank2: 5, svd_seed: 9, ..SaiFeatureParams::default() };
        let matrix = extract_attribute_features(&net, &candidates, &sai).unwrap();
        let lra1 =
            score_candidates(&net, &candidates, &ScorerSpec::LowRank { rank: 3, seed: 9 }).unwrap();
        let lra2 =
            score_candidates(&net, &candidates, &ScorerSpec::LowRank { rank: 5, seed: 9 }).unwrap();
        let aa2 = score_candidates(
            &net,
            &candidates,
            &ScorerSpec::AaLowRank { rank: 5, seed: 9 },
        )
        .unwrap();
        for (i, &(u, a, _)) in candidates.pairs.iter().enumerate() {
            let row = &matrix.rows[i];
            assert_eq!(row[0], cn_san(&net, u, a).unwrap());
            assert_eq!(row[1], aa_san(&net, u, a).unwrap());
            assert_relative_eq!(
                row[2],
                rwwr_score(&net, u, a, &RwwrParams::default()).unwrap(),
                max_relative = 1e-12
            );
            assert_eq!(row[3], lra1.entries[i].2);
            assert_eq!(row[4], lra2.entries[i].2);
            assert_eq!(row[8], aa2.entries[i].2);
        }
    }

    #[test]
    fn attribute_free_network_makes_san_features_equal_social_features() {
        let net = random_network(4, 12, 0);
        let candidates = social_candidates(&net, 3);
        let slp1 = extract_link_features(&net, &candidates, Variant::SlpI, &params(4)).unwrap();
        let slp3 =
            extract_link_features(&net, &candidates, Variant::SlpSanIII, &params(4)).unwrap();
        assert_eq!(slp1.rows, slp3.rows);
    }

    #[test]
    fn no_overlap_pair_has_zero_local_columns() {
        // Two disjoint dumbbells: (0,1) and (2,3) never meet.
        let mut b = NetworkBuilder::with_sizes(4, 2);
        b.social_edge(NodeRef::social(0), NodeRef::social(1)).unwrap();
        b.social_edge(NodeRef::social(2), NodeRef::social(3)).unwrap();
        b.attribute_link(NodeRef::social(0), NodeRef::attribute(0), Sign::Positive).unwrap();
        b.attribute_link(NodeRef::social(2), NodeRef::attribute(1), Sign::Positive).unwrap();
        let net = b.build().unwrap();
        let candidates = CandidateSet {
            task: Task::SocialLink,
            scope: Scope::AnyHop,
            pairs: vec![(NodeRef::social(0), NodeRef::social(2), Label::Neg)],
        };
        let matrix = extract_link_features(&net, &candidates, Variant::SlpII, &params(2)).unwrap();
        let row = &matrix.rows[0];
        assert_eq!(row[0], 0.0); // common neighbors
        assert_eq!(row[1], 0.0); // discounted common neighbors
        assert_eq!(row[6], 0.0); // common attributes
    }

    #[test]
    fn clamped_ranks_collapse_to_the_same_column() {
        let net = random_network(6, 8, 3);
        let candidates = attribute_candidates(&net, 3);
        // Both requested ranks exceed every matrix dimension, so rank1 and
        // rank2 clamp to the same value and each scorer's two columns
        // coincide.
        let sai = SaiFeatureParams { rank1: 100, rank2: 1000, svd_seed: 1, ..Default::default() };
        let matrix = extract_attribute_features(&net, &candidates, &sai).unwrap();
        for row in &matrix.rows {
            assert_eq!(row[3], row[4], "adjacency ranks clamp together");
            assert_eq!(row[5], row[6], "cn score ranks clamp together");
            assert_eq!(row[7], row[8], "aa score ranks clamp together");
        }
    }

    #[test]
    fn downsampling_balances_and_preserves_positives() {
        let net = random_network(7, 12, 4);
        let candidates = social_candidates(&net, 7);
        let matrix = extract_link_features(&net, &candidates, Variant::SlpI, &params(3)).unwrap();
        let balanced = downsample(&matrix, 17).unwrap();
        assert_eq!(balanced.n_pos(), matrix.n_pos());
        assert_eq!(balanced.n_neg(), matrix.n_pos());
        // Positives survive with rows intact, in order.
        let original_pos: Vec<_> = (0..matrix.len())
            .filter(|&i| matrix.labels[i] == Label::Pos)
            .map(|i| matrix.pairs[i])
            .collect();
        let kept_pos: Vec<_> = (0..balanced.len())
            .filter(|&i| balanced.labels[i] == Label::Pos)
            .map(|i| balanced.pairs[i])
            .collect();
        assert_eq!(original_pos, kept_pos);
        // Deterministic per seed, different across seeds.
        assert_eq!(balanced, downsample(&matrix, 17).unwrap());
        assert_ne!(balanced, downsample(&matrix, 18).unwrap());
    }

    #[test]
    fn downsampling_degenerate_cases() {
        let net = random_network(8, 8, 0);
        let candidates = social_candidates(&net, 2); // half positive: pos ≥ neg
        let matrix = extract_link_features(&net, &candidates, Variant::SlpI, &params(2)).unwrap();
        let out = downsample(&matrix, 1).unwrap();
        assert_eq!(&out, &matrix); // nothing to drop
        let mut no_pos = matrix.clone();
        no_pos.labels.iter_mut().for_each(|l| *l = Label::Neg);
        assert!(downsample(&no_pos, 1).is_err());
    }

    #[test]
    fn task_and_variant_mismatches_are_rejected() {
        let net = random_network(9, 8, 3);
        let social = social_candidates(&net, 3);
        let attrs = attribute_candidates(&net, 3);
        assert!(extract_link_features(&net, &attrs, Variant::SlpI, &params(2)).is_err());
        assert!(extract_link_features(&net, &social, Variant::Sai, &params(2)).is_err());
        assert!(
            extract_attribute_features(&net, &social, &SaiFeatureParams::default()).is_err()
        );
    }

    #[test]
    fn training_examples_mirror_existing_links() {
        let net = random_network(10, 10, 4);
        let examples = attribute_training_examples(&net);
        assert_eq!(examples.n_pos(), net.positive_link_count());
        assert_eq!(examples.n_neg(), net.negative_link_count());
        for &(u, a, label) in &examples.pairs {
            let positive = net.has_positive_link(u.index(), a.index());
            assert_eq!(label == Label::Pos, positive);
        }
    }

    #[test]
    fn feature_csv_round_trip_shape() {
        let net = random_network(11, 6, 2);
        let candidates = social_candidates(&net, 2);
        let matrix = extract_link_features(&net, &candidates, Variant::SlpII, &params(2)).unwrap();
        let csv = matrix.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), matrix.len() + 1);
        assert!(lines[0].starts_with("u,v,label,social_cn,"));
        assert_eq!(lines[0].split(',').count(), 3 + 7);
    }
}
