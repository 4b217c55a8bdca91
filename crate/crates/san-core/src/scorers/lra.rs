//! Low-rank scorers: factorize a matrix view of the network and read
//! candidate scores from the truncated reconstruction.
//!
//! Three matrices can back a model: the positive adjacency (social
//! columns then attribute columns), or one of the two common-neighbor
//! score matrices built by [`build_cn_matrix`](super::build_cn_matrix)
//! and [`build_aa_matrix`](super::build_aa_matrix). A small number of
//! latent factors captures most of the link structure, so a candidate's
//! reconstructed entry serves as its score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeRef, SocialAttributeNetwork};
use crate::labels::CandidateSet;
use crate::linalg::{CsrMatrix, SvdParams, TruncatedSvd};

use super::{build_aa_matrix, build_cn_matrix, resolve_pair, score_provenance, ScoreTable};

/// Which matrix a low-rank model factorized, and therefore which pairs it
/// can score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// The N×(N+M) positive adjacency: scores social and attribute pairs.
    Adjacency,
    /// An N×N score matrix over social pairs.
    SocialScores,
    /// An N×M score matrix over (user, attribute) pairs.
    AttributeScores,
}

/// A truncated factorization of one matrix view of a network.
#[derive(Debug, Clone)]
pub struct LowRankModel {
    pub rank: usize,
    pub provenance: Provenance,
    svd: TruncatedSvd,
    n_social: usize,
}

impl LowRankModel {
    /// Factorize an arbitrary matrix at the given rank. `n_social` fixes
    /// the column layout so [`lra_score`] can map node pairs to entries.
    ///
    /// Deterministic given the seed. Errors if the rank is out of range
    /// for the matrix or the factorization fails to converge.
    pub fn fit_matrix(
        matrix: &CsrMatrix,
        rank: usize,
        provenance: Provenance,
        n_social: usize,
        seed: u64,
        params: &SvdParams,
    ) -> Result<LowRankModel> {
        let expected_rows = n_social;
        if matrix.nrows() != expected_rows {
            return Err(Error::precondition(format!(
                "matrix has {} rows but the network has {} social nodes",
                matrix.nrows(),
                expected_rows
            )));
        }
        let svd = TruncatedSvd::fit(matrix, rank, seed, params)?;
        Ok(LowRankModel {
            rank,
            provenance,
            svd,
            n_social,
        })
    }

    /// The (row, col) entry of the rank-r reconstruction.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.svd.reconstruct_entry(row, col)
    }

    fn column(&self, target: NodeRef) -> Result<usize> {
        let col = match (self.provenance, target.is_social()) {
            (Provenance::Adjacency, true) => target.index(),
            (Provenance::Adjacency, false) => self.n_social + target.index(),
            (Provenance::SocialScores, true) => target.index(),
            (Provenance::AttributeScores, false) => target.index(),
            _ => {
                return Err(Error::precondition(format!(
                    "model over {:?} cannot score target {target}",
                    self.provenance
                )))
            }
        };
        if col < self.svd.v.nrows() {
            Ok(col)
        } else {
            Err(Error::UnknownNode(target))
        }
    }
}

/// Factorize the network's positive adjacency at the given rank.
pub fn fit_lra(
    net: &SocialAttributeNetwork,
    rank: usize,
    seed: u64,
    params: &SvdParams,
) -> Result<LowRankModel> {
    let matrix = super::build_san_adjacency(net);
    LowRankModel::fit_matrix(
        &matrix,
        rank,
        Provenance::Adjacency,
        net.n_social(),
        seed,
        params,
    )
}

/// Score a pair as its entry in the model's reconstruction. The first
/// endpoint selects the row (it must be social), the second the column.
pub fn lra_score(model: &LowRankModel, u: NodeRef, t: NodeRef) -> Result<f64> {
    if !u.is_social() || u.index() >= model.n_social {
        return Err(Error::UnknownNode(u));
    }
    Ok(model.entry(u.index(), model.column(t)?))
}

fn score_matrix_candidates(
    net: &SocialAttributeNetwork,
    candidates: &CandidateSet,
    matrix: &CsrMatrix,
    rank: usize,
    seed: u64,
    params: &SvdParams,
    scorer: String,
    skipped: u64,
) -> Result<ScoreTable> {
    let model = LowRankModel::fit_matrix(
        matrix,
        rank,
        score_provenance(candidates.task),
        net.n_social(),
        seed,
        params,
    )?;
    let mut entries = Vec::with_capacity(candidates.len());
    for &(u, v, _) in &candidates.pairs {
        let (_, _, task) = resolve_pair(net, u, v)?;
        if task != candidates.task {
            return Err(Error::precondition(format!(
                "candidate ({u}, {v}) does not match task {:?}",
                candidates.task
            )));
        }
        entries.push((u, v, lra_score(&model, u, v)?));
    }
    Ok(ScoreTable {
        task: candidates.task,
        scorer,
        entries,
        diagnostics: super::Diagnostics {
            skipped_degenerate_terms: skipped,
        },
    })
}

/// Build the task's common-neighbor score matrix, factorize it at the
/// given rank, and score each candidate from the reconstruction.
pub fn cn_plus_lra(
    net: &SocialAttributeNetwork,
    candidates: &CandidateSet,
    rank: usize,
    seed: u64,
    params: &SvdParams,
) -> Result<ScoreTable> {
    let matrix = build_cn_matrix(net, candidates.task);
    score_matrix_candidates(
        net,
        candidates,
        &matrix,
        rank,
        seed,
        params,
        format!("cn_low_rank rank={rank} seed={seed}"),
        0,
    )
}

/// As [`cn_plus_lra`] but over the degree-discounted score matrix.
pub fn aa_plus_lra(
    net: &SocialAttributeNetwork,
    candidates: &CandidateSet,
    rank: usize,
    seed: u64,
    params: &SvdParams,
) -> Result<ScoreTable> {
    let (matrix, skipped) = build_aa_matrix(net, candidates.task);
    score_matrix_candidates(
        net,
        candidates,
        &matrix,
        rank,
        seed,
        params,
        format!("aa_low_rank rank={rank} seed={seed}"),
        skipped,
    )
}
