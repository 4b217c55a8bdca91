//! End-to-end supervised pipelines: labels → features → class balancing →
//! regularization search → decision scores for fresh candidates.
//!
//! Each stage seed is derived from the pipeline seed with a distinct salt,
//! so a single seed reproduces the whole run while the stages stay
//! decorrelated. Running the stages by hand with the same salts produces
//! byte-identical output, which the tests pin down.

use crate::error::Result;
use crate::graph::{Snapshot, SocialAttributeNetwork};
use crate::labels::{extract_labels, CandidateSet, Label, LabelParams, Task};
use crate::scorers::{Diagnostics, ScoreTable};
use crate::util::derive_seed;

use super::logistic::{select_l2, LinearModel};
use super::{
    attribute_training_examples, downsample, extract_attribute_features, extract_link_features,
    LinkFeatureParams, SaiFeatureParams, Variant,
};

/// Default regularization grid searched by the pipelines, strongest
/// penalty first.
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];

/// Salt for the class-balancing stage seed.
const DOWNSAMPLE_SALT: u64 = 1;
/// Salt for the selection-split stage seed.
const SELECT_SALT: u64 = 2;

/// Settings for [`slp_pipeline`].
#[derive(Debug, Clone)]
pub struct SlpParams {
    pub variant: Variant,
    /// Candidate extraction settings, applied to the fit pair and the
    /// evaluation pair alike (each pair samples from its own networks).
    pub labels: LabelParams,
    pub features: LinkFeatureParams,
    pub lambda_grid: Vec<f64>,
    pub epochs: usize,
    pub seed: u64,
}

impl SlpParams {
    pub fn new(variant: Variant, labels: LabelParams, seed: u64) -> Self {
        SlpParams {
            variant,
            labels,
            features: LinkFeatureParams::default(),
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            epochs: 500,
            seed,
        }
    }
}

/// Result of a supervised link-prediction run.
#[derive(Debug, Clone)]
pub struct SlpOutcome {
    /// Decision values for the evaluation candidates, in candidate order.
    pub table: ScoreTable,
    /// The labeled evaluation candidates the table scores.
    pub candidates: CandidateSet,
    pub model: LinearModel,
}

impl SlpOutcome {
    /// Ranking quality of the decision values against the candidate
    /// labels.
    pub fn auc(&self) -> Result<f64> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (&(_, _, label), &(_, _, score)) in
            self.candidates.pairs.iter().zip(&self.table.entries)
        {
            if label == Label::Pos {
                pos.push(score);
            } else {
                neg.push(score);
            }
        }
        crate::eval::auc(&pos, &neg)
    }
}

fn decision_table(model: &LinearModel, candidates: &CandidateSet, scores: Vec<f64>) -> ScoreTable {
    ScoreTable {
        task: candidates.task,
        scorer: format!("{} lambda={}", model.variant, model.lambda),
        entries: candidates
            .pairs
            .iter()
            .zip(scores)
            .map(|(&(u, v, _), s)| (u, v, s))
            .collect(),
        diagnostics: Diagnostics::default(),
    }
}

/// Train a link classifier on one snapshot pair and score candidates from
/// another.
///
/// Labels come from the earlier-vs-later networks of each pair; features
/// always read the first network of a pair (the one prediction would see).
/// Typical use fits on (validate, train) and evaluates on (train, test),
/// so hyperparameters never touch the test horizon.
pub fn slp_pipeline(
    fit: (&Snapshot, &Snapshot),
    eval: (&Snapshot, &Snapshot),
    params: &SlpParams,
) -> Result<SlpOutcome> {
    let fit_candidates = extract_labels(fit.0, fit.1, Task::SocialLink, &params.labels)?;
    let features =
        extract_link_features(&fit.0.network, &fit_candidates, params.variant, &params.features)?;
    let balanced = downsample(&features, derive_seed(params.seed, DOWNSAMPLE_SALT))?;
    let model = select_l2(
        &balanced,
        &params.lambda_grid,
        params.epochs,
        derive_seed(params.seed, SELECT_SALT),
    )?;

    let candidates = extract_labels(eval.0, eval.1, Task::SocialLink, &params.labels)?;
    let eval_features =
        extract_link_features(&eval.0.network, &candidates, params.variant, &params.features)?;
    let scores = model.decisions(&eval_features)?;
    let table = decision_table(&model, &candidates, scores);
    Ok(SlpOutcome {
        table,
        candidates,
        model,
    })
}

/// Settings for [`sai_pipeline`].
#[derive(Debug, Clone)]
pub struct SaiParams {
    pub features: SaiFeatureParams,
    pub lambda_grid: Vec<f64>,
    pub epochs: usize,
    pub seed: u64,
}

impl SaiParams {
    pub fn new(features: SaiFeatureParams, seed: u64) -> Self {
        SaiParams {
            features,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            epochs: 500,
            seed,
        }
    }
}

/// Train an attribute classifier on a network's remaining attribute links
/// and score held-out (user, attribute) candidates.
///
/// Every existing positive link is a positive example and every negative
/// link a negative example, so users whose attributes were stripped
/// contribute no training rows and the candidates stay unseen.
pub fn sai_pipeline(
    stripped: &SocialAttributeNetwork,
    candidates: &CandidateSet,
    params: &SaiParams,
) -> Result<(ScoreTable, LinearModel)> {
    let examples = attribute_training_examples(stripped);
    let features = extract_attribute_features(stripped, &examples, &params.features)?;
    let balanced = downsample(&features, derive_seed(params.seed, DOWNSAMPLE_SALT))?;
    let model = select_l2(
        &balanced,
        &params.lambda_grid,
        params.epochs,
        derive_seed(params.seed, SELECT_SALT),
    )?;

    let eval_features = extract_attribute_features(stripped, candidates, &params.features)?;
    let scores = model.decisions(&eval_features)?;
    let mut table = decision_table(&model, candidates, scores);
    table.scorer = format!(
        "sai lambda={} rank1={} rank2={}",
        model.lambda, params.features.rank1, params.features.rank2
    );
    Ok((table, model))
}
