//! The three end-to-end experiment protocols: link prediction with and
//! without attributes, attribute inference with mutex post-processing,
//! and the iterative infer-attributes-then-predict-links pipeline.
//!
//! Every protocol is reproducible from a single seed: stage seeds are
//! derived with fixed salts, trials with per-trial salts, and all
//! iteration orders are deterministic. Reruns with the same inputs
//! produce byte-identical reports.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{NodeRef, Snapshot, SocialAttributeNetwork};
use crate::labels::{
    extract_labels, remove_user_attributes, sample_users, CandidateSet, Label, LabelParams,
    NegativeMode, Scope, Task,
};
use crate::scorers::{score_candidates, ScoreTable, ScorerSpec};
use crate::supervised::{sai_pipeline, SaiParams};
use crate::util::derive_seed;

use super::grid::{grid_search, GridPoint, GridSpec, ScorerTemplate};
use super::metrics::{precision_at_k, RankedCandidates};
use super::mutex::{augment_positive_links, mutex_postprocess};
use super::report::{Metric, MetricsReport, ReportRow};

// Stage salts; trial-indexed stages add the trial number.
const FIT_LABEL_SALT: u64 = 101;
const EVAL_LABEL_SALT: u64 = 102;
const GRID_SALT: u64 = 103;
const TRIAL_SALT: u64 = 1_000;
const SAMPLE_SALT: u64 = 2_000;
const SAI_SALT: u64 = 3_000;

/// AUC of a score table against its candidate labels.
pub fn table_auc(candidates: &CandidateSet, table: &ScoreTable) -> Result<f64> {
    if candidates.len() != table.entries.len() {
        return Err(Error::precondition(
            "score table does not cover the candidate set",
        ));
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&(_, _, label), &(_, _, score)) in candidates.pairs.iter().zip(&table.entries) {
        if label == Label::Pos {
            pos.push(score);
        } else {
            neg.push(score);
        }
    }
    super::metrics::auc(&pos, &neg)
}

fn negatives_note(mode: &NegativeMode) -> String {
    match mode {
        NegativeMode::Exhaustive => "negatives: exhaustive".into(),
        NegativeMode::Capped { ratio } => format!("negatives: capped ratio={ratio}"),
    }
}

/// The evaluation-transition candidate set a link experiment scores, for
/// callers that re-score a chosen configuration (e.g. to export the
/// per-candidate tables behind a report).
pub fn link_eval_candidates(
    train: &Snapshot,
    test: &Snapshot,
    params: &LinkParams,
) -> Result<CandidateSet> {
    let labels = LabelParams {
        scope: params.scope,
        negatives: params.negatives,
        seed: derive_seed(params.seed, EVAL_LABEL_SALT),
    };
    extract_labels(train, test, Task::SocialLink, &labels)
}

/// Seed a link experiment hands scorer instantiation in trial `t`.
pub fn trial_seed(seed: u64, t: usize) -> u64 {
    derive_seed(seed, TRIAL_SALT + t as u64)
}

/// Settings for [`run_link_experiment`].
#[derive(Debug, Clone)]
pub struct LinkParams {
    pub scope: Scope,
    pub negatives: NegativeMode,
    pub grid: GridSpec,
    pub trials: usize,
    pub seed: u64,
}

/// One scorer family's result row: the metric and chosen hyperparameters
/// for each attribute configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkOutcome {
    pub template: ScorerTemplate,
    pub without_attributes: Metric,
    pub with_attributes: Metric,
    pub chosen_without: GridPoint,
    pub chosen_with: GridPoint,
}

/// Result of [`run_link_experiment`].
#[derive(Debug, Clone)]
pub struct LinkExperiment {
    pub outcomes: Vec<LinkOutcome>,
    pub report: MetricsReport,
}

/// Grid-search each scorer family on the (validate → train) transition,
/// then measure test AUC on the (train → test) transition, with and
/// without attributes.
///
/// Both configurations score the same candidate pairs — the social
/// projection preserves the social structure the candidates are drawn
/// from — so their columns are directly comparable. The direction of the
/// experiment (new vs missing links) follows the snapshot ordinals.
pub fn run_link_experiment(
    validate: &Snapshot,
    train: &Snapshot,
    test: &Snapshot,
    templates: &[ScorerTemplate],
    params: &LinkParams,
) -> Result<LinkExperiment> {
    if params.trials == 0 {
        return Err(Error::precondition("need at least one trial"));
    }
    if templates.is_empty() {
        return Err(Error::precondition("need at least one scorer family"));
    }
    let fit_labels = LabelParams {
        scope: params.scope,
        negatives: params.negatives,
        seed: derive_seed(params.seed, FIT_LABEL_SALT),
    };
    let eval_labels = LabelParams {
        seed: derive_seed(params.seed, EVAL_LABEL_SALT),
        ..fit_labels
    };
    let fit_candidates = extract_labels(validate, train, Task::SocialLink, &fit_labels)?;
    let eval_candidates = extract_labels(train, test, Task::SocialLink, &eval_labels)?;

    let fit_social = validate.network.project_social();
    let eval_social = train.network.project_social();
    let configs: [(&SocialAttributeNetwork, &SocialAttributeNetwork); 2] = [
        (&fit_social, &eval_social),
        (&validate.network, &train.network),
    ];

    let grid_seed = derive_seed(params.seed, GRID_SALT);
    let mut outcomes = Vec::new();
    for &template in templates {
        let points = template.points_for(&params.grid)?;
        let mut chosen_points = Vec::with_capacity(2);
        let mut metrics = Vec::with_capacity(2);
        for (fit_net, eval_net) in configs {
            let (chosen, _) = grid_search(&points, |point| {
                let spec = template.instantiate(point, grid_seed)?;
                let table = score_candidates(fit_net, &fit_candidates, &spec)?;
                table_auc(&fit_candidates, &table)
            })?;
            let mut per_trial = Vec::with_capacity(params.trials);
            for t in 0..params.trials {
                let spec =
                    template.instantiate(&chosen, derive_seed(params.seed, TRIAL_SALT + t as u64))?;
                let table = score_candidates(eval_net, &eval_candidates, &spec)?;
                per_trial.push(table_auc(&eval_candidates, &table)?);
            }
            chosen_points.push(chosen);
            metrics.push(Metric::from_trials(&per_trial)?);
        }
        let with_attributes = metrics.pop().expect("two configurations");
        let without_attributes = metrics.pop().expect("two configurations");
        outcomes.push(LinkOutcome {
            template,
            without_attributes,
            with_attributes,
            chosen_without: chosen_points[0],
            chosen_with: chosen_points[1],
        });
    }

    let experiment = if train.ordinal < test.ordinal {
        "new_links"
    } else {
        "missing_links"
    };
    let mut notes = vec![negatives_note(&params.negatives)];
    for o in &outcomes {
        notes.push(format!(
            "{}: chosen w/o [{}], With [{}]",
            o.template, o.chosen_without, o.chosen_with
        ));
    }
    let report = MetricsReport {
        experiment: experiment.into(),
        train: train.label.clone(),
        validate: validate.label.clone(),
        test: test.label.clone(),
        scope: params.scope.to_string(),
        trials: params.trials,
        seed: params.seed,
        notes,
        rows: outcomes
            .iter()
            .map(|o| ReportRow {
                scorer: o.template.to_string(),
                cells: vec![
                    ("w/o Attri".into(), o.without_attributes.clone()),
                    ("With Attri".into(), o.with_attributes.clone()),
                ],
            })
            .collect(),
    };
    Ok(LinkExperiment { outcomes, report })
}

/// Settings for [`run_attribute_experiment`].
#[derive(Debug, Clone)]
pub struct AttributeParams {
    /// Fraction of users whose attributes are hidden per trial.
    pub sample_fraction: f64,
    /// The K values reported as Pre@K; the largest doubles as the mutex
    /// post-processing cutoff.
    pub ks: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for AttributeParams {
    fn default() -> Self {
        AttributeParams {
            sample_fraction: 0.1,
            ks: vec![2, 3, 4],
            trials: 10,
            seed: 0,
        }
    }
}

/// An attribute-inference method: an unsupervised scorer applied
/// directly, or the supervised pipeline trained per trial on the
/// remaining links.
#[derive(Debug, Clone)]
pub enum AttributeMethod {
    Unsupervised(ScorerSpec),
    Supervised(SaiParams),
}

impl AttributeMethod {
    pub fn label(&self) -> String {
        match self {
            AttributeMethod::Unsupervised(spec) => spec.to_string(),
            AttributeMethod::Supervised(p) => {
                format!("sai rank1={} rank2={}", p.features.rank1, p.features.rank2)
            }
        }
    }
}

/// One method's aggregated attribute-inference metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeOutcome {
    pub method: String,
    pub auc: Metric,
    pub precision: Vec<(usize, Metric)>,
}

/// Result of [`run_attribute_experiment`].
#[derive(Debug, Clone)]
pub struct AttributeExperiment {
    pub outcomes: Vec<AttributeOutcome>,
    pub report: MetricsReport,
}

/// Hide the attributes of a sampled user fraction, score every (user,
/// attribute) pair, and measure recovery.
///
/// AUC compares raw scores of the removed positive links against the
/// removed negative links; unlabeled candidates are scored but excluded.
/// Pre@K counts removed positives in each user's top K after mutex
/// post-processing (demoted candidates leave the ranking), averaged over
/// sampled users and trials.
pub fn run_attribute_experiment(
    train: &Snapshot,
    methods: &[AttributeMethod],
    params: &AttributeParams,
) -> Result<AttributeExperiment> {
    if params.trials == 0 {
        return Err(Error::precondition("need at least one trial"));
    }
    if methods.is_empty() {
        return Err(Error::precondition("need at least one method"));
    }
    if params.ks.is_empty() || params.ks.contains(&0) {
        return Err(Error::precondition("Pre@K needs positive K values"));
    }
    let net = &train.network;
    let cutoff = *params.ks.iter().max().expect("non-empty ks");

    let mut aucs: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    let mut precisions: Vec<BTreeMap<usize, Vec<f64>>> = vec![BTreeMap::new(); methods.len()];
    for t in 0..params.trials {
        let users = sample_users(
            net.n_social(),
            params.sample_fraction,
            derive_seed(params.seed, SAMPLE_SALT + t as u64),
        )?;
        if users.is_empty() {
            return Err(Error::precondition(
                "sample fraction rounds to zero users; nothing to infer",
            ));
        }
        let (stripped, removed) = remove_user_attributes(net, &users)?;
        let pos_set: BTreeSet<(NodeRef, NodeRef)> = removed.positives.iter().copied().collect();
        let neg_set: BTreeSet<(NodeRef, NodeRef)> = removed.negatives.iter().copied().collect();
        let mut pairs = Vec::with_capacity(users.len() * net.n_attributes());
        for &u in &users {
            for a in 0..net.n_attributes() {
                let pair = (NodeRef::social(u), NodeRef::attribute(a));
                let label = if pos_set.contains(&pair) {
                    Label::Pos
                } else {
                    Label::Neg
                };
                pairs.push((pair.0, pair.1, label));
            }
        }
        let candidates = CandidateSet {
            task: Task::AttributeLink,
            scope: Scope::AnyHop,
            pairs,
        };

        for (i, method) in methods.iter().enumerate() {
            let table = match method {
                AttributeMethod::Unsupervised(spec) => {
                    score_candidates(&stripped, &candidates, spec)?
                }
                AttributeMethod::Supervised(sai) => {
                    let mut sai = sai.clone();
                    sai.seed = derive_seed(params.seed, SAI_SALT + t as u64);
                    sai_pipeline(&stripped, &candidates, &sai)?.0
                }
            };

            // AUC over the labeled subset, before post-processing.
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for &(u, a, score) in &table.entries {
                if pos_set.contains(&(u, a)) {
                    pos.push(score);
                } else if neg_set.contains(&(u, a)) {
                    neg.push(score);
                }
            }
            aucs[i].push(super::metrics::auc(&pos, &neg)?);

            // Pre@K on the post-processed rankings.
            let adjusted = mutex_postprocess(&table, &stripped, cutoff)?;
            let demoted: BTreeSet<(NodeRef, NodeRef)> =
                adjusted.demoted.iter().copied().collect();
            let mut per_user: BTreeMap<u32, RankedCandidates> = BTreeMap::new();
            for &(u, a, score) in &table.entries {
                if demoted.contains(&(u, a)) {
                    continue;
                }
                per_user
                    .entry(u.index() as u32)
                    .or_insert_with(|| RankedCandidates { entries: Vec::new() })
                    .entries
                    .push((score, pos_set.contains(&(u, a))));
            }
            let rankings: Vec<RankedCandidates> = per_user.into_values().collect();
            for &k in &params.ks {
                let value = precision_at_k(&rankings, k)?;
                precisions[i].entry(k).or_default().push(value);
            }
        }
    }

    let mut outcomes = Vec::with_capacity(methods.len());
    for (i, method) in methods.iter().enumerate() {
        let precision = precisions[i]
            .iter()
            .map(|(&k, values)| Ok((k, Metric::from_trials(values)?)))
            .collect::<Result<Vec<_>>>()?;
        outcomes.push(AttributeOutcome {
            method: method.label(),
            auc: Metric::from_trials(&aucs[i])?,
            precision,
        });
    }

    let report = MetricsReport {
        experiment: "attributes".into(),
        train: train.label.clone(),
        validate: "-".into(),
        test: "-".into(),
        scope: "-".into(),
        trials: params.trials,
        seed: params.seed,
        notes: vec![
            format!("sample fraction: {}", params.sample_fraction),
            format!("mutex cutoff: {cutoff}"),
        ],
        rows: outcomes
            .iter()
            .map(|o| {
                let mut cells = vec![("AUC".to_string(), o.auc.clone())];
                for (k, metric) in &o.precision {
                    cells.push((format!("Pre@{k}"), metric.clone()));
                }
                ReportRow {
                    scorer: o.method.clone(),
                    cells,
                }
            })
            .collect(),
    };
    Ok(AttributeExperiment { outcomes, report })
}

/// Settings for [`run_iterative_experiment`].
#[derive(Debug, Clone)]
pub struct IterativeParams {
    pub scope: Scope,
    pub negatives: NegativeMode,
    /// Fraction of users whose attributes are hidden per trial.
    pub sample_fraction: f64,
    /// Attributes inferred per hidden user (mutex post-processing cutoff).
    pub top_k: usize,
    /// Infer→augment rounds. One round matches the reference protocol;
    /// more rounds re-infer on the augmented network (experimental —
    /// inference errors may compound).
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for IterativeParams {
    fn default() -> Self {
        IterativeParams {
            scope: Scope::Hop2Cat1,
            negatives: NegativeMode::Exhaustive,
            sample_fraction: 0.1,
            top_k: 4,
            iterations: 1,
            trials: 10,
            seed: 0,
        }
    }
}

/// One scorer's link-prediction quality in the three attribute variants.
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOutcome {
    pub scorer: String,
    /// (i) social projection only.
    pub without_attributes: Metric,
    /// (ii) remaining attributes after hiding the sampled users'.
    pub with_remaining: Metric,
    /// (iii) remaining plus inferred attributes.
    pub with_inferred: Metric,
}

/// Result of [`run_iterative_experiment`].
#[derive(Debug, Clone)]
pub struct IterativeExperiment {
    pub outcomes: Vec<IterativeOutcome>,
    pub report: MetricsReport,
}

/// Hide a user fraction's attributes, infer replacements (top-K by the
/// degree-discounted common-neighbor scorer, mutex post-processed), and
/// compare link prediction without attributes, with the remaining
/// attributes, and with remaining plus inferred attributes.
///
/// All three variants score the identical (train → test) candidate set.
/// The social projection does not depend on the trial, so its column has
/// zero spread; `top_k == 0` infers nothing and makes variant (iii)
/// equal variant (ii) exactly.
pub fn run_iterative_experiment(
    train: &Snapshot,
    test: &Snapshot,
    scorers: &[ScorerSpec],
    params: &IterativeParams,
) -> Result<IterativeExperiment> {
    if params.trials == 0 {
        return Err(Error::precondition("need at least one trial"));
    }
    if scorers.is_empty() {
        return Err(Error::precondition("need at least one scorer"));
    }
    let eval_labels = LabelParams {
        scope: params.scope,
        negatives: params.negatives,
        seed: derive_seed(params.seed, EVAL_LABEL_SALT),
    };
    let candidates = extract_labels(train, test, Task::SocialLink, &eval_labels)?;
    let social = train.network.project_social();

    // Variant (i) never changes across trials; score it once and carry
    // the value through every trial's series.
    let mut without: Vec<f64> = Vec::with_capacity(scorers.len());
    for spec in scorers {
        let table = score_candidates(&social, &candidates, spec)?;
        without.push(table_auc(&candidates, &table)?);
    }

    let mut remaining: Vec<Vec<f64>> = vec![Vec::new(); scorers.len()];
    let mut inferred: Vec<Vec<f64>> = vec![Vec::new(); scorers.len()];
    for t in 0..params.trials {
        let users = sample_users(
            train.network.n_social(),
            params.sample_fraction,
            derive_seed(params.seed, SAMPLE_SALT + t as u64),
        )?;
        let (stripped, _) = remove_user_attributes(&train.network, &users)?;

        let net_iii = if params.top_k == 0 || users.is_empty() {
            stripped.clone()
        } else {
            let infer_pairs: Vec<(NodeRef, NodeRef, Label)> = users
                .iter()
                .flat_map(|&u| {
                    (0..train.network.n_attributes())
                        .map(move |a| (NodeRef::social(u), NodeRef::attribute(a), Label::Neg))
                })
                .collect();
            let infer_candidates = CandidateSet {
                task: Task::AttributeLink,
                scope: Scope::AnyHop,
                pairs: infer_pairs,
            };
            let mut current = stripped.clone();
            for _ in 0..params.iterations.max(1) {
                let table =
                    score_candidates(&current, &infer_candidates, &ScorerSpec::AdamicAdar)?;
                let adjusted = mutex_postprocess(&table, &current, params.top_k)?;
                let links: Vec<(NodeRef, NodeRef)> =
                    adjusted.kept.iter().map(|&(u, a, _)| (u, a)).collect();
                current = augment_positive_links(&current, &links, 1.0)?;
            }
            current
        };

        for (i, spec) in scorers.iter().enumerate() {
            let table = score_candidates(&stripped, &candidates, spec)?;
            remaining[i].push(table_auc(&candidates, &table)?);
            let table = score_candidates(&net_iii, &candidates, spec)?;
            inferred[i].push(table_auc(&candidates, &table)?);
        }
    }

    let mut outcomes = Vec::with_capacity(scorers.len());
    for (i, spec) in scorers.iter().enumerate() {
        outcomes.push(IterativeOutcome {
            scorer: spec.to_string(),
            without_attributes: Metric::from_trials(&vec![without[i]; params.trials])?,
            with_remaining: Metric::from_trials(&remaining[i])?,
            with_inferred: Metric::from_trials(&inferred[i])?,
        });
    }

    let report = MetricsReport {
        experiment: "iterative".into(),
        train: train.label.clone(),
        validate: "-".into(),
        test: test.label.clone(),
        scope: params.scope.to_string(),
        trials: params.trials,
        seed: params.seed,
        notes: vec![
            negatives_note(&params.negatives),
            format!("sample fraction: {}", params.sample_fraction),
            format!("inferred per user: {}", params.top_k),
            format!("iterations: {}", params.iterations.max(1)),
        ],
        rows: outcomes
            .iter()
            .map(|o| ReportRow {
                scorer: o.scorer.clone(),
                cells: vec![
                    ("w/o Attri".into(), o.without_attributes.clone()),
                    ("With Attri".into(), o.with_remaining.clone()),
                    ("With Inferred Attri".into(), o.with_inferred.clone()),
                ],
            })
            .collect(),
    };
    Ok(IterativeExperiment { outcomes, report })
}
