//! Metrics, mutex post-processing, grid search, and the experiment
//! protocols built on them.
//!
//! [`metrics`] holds the two ranking metrics (AUC and unnormalized
//! precision-at-K with expected-value tie handling); [`mutex`] resolves
//! mutually exclusive predicted attribute links; [`grid`] picks scorer
//! hyperparameters on a validation pair; [`experiment`] orchestrates the
//! three end-to-end protocols (new/missing link prediction, attribute
//! inference, and attribute-augmented iterative inference); [`report`]
//! renders the aggregated results.

pub mod experiment;
pub mod grid;
pub mod metrics;
pub mod mutex;
pub mod report;

pub use experiment::{
    link_eval_candidates, run_attribute_experiment, run_iterative_experiment,
    run_link_experiment, table_auc, trial_seed, AttributeMethod, AttributeParams,
    IterativeParams, LinkParams,
};
pub use grid::{grid_search, GridPoint, GridSpec, ScorerTemplate};
pub use metrics::{auc, precision_at_k, roc_points, RankedCandidates};
pub use mutex::{augment_positive_links, mutex_postprocess, ranked_by_user, MutexAdjusted};
pub use report::{Metric, MetricsReport, ReportRow};
