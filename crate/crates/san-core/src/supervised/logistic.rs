//! L2-regularized logistic regression trained by deterministic full-batch
//! gradient descent.
//!
//! Features are standardized to zero mean and unit variance using
//! statistics frozen into the model, so decision values on new rows apply
//! the training-time scaling. The fixed step size `1 / (λ + (d+1)/4)` is
//! the reciprocal of a Lipschitz bound on the gradient: the logistic-loss
//! Hessian is at most `ZᵀZ/(4n)`, whose spectral norm over standardized
//! columns plus the all-ones bias column is at most `(d+1)/4`, and the
//! ridge term adds `λ`. Descent is therefore monotone and needs no line
//! search or early stopping, which keeps retraining byte-reproducible.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::auc;
use crate::labels::Label;

use super::{FeatureMatrix, Variant};

/// Optimizer settings for [`train`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// L2 penalty weight on the feature coefficients (never the bias).
    pub lambda: f64,
    /// Fixed number of full-batch gradient steps.
    pub epochs: usize,
    /// Recorded provenance seed; training itself is deterministic, the
    /// seed identifies upstream sampling (downsampling, splits).
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            lambda: 1e-2,
            epochs: 500,
            seed: 0,
        }
    }
}

/// A trained linear classifier together with the standardization
/// statistics and hyperparameters needed to reproduce and apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub variant: Variant,
    pub feature_names: Vec<String>,
    /// Coefficients over standardized features.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Per-feature training means subtracted before scoring.
    pub means: Vec<f64>,
    /// Per-feature training standard deviations (unit for near-constant
    /// columns) dividing centered features.
    pub stds: Vec<f64>,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Final regularized mean log-loss on the training set.
    pub loss: f64,
}

impl LinearModel {
    /// Linear decision value for one raw (unstandardized) feature row.
    /// Larger means more confidently positive; 0 is the class boundary.
    pub fn decision(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.weights.len() {
            return Err(Error::precondition(format!(
                "feature row has {} columns, model expects {}",
                raw.len(),
                self.weights.len()
            )));
        }
        let mut m = self.bias;
        for j in 0..raw.len() {
            m += self.weights[j] * (raw[j] - self.means[j]) / self.stds[j];
        }
        Ok(m)
    }

    /// Decision values for every row of a feature matrix.
    pub fn decisions(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        matrix.rows.iter().map(|row| self.decision(row)).collect()
    }
}

fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// `softplus(m) - y * m`, the per-example logistic loss, computed without
/// overflow for large |m|.
fn logloss(m: f64, y: f64) -> f64 {
    m.max(0.0) - y * m + (-m.abs()).exp().ln_1p()
}

/// Column means and standard deviations; near-constant columns get unit
/// scale so standardization never divides by (almost) zero.
fn standardize_stats(rows: &[Vec<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    for row in rows {
        for (m, &x) in means.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![0.0; d];
    for row in rows {
        for ((v, &x), &m) in vars.iter_mut().zip(row).zip(&means) {
            *v += (x - m) * (x - m);
        }
    }
    let stds = vars
        .iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s < 1e-12 {
                1.0
            } else {
                s
            }
        })
        .collect();
    (means, stds)
}

/// Fit the classifier to a labeled feature matrix.
///
/// Requires at least one example of each class and finite features.
pub fn train(matrix: &FeatureMatrix, params: &TrainParams) -> Result<LinearModel> {
    if !(params.lambda.is_finite() && params.lambda >= 0.0) {
        return Err(Error::precondition(format!(
            "regularization weight must be finite and nonnegative, got {}",
            params.lambda
        )));
    }
    let n_pos = matrix.n_pos();
    if n_pos == 0 || n_pos == matrix.len() {
        return Err(Error::precondition(format!(
            "training needs both classes, got {n_pos} positives out of {}",
            matrix.len()
        )));
    }
    let d = matrix.feature_names.len();
    for row in &matrix.rows {
        if row.len() != d || row.iter().any(|x| !x.is_finite()) {
            return Err(Error::precondition(
                "feature rows must be rectangular and finite",
            ));
        }
    }

    let (means, stds) = standardize_stats(&matrix.rows, d);
    let z: Vec<Vec<f64>> = matrix
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &x)| (x - means[j]) / stds[j])
                .collect()
        })
        .collect();
    let y: Vec<f64> = matrix
        .labels
        .iter()
        .map(|&l| if l == Label::Pos { 1.0 } else { 0.0 })
        .collect();

    let n = matrix.len() as f64;
    let step = 1.0 / (params.lambda + (d as f64 + 1.0) / 4.0);
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let mut grad = vec![0.0; d];
    for _ in 0..params.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_bias = 0.0;
        for (zi, &yi) in z.iter().zip(&y) {
            let mut m = bias;
            for (wj, &xj) in weights.iter().zip(zi) {
                m += wj * xj;
            }
            let r = sigmoid(m) - yi;
            for (g, &xj) in grad.iter_mut().zip(zi) {
                *g += r * xj;
            }
            grad_bias += r;
        }
        for (wj, &gj) in weights.iter_mut().zip(&grad) {
            *wj -= step * (gj / n + params.lambda * *wj);
        }
        bias -= step * grad_bias / n;
    }

    let mut loss = 0.0;
    for (zi, &yi) in z.iter().zip(&y) {
        let mut m = bias;
        for (wj, &xj) in weights.iter().zip(zi) {
            m += wj * xj;
        }
        loss += logloss(m, yi);
    }
    loss = loss / n
        + params.lambda / 2.0 * weights.iter().map(|w| w * w).sum::<f64>();

    Ok(LinearModel {
        variant: matrix.variant,
        feature_names: matrix.feature_names.clone(),
        weights,
        bias,
        means,
        stds,
        lambda: params.lambda,
        epochs: params.epochs,
        seed: params.seed,
        loss,
    })
}

fn subset(matrix: &FeatureMatrix, keep: &[usize]) -> FeatureMatrix {
    FeatureMatrix {
        variant: matrix.variant,
        feature_names: matrix.feature_names.clone(),
        pairs: keep.iter().map(|&i| matrix.pairs[i]).collect(),
        rows: keep.iter().map(|&i| matrix.rows[i].clone()).collect(),
        labels: keep.iter().map(|&i| matrix.labels[i]).collect(),
    }
}

/// Choose the regularization weight by held-out ranking quality, then
/// refit on all examples.
///
/// The examples are split in half per class with a seeded shuffle (the
/// training side takes the larger half on odd counts). Candidate weights
/// are tried from strongest to weakest regularization and scored by AUC
/// of decision values on the held-out side; the strict maximum wins, so
/// ties keep the stronger penalty.
pub fn select_l2(
    matrix: &FeatureMatrix,
    lambdas: &[f64],
    epochs: usize,
    seed: u64,
) -> Result<LinearModel> {
    if lambdas.is_empty() {
        return Err(Error::precondition("need at least one candidate weight"));
    }
    let mut grid: Vec<f64> = lambdas.to_vec();
    if grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::precondition(
            "regularization weights must be finite and nonnegative",
        ));
    }
    grid.sort_unstable_by(|a, b| b.total_cmp(a));
    grid.dedup();

    let pos: Vec<usize> = (0..matrix.len())
        .filter(|&i| matrix.labels[i] == Label::Pos)
        .collect();
    let neg: Vec<usize> = (0..matrix.len())
        .filter(|&i| matrix.labels[i] == Label::Neg)
        .collect();
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::precondition(format!(
            "weight selection needs two examples per class, got {} positive and {} negative",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fit_idx = Vec::new();
    let mut val_idx = Vec::new();
    for class in [pos, neg] {
        let mut shuffled = class;
        shuffled.shuffle(&mut rng);
        let cut = shuffled.len().div_ceil(2);
        fit_idx.extend_from_slice(&shuffled[..cut]);
        val_idx.extend_from_slice(&shuffled[cut..]);
    }
    fit_idx.sort_unstable();
    val_idx.sort_unstable();
    let fit_half = subset(matrix, &fit_idx);
    let val_half = subset(matrix, &val_idx);

    let mut best: Option<(f64, f64)> = None; // (auc, lambda)
    for &lambda in &grid {
        let model = train(
            &fit_half,
            &TrainParams {
                lambda,
                epochs,
                seed,
            },
        )?;
        let scores = model.decisions(&val_half)?;
        let (pos_scores, neg_scores): (Vec<f64>, Vec<f64>) = {
            let mut p = Vec::new();
            let mut n = Vec::new();
            for (s, &l) in scores.iter().zip(&val_half.labels) {
                if l == Label::Pos {
                    p.push(*s);
                } else {
                    n.push(*s);
                }
            }
            (p, n)
        };
        let score = auc(&pos_scores, &neg_scores)?;
        log::debug!("lambda {lambda:e}: held-out auc {score:.4}");
        if best.map_or(true, |(b, _)| score > b) {
            best = Some((score, lambda));
        }
    }
    let (_, lambda) = best.expect("non-empty grid");
    train(
        matrix,
        &TrainParams {
            lambda,
            epochs,
            seed,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRef;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn matrix_from(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> FeatureMatrix {
        let d = rows[0].len();
        FeatureMatrix {
            variant: Variant::SlpI,
            feature_names: (0..d).map(|j| format!("f{j}")).collect(),
            pairs: (0..rows.len())
                .map(|i| (NodeRef::social(0), NodeRef::social(i + 1)))
                .collect(),
            rows,
            labels,
        }
    }

    fn separable(n_per_class: usize, jitter_seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(jitter_seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..(2 * n_per_class) {
            let pos = i % 2 == 0;
            let center = if pos { 2.0 } else { -2.0 };
            rows.push(vec![
                center + rng.random::<f64>() * 0.5,
                rng.random::<f64>(), // uninformative
            ]);
            labels.push(if pos { Label::Pos } else { Label::Neg });
        }
        matrix_from(rows, labels)
    }

    fn ranking_auc(model: &LinearModel, matrix: &FeatureMatrix) -> f64 {
        let scores = model.decisions(matrix).unwrap();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (s, &l) in scores.iter().zip(&matrix.labels) {
            if l == Label::Pos {
                pos.push(*s)
            } else {
                neg.push(*s)
            }
        }
        auc(&pos, &neg).unwrap()
    }

    #[test]
    fn separable_data_reaches_perfect_training_auc() {
        let matrix = separable(20, 3);
        let model = train(&matrix, &TrainParams::default()).unwrap();
        assert_eq!(ranking_auc(&model, &matrix), 1.0);
        // Optimization made progress from the all-zero start, whose
        // regularized loss is ln 2.
        assert!(model.loss < std::f64::consts::LN_2);
        assert!(model.weights[0] > 0.0);
    }

    #[test]
    fn symmetric_two_point_problem_bisects() {
        // One positive and one negative example. After standardization the
        // two rows are mirror images, gradients on the bias cancel up to
        // rounding, and the decision boundary passes through the midpoint.
        let matrix = matrix_from(
            vec![vec![3.0, 1.0], vec![1.0, 5.0]],
            vec![Label::Pos, Label::Neg],
        );
        let model = train(&matrix, &TrainParams::default()).unwrap();
        assert_abs_diff_eq!(model.bias, 0.0, epsilon = 1e-12);
        let midpoint = vec![2.0, 3.0];
        assert_abs_diff_eq!(model.decision(&midpoint).unwrap(), 0.0, epsilon = 1e-12);
        assert!(model.decision(&[3.0, 1.0]).unwrap() > 0.0);
        assert!(model.decision(&[1.0, 5.0]).unwrap() < 0.0);
    }

    #[test]
    fn stored_statistics_standardize_training_columns() {
        let matrix = separable(10, 5);
        let model = train(&matrix, &TrainParams::default()).unwrap();
        for j in 0..2 {
            let z: Vec<f64> = matrix
                .rows
                .iter()
                .map(|r| (r[j] - model.means[j]) / model.stds[j])
                .collect();
            let mean = z.iter().sum::<f64>() / z.len() as f64;
            let var = z.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / z.len() as f64;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(var, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_column_is_left_at_unit_scale() {
        let matrix = matrix_from(
            vec![vec![1.0, 7.0], vec![-1.0, 7.0], vec![0.5, 7.0], vec![-0.5, 7.0]],
            vec![Label::Pos, Label::Neg, Label::Pos, Label::Neg],
        );
        let model = train(&matrix, &TrainParams::default()).unwrap();
        assert_eq!(model.stds[1], 1.0);
        assert!(model.decision(&[0.0, 7.0]).unwrap().is_finite());
    }

    #[test]
    fn flipping_labels_reverses_the_ranking() {
        let matrix = separable(15, 7);
        let mut flipped = matrix.clone();
        for l in &mut flipped.labels {
            *l = if *l == Label::Pos { Label::Neg } else { Label::Pos };
        }
        let model = train(&matrix, &TrainParams::default()).unwrap();
        let anti = train(&flipped, &TrainParams::default()).unwrap();
        let scores = model.decisions(&matrix).unwrap();
        let anti_scores = anti.decisions(&matrix).unwrap();
        let order = |s: &[f64]| {
            let mut idx: Vec<usize> = (0..s.len()).collect();
            idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
            idx
        };
        let mut reversed = order(&anti_scores);
        reversed.reverse();
        assert_eq!(order(&scores), reversed);
    }

    #[test]
    fn rescaling_a_raw_column_preserves_the_ranking() {
        let matrix = separable(12, 11);
        let mut scaled = matrix.clone();
        for row in &mut scaled.rows {
            row[0] *= 1000.0;
        }
        let model = train(&matrix, &TrainParams::default()).unwrap();
        let scaled_model = train(&scaled, &TrainParams::default()).unwrap();
        let order = |model: &LinearModel, m: &FeatureMatrix| {
            let s = model.decisions(m).unwrap();
            let mut idx: Vec<usize> = (0..s.len()).collect();
            idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
            idx
        };
        assert_eq!(order(&model, &matrix), order(&scaled_model, &scaled));
    }

    #[test]
    fn training_is_deterministic() {
        let matrix = separable(10, 13);
        let a = train(&matrix, &TrainParams::default()).unwrap();
        let b = train(&matrix, &TrainParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let one_class = matrix_from(vec![vec![1.0], vec![2.0]], vec![Label::Pos, Label::Pos]);
        assert!(train(&one_class, &TrainParams::default()).is_err());
        let matrix = separable(5, 1);
        let bad = TrainParams { lambda: -1.0, ..TrainParams::default() };
        assert!(train(&matrix, &bad).is_err());
        let model = train(&matrix, &TrainParams::default()).unwrap();
        assert!(model.decision(&[1.0]).is_err()); // wrong width
        let mut nan = matrix.clone();
        nan.rows[0][0] = f64::NAN;
        assert!(train(&nan, &TrainParams::default()).is_err());
    }

    #[test]
    fn weight_selection_breaks_ties_toward_stronger_regularization() {
        // Cleanly separable data gives held-out AUC 1.0 for every candidate,
        // so the strict maximum keeps the first (largest) weight regardless
        // of the order the grid is supplied in.
        let matrix = separable(10, 17);
        let model = select_l2(&matrix, &[1e-4, 1.0, 1e-2], 300, 5).unwrap();
        assert_eq!(model.lambda, 1.0);
        let same = select_l2(&matrix, &[1.0, 1e-2, 1e-4], 300, 5).unwrap();
        assert_eq!(model, same);
    }

    #[test]
    fn weight_selection_refits_on_all_examples() {
        let matrix = separable(10, 19);
        let selected = select_l2(&matrix, &[1e-2], 400, 9).unwrap();
        let direct = train(
            &matrix,
            &TrainParams { lambda: 1e-2, epochs: 400, seed: 9 },
        )
        .unwrap();
        assert_eq!(selected, direct);
    }

    #[test]
    fn weight_selection_needs_two_examples_per_class() {
        let matrix = matrix_from(
            vec![vec![1.0], vec![-1.0], vec![-2.0]],
            vec![Label::Pos, Label::Neg, Label::Neg],
        );
        assert!(select_l2(&matrix, &[1e-2], 100, 0).is_err());
        assert!(select_l2(&separable(5, 1), &[], 100, 0).is_err());
    }

    #[test]
    fn model_serializes_losslessly() {
        let matrix = separable(6, 23);
        let model = train(&matrix, &TrainParams::default()).unwrap();
        let json = serde_json::to_string_pretty(&model).unwrap();
        let back: LinearModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
        assert!(json.contains("\"variant\": \"slp_i\""));
    }
}
