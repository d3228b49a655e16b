use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{BaselineError, FeatureMatrix};
use crate::folds::SplitManifest;
use crate::rng::SeededRng;
use crate::HealthLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Coefficient of `(λ/2)·‖W‖²`; the bias column is not penalized.
    pub l2_lambda: f64,
    pub early_stop_patience: usize,
    pub lr_reduce_factor: f64,
    pub lr_reduce_patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            max_epochs: 200,
            batch_size: 32,
            l2_lambda: 1e-3,
            early_stop_patience: 10,
            lr_reduce_factor: 0.5,
            lr_reduce_patience: 4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |m: String| Err(BaselineError::InvalidConfig(m));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.max_epochs == 0 || self.batch_size == 0 {
            return bad("max_epochs and batch_size must be positive".into());
        }
        if self.early_stop_patience == 0 || self.lr_reduce_patience == 0 {
            return bad("patience values must be positive".into());
        }
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= 0.0) {
            return bad(format!(
                "l2_lambda must be non-negative, got {}",
                self.l2_lambda
            ));
        }
        if !(self.lr_reduce_factor > 0.0 && self.lr_reduce_factor < 1.0) {
            return bad(format!(
                "lr_reduce_factor must lie in (0, 1), got {}",
                self.lr_reduce_factor
            ));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        crate::hashing::sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

/// Training-set feature statistics. Constant columns are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    /// Indices of the input columns kept, ascending.
    pub kept: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut kept = Vec::new();
        let mut mean = Vec::new();
        let mut std = Vec::new();
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                continue;
            }
            let m = col.sum() / n;
            let sd = (col.iter().map(|&v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            if sd <= 1e-12 * (1.0 + m.abs()) {
                continue;
            }
            kept.push(j);
            mean.push(m);
            std.push(sd);
        }
        Self { kept, mean, std }
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.select(Axis(1), &self.kept);
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, sd) = (self.mean[j], self.std[j]);
            col.mapv_inplace(|v| (v - m) / sd);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    pub class_labels: Vec<HealthLabel>,
    /// `C x (d + 1)`, bias in the last column; `d` counts kept features only.
    pub weights: Array2<f64>,
    pub standardizer: Standardizer,
    /// Names of the input columns the model expects, in order.
    pub input_features: Vec<String>,
    pub config_hash: String,
}

impl SoftmaxModel {
    pub fn n_inputs(&self) -> usize {
        self.input_features.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose weights were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Row-wise softmax of `x W[:, :d]^T + b`.
fn probabilities(w: &Array2<f64>, x: ArrayView2<f64>) -> Array2<f64> {
    let d = x.ncols();
    let mut logits = x.dot(&w.slice(s![.., ..d]).t());
    let bias = w.column(d);
    for mut row in logits.axis_iter_mut(Axis(0)) {
        row += &bias;
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    logits
}

/// Mean cross-entropy plus `(λ/2)·‖W[:, :d]‖²`, and its gradient with respect to `w`.
///
/// `x` is `n x d` (already standardized), `y` holds class indices into the rows of `w`.
pub fn loss_and_gradient(
    w: &Array2<f64>,
    x: ArrayView2<f64>,
    y: &[usize],
    lambda: f64,
) -> (f64, Array2<f64>) {
    let n = x.nrows();
    let d = x.ncols();
    assert_eq!(w.ncols(), d + 1, "weights must be C x (d + 1)");
    assert_eq!(y.len(), n);
    let mut p = probabilities(w, x);
    let mut ce = 0.0;
    for (i, &c) in y.iter().enumerate() {
        ce -= p[[i, c]].max(f64::MIN_POSITIVE).ln();
        p[[i, c]] -= 1.0;
    }
    let inv_n = 1.0 / n as f64;
    let penalty = 0.5 * lambda * w.slice(s![.., ..d]).iter().map(|v| v * v).sum::<f64>();
    let mut grad = Array2::zeros(w.raw_dim());
    grad.slice_mut(s![.., ..d]).assign(&(p.t().dot(&x) * inv_n));
    grad.column_mut(d).assign(&(p.sum_axis(Axis(0)) * inv_n));
    grad.slice_mut(s![.., ..d])
        .scaled_add(lambda, &w.slice(s![.., ..d]));
    (ce * inv_n + penalty, grad)
}

fn class_indices(
    labels: &[HealthLabel],
    classes: &[HealthLabel],
) -> Result<Vec<usize>, BaselineError> {
    labels
        .iter()
        .map(|l| {
            classes
                .iter()
                .position(|c| c == l)
                .ok_or(BaselineError::UnknownLabel(*l))
        })
        .collect()
}

/// Trains on the rows of `features` named by the split's train and val lists.
/// The class set is every label present anywhere in `features`, sorted.
pub fn train_softmax(
    features: &FeatureMatrix,
    split: &SplitManifest,
    cfg: &TrainConfig,
) -> Result<(SoftmaxModel, TrainingTrace), BaselineError> {
    let mut classes: Vec<HealthLabel> = features.labels().to_vec();
    classes.sort();
    classes.dedup();
    let train = features.select_segments(&split.train)?;
    let val = features.select_segments(&split.val)?;
    fit(&train, &val, &classes, cfg)
}

/// Mini-batch gradient descent from zero weights.
///
/// Validation loss drives both schedules: after `lr_reduce_patience` epochs
/// without a new best the rate is multiplied by `lr_reduce_factor`, and after
/// `early_stop_patience` such epochs training stops. The best-validation
/// weights are returned.
pub fn fit(
    train: &FeatureMatrix,
    val: &FeatureMatrix,
    classes: &[HealthLabel],
    cfg: &TrainConfig,
) -> Result<(SoftmaxModel, TrainingTrace), BaselineError> {
    cfg.validate()?;
    if train.n_rows() == 0 {
        return Err(BaselineError::EmptySplit("train"));
    }
    if val.n_rows() == 0 {
        return Err(BaselineError::EmptySplit("val"));
    }
    if val.n_features() != train.n_features() {
        return Err(BaselineError::DimensionMismatch {
            expected: train.n_features(),
            found: val.n_features(),
        });
    }
    let y_train = class_indices(train.labels(), classes)?;
    let y_val = class_indices(val.labels(), classes)?;
    let standardizer = Standardizer::fit(train.values().view());
    let x_train = standardizer.apply(train.values().view());
    let x_val = standardizer.apply(val.values().view());

    let d = x_train.ncols();
    let mut w = Array2::<f64>::zeros((classes.len(), d + 1));
    let mut best_w = w.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut lr = cfg.learning_rate;
    let mut since_best = 0;
    let mut since_reduce = 0;
    let mut stopped_early = false;
    let mut epochs = Vec::new();
    let mut rng = SeededRng::derive(cfg.seed, "baseline/batches");
    let mut order: Vec<usize> = (0..x_train.nrows()).collect();

    for epoch in 1..=cfg.max_epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            let xb = x_train.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y_train[i]).collect();
            let (_, grad) = loss_and_gradient(&w, xb.view(), &yb, cfg.l2_lambda);
            w.scaled_add(-lr, &grad);
        }
        let (train_loss, _) = loss_and_gradient(&w, x_train.view(), &y_train, cfg.l2_lambda);
        let (val_loss, _) = loss_and_gradient(&w, x_val.view(), &y_val, cfg.l2_lambda);
        if !(train_loss.is_finite() && val_loss.is_finite()) || w.iter().any(|v| !v.is_finite()) {
            return Err(BaselineError::NonFiniteLoss { epoch });
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            learning_rate: lr,
        });
        if val_loss < best_loss {
            best_loss = val_loss;
            best_w.assign(&w);
            best_epoch = epoch;
            since_best = 0;
            since_reduce = 0;
        } else {
            since_best += 1;
            since_reduce += 1;
            if since_reduce >= cfg.lr_reduce_patience {
                lr *= cfg.lr_reduce_factor;
                since_reduce = 0;
            }
            if since_best >= cfg.early_stop_patience {
                stopped_early = true;
                break;
            }
        }
    }
    let model = SoftmaxModel {
        class_labels: classes.to_vec(),
        weights: best_w,
        standardizer,
        input_features: train.feature_names().to_vec(),
        config_hash: cfg.hash(),
    };
    let trace = TrainingTrace {
        epochs,
        best_epoch,
        stopped_early,
    };
    Ok((model, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<HealthLabel>,
    /// One row per input row, columns in the model's class order.
    pub probabilities: Array2<f64>,
}

/// Class probabilities and argmax labels; ties go to the lower class index.
pub fn predict(model: &SoftmaxModel, x: ArrayView2<f64>) -> Result<Predictions, BaselineError> {
    if x.ncols() != model.n_inputs() {
        return Err(BaselineError::DimensionMismatch {
            expected: model.n_inputs(),
            found: x.ncols(),
        });
    }
    let z = model.standardizer.apply(x);
    let probabilities = probabilities(&model.weights, z.view());
    let labels = probabilities
        .axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (c, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = c;
                }
            }
            model.class_labels[best]
        })
        .collect();
    Ok(Predictions {
        labels,
        probabilities,
    })
}

/// Fraction of rows whose argmax label equals `truth`.
pub fn accuracy(pred: &Predictions, truth: &[HealthLabel]) -> f64 {
    let hits = pred
        .labels
        .iter()
        .zip(truth)
        .filter(|(a, b)| a == b)
        .count();
    hits as f64 / truth.len().max(1) as f64
}
