//! Classical baseline: tile-pooled dB spectrogram features, ANOVA F-test
//! feature ranking, and a softmax-regression classifier.

mod io;
mod select;
mod softmax;

use ndarray::{Array2, Axis};

pub use io::{
    read_features, read_model, write_features, write_model, write_predictions, ModelFile,
    PREDICTION_FIXED_COLUMNS,
};
pub use select::{anova_f_scores, SelectionReport};
pub use softmax::{
    accuracy, fit, loss_and_gradient, predict, train_softmax, EpochRecord, Predictions,
    SoftmaxModel, Standardizer, TrainConfig, TrainingTrace,
};

use crate::dsp::SpectrogramMatrix;
use crate::spectro::to_db;
use crate::HealthLabel;

/// Frequency x time tiles used by [`pool_spectrogram`].
pub const POOL_GRID: (usize, usize) = (16, 32);

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("matrix of {rows}x{cols} is smaller than the {grid_rows}x{grid_cols} pooling grid")]
    MatrixTooSmall {
        rows: usize,
        cols: usize,
        grid_rows: usize,
        grid_cols: usize,
    },
    #[error("feature matrix contains a non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("feature matrix shape mismatch: {0}")]
    Shape(String),
    #[error("ANOVA needs at least 2 classes with at least 2 samples each: {0}")]
    DegenerateClasses(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("label {0} is not in the model's class set")]
    UnknownLabel(HealthLabel),
    #[error("segment {0} has no feature row")]
    UnknownSegment(String),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Labeled feature rows, one per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    feature_names: Vec<String>,
    segment_ids: Vec<String>,
    labels: Vec<HealthLabel>,
}

impl FeatureMatrix {
    pub fn new(
        values: Array2<f64>,
        feature_names: Vec<String>,
        segment_ids: Vec<String>,
        labels: Vec<HealthLabel>,
    ) -> Result<Self, BaselineError> {
        let (n, d) = values.dim();
        if segment_ids.len() != n || labels.len() != n {
            return Err(BaselineError::Shape(format!(
                "{n} rows but {} segment ids and {} labels",
                segment_ids.len(),
                labels.len()
            )));
        }
        if feature_names.len() != d {
            return Err(BaselineError::Shape(format!(
                "{d} columns but {} names",
                feature_names.len()
            )));
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(BaselineError::NonFinite { row, col });
        }
        Ok(Self {
            values,
            feature_names,
            segment_ids,
            labels,
        })
    }

    /// Stacks pooled rows; names are `tile_<freq>_<time>` for the default grid or `f<j>` otherwise.
    pub fn from_rows(rows: Vec<(String, HealthLabel, Vec<f64>)>) -> Result<Self, BaselineError> {
        let d = rows.first().map(|r| r.2.len()).unwrap_or(0);
        let mut values = Array2::zeros((rows.len(), d));
        let mut ids = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for (i, (id, label, row)) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(BaselineError::Shape(format!(
                    "row {id} has {} values, expected {d}",
                    row.len()
                )));
            }
            values.row_mut(i).assign(&ndarray::ArrayView1::from(&row));
            ids.push(id);
            labels.push(label);
        }
        let names = if d == POOL_GRID.0 * POOL_GRID.1 {
            (0..d)
                .map(|j| format!("tile_{}_{}", j / POOL_GRID.1, j % POOL_GRID.1))
                .collect()
        } else {
            (0..d).map(|j| format!("f{j}")).collect()
        };
        Self::new(values, names, ids, labels)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn segment_ids(&self) -> &[String] {
        &self.segment_ids
    }

    pub fn labels(&self) -> &[HealthLabel] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    /// The given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            values: self.values.select(Axis(1), columns),
            feature_names: columns
                .iter()
                .map(|&j| self.feature_names[j].clone())
                .collect(),
            segment_ids: self.segment_ids.clone(),
            labels: self.labels.clone(),
        }
    }

    /// The rows for `ids`, in that order.
    pub fn select_segments<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self, BaselineError> {
        let index: std::collections::HashMap<&str, usize> = self
            .segment_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let rows = ids
            .iter()
            .map(|id| {
                index
                    .get(id.as_ref())
                    .copied()
                    .ok_or_else(|| BaselineError::UnknownSegment(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            values: self.values.select(Axis(0), &rows),
            feature_names: self.feature_names.clone(),
            segment_ids: rows.iter().map(|&i| self.segment_ids[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}

/// Tile means of a grid split into `grid.0` x `grid.1` near-equal tiles,
/// row-major. Tile `i` along an axis of length `n` covers
/// `floor(i n / g) .. floor((i + 1) n / g)`.
pub fn pool_grid(values: &Array2<f64>, grid: (usize, usize)) -> Result<Vec<f64>, BaselineError> {
    let (rows, cols) = values.dim();
    if rows < grid.0 || cols < grid.1 || grid.0 == 0 || grid.1 == 0 {
        return Err(BaselineError::MatrixTooSmall {
            rows,
            cols,
            grid_rows: grid.0,
            grid_cols: grid.1,
        });
    }
    let edges = |n: usize, g: usize| -> Vec<usize> { (0..=g).map(|i| i * n / g).collect() };
    let re = edges(rows, grid.0);
    let ce = edges(cols, grid.1);
    let mut out = Vec::with_capacity(grid.0 * grid.1);
    for i in 0..grid.0 {
        for j in 0..grid.1 {
            let tile = values.slice(ndarray::s![re[i]..re[i + 1], ce[j]..ce[j + 1]]);
            out.push(tile.sum() / tile.len() as f64);
        }
    }
    Ok(out)
}

/// dB-converts a magnitude matrix and pools it on [`POOL_GRID`]: 512 features.
pub fn pool_spectrogram(
    matrix: &SpectrogramMatrix,
    db_epsilon: f64,
) -> Result<Vec<f64>, BaselineError> {
    pool_grid(&to_db(&matrix.values, db_epsilon), POOL_GRID)
}
