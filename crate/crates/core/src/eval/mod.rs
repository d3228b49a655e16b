//! Imbalance-aware scoring: confusion matrices, balanced accuracy, macro-F1,
//! and fold aggregation into mean/std tables.

mod load;
mod report;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use load::load_predictions;
pub use report::{
    aggregate, render_table, write_metrics_csv, FoldMetrics, MetricsReport, ReportBlock,
    STD_ESTIMATOR_NOTE,
};

use crate::HealthLabel;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("label {label} is not in the class set{}", fmt_line(*.line))]
    UnknownLabel { label: String, line: Option<usize> },
    #[error("no prediction for test segment {0}")]
    MissingSegment(String),
    #[error("segment {0} is predicted more than once")]
    DuplicateSegment(String),
    #[error("segment {0} is predicted but not in the test split")]
    UnexpectedSegment(String),
    #[error("no true label for segment {0}")]
    MissingTruth(String),
    #[error("no class has any support")]
    NoSupport,
    #[error("nothing to score")]
    Empty,
    #[error("aggregation needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_line(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub segment_id: String,
    pub truth: HealthLabel,
    pub predicted: HealthLabel,
}

/// Scored rows with a fixed class order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    rows: Vec<PredictionRow>,
    class_set: Vec<HealthLabel>,
}

impl PredictionSet {
    pub fn new(rows: Vec<PredictionRow>, class_set: Vec<HealthLabel>) -> Result<Self, EvalError> {
        let mut seen = HashSet::new();
        for r in &rows {
            if !seen.insert(r.segment_id.as_str()) {
                return Err(EvalError::DuplicateSegment(r.segment_id.clone()));
            }
            for l in [r.truth, r.predicted] {
                if !class_set.contains(&l) {
                    return Err(EvalError::UnknownLabel {
                        label: l.to_string(),
                        line: None,
                    });
                }
            }
        }
        Ok(Self { rows, class_set })
    }

    pub fn rows(&self) -> &[PredictionRow] {
        &self.rows
    }

    pub fn class_set(&self) -> &[HealthLabel] {
        &self.class_set
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Row = truth, column = prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<HealthLabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Row sums: number of rows whose truth is each class.
    pub fn support(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Column sums: number of rows predicted as each class.
    pub fn predicted(&self) -> Vec<u64> {
        (0..self.classes.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn accuracy(&self) -> f64 {
        let hits: u64 = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        hits as f64 / self.total().max(1) as f64
    }
}

pub fn confusion(preds: &PredictionSet) -> Result<ConfusionMatrix, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let c = preds.class_set.len();
    let pos = |l: HealthLabel| {
        preds
            .class_set
            .iter()
            .position(|&x| x == l)
            .ok_or(EvalError::UnknownLabel {
                label: l.to_string(),
                line: None,
            })
    };
    let mut counts = vec![vec![0u64; c]; c];
    for r in &preds.rows {
        counts[pos(r.truth)?][pos(r.predicted)?] += 1;
    }
    Ok(ConfusionMatrix {
        classes: preds.class_set.clone(),
        counts,
    })
}

/// Mean recall over classes with support; unsupported classes are skipped.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let support = cm.support();
    let recalls: Vec<f64> = (0..cm.classes.len())
        .filter(|&i| support[i] > 0)
        .map(|i| cm.counts[i][i] as f64 / support[i] as f64)
        .collect();
    mean_or_no_support(&recalls)
}

/// Mean F1 over classes with support; a class with precision + recall = 0 scores 0.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let support = cm.support();
    let predicted = cm.predicted();
    let f1s: Vec<f64> = (0..cm.classes.len())
        .filter(|&i| support[i] > 0)
        .map(|i| {
            let tp = cm.counts[i][i] as f64;
            let precision = if predicted[i] > 0 {
                tp / predicted[i] as f64
            } else {
                0.0
            };
            let recall = tp / support[i] as f64;
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    mean_or_no_support(&f1s)
}

fn mean_or_no_support(v: &[f64]) -> Result<f64, EvalError> {
    if v.is_empty() {
        return Err(EvalError::NoSupport);
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}
