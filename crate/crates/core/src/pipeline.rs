//! Glue between the stages: signal files -> segments -> pooled spectrogram
//! features, and one cross-validation round of the baseline.

use std::collections::BTreeMap;
use std::path::Path;

use crate::baseline::{
    anova_f_scores, fit, pool_spectrogram, predict, BaselineError, FeatureMatrix, Predictions,
    SelectionReport, SoftmaxModel, TrainConfig, TrainingTrace,
};
use crate::catalog::{Catalog, RecordingMeta};
use crate::dsp::{
    segment, DatasetProfile, DspError, Segment, SegmentLength, StftParams, StftPlan, TimeSeries,
};
use crate::eval::{aggregate, EvalError, FoldMetrics, MetricsReport, PredictionRow, PredictionSet};
use crate::folds::{make_splits, FoldError, FoldPlan, SplitManifest};
use crate::matio::{read_signal_file, SignalError};
use crate::HealthLabel;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no spectrogram profile for dataset {0:?}")]
    UnknownProfile(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("{recording_id}: {source}")]
    Dsp {
        recording_id: String,
        #[source]
        source: DspError,
    },
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How segments and features are derived from signals.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSettings {
    pub segment_length: SegmentLength,
    /// Per-dataset replacements for the profile STFT parameters.
    pub stft: BTreeMap<String, StftParams>,
    pub db_epsilon: f64,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            segment_length: SegmentLength::default(),
            stft: BTreeMap::new(),
            db_epsilon: 1e-10,
        }
    }
}

impl FeatureSettings {
    pub fn stft_for(&self, dataset_id: &str) -> Result<StftParams, PipelineError> {
        match self.stft.get(dataset_id) {
            Some(&p) => Ok(p),
            None => DatasetProfile::lookup(dataset_id)
                .map(DatasetProfile::stft_params)
                .ok_or_else(|| PipelineError::UnknownProfile(dataset_id.to_string())),
        }
    }
}

pub fn load_series(rec: &RecordingMeta, data_root: &Path) -> Result<TimeSeries, PipelineError> {
    let path = Catalog::resolve_source(rec, data_root);
    Ok(read_signal_file(
        &path,
        &rec.channel_pattern,
        rec.sampling_rate,
    )?)
}

pub fn recording_segments(
    rec: &RecordingMeta,
    data_root: &Path,
    length: SegmentLength,
) -> Result<Vec<Segment>, PipelineError> {
    let series = load_series(rec, data_root)?;
    segment(&series, length, &rec.recording_id, rec.label).map_err(|source| PipelineError::Dsp {
        recording_id: rec.recording_id.clone(),
        source,
    })
}

pub type FeatureRow = (String, HealthLabel, Vec<f64>);

/// Pooled dB-spectrogram features for every segment of one recording.
pub fn recording_features(
    rec: &RecordingMeta,
    data_root: &Path,
    settings: &FeatureSettings,
) -> Result<Vec<FeatureRow>, PipelineError> {
    let dsp_err = |source| PipelineError::Dsp {
        recording_id: rec.recording_id.clone(),
        source,
    };
    let plan = StftPlan::new(settings.stft_for(&rec.dataset_id)?).map_err(dsp_err)?;
    let mut rows = Vec::new();
    for seg in recording_segments(rec, data_root, settings.segment_length)? {
        let matrix = plan.transform(&seg).map_err(dsp_err)?;
        rows.push((
            seg.segment_id,
            seg.label,
            pool_spectrogram(&matrix, settings.db_epsilon)?,
        ));
    }
    Ok(rows)
}

/// Features for every recording in canonical order.
pub fn catalog_features(
    catalog: &Catalog,
    data_root: &Path,
    settings: &FeatureSettings,
) -> Result<FeatureMatrix, PipelineError> {
    let mut rows = Vec::new();
    for rec in catalog.sorted() {
        rows.extend(recording_features(rec, data_root, settings)?);
    }
    Ok(FeatureMatrix::from_rows(rows)?)
}

/// Everything one cross-validation round produces.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub split: SplitManifest,
    pub selection: Option<SelectionReport>,
    pub model: SoftmaxModel,
    pub trace: TrainingTrace,
    /// Test segment ids, in the order of `predictions`.
    pub test_ids: Vec<String>,
    pub predictions: Predictions,
    pub scored: PredictionSet,
    pub metrics: FoldMetrics,
}

/// ANOVA F ranking computed on the training rows of `split` alone.
pub fn select_on_train(
    features: &FeatureMatrix,
    split: &SplitManifest,
    k: usize,
) -> Result<SelectionReport, PipelineError> {
    Ok(anova_f_scores(&features.select_segments(&split.train)?, k)?)
}

/// Baseline training and scoring for one round.
///
/// When `select_k` is set, features are ranked by ANOVA F on the training
/// rows alone and the top `k` are kept.
pub fn run_round(
    features: &FeatureMatrix,
    plan: &FoldPlan,
    round: usize,
    val_fraction: f64,
    seed: u64,
    cfg: &TrainConfig,
    select_k: Option<usize>,
) -> Result<RoundOutcome, PipelineError> {
    let split = make_splits(plan, round, val_fraction, seed)?;
    let selection = select_k
        .map(|k| select_on_train(features, &split, k))
        .transpose()?;
    train_on_split(features, split, cfg, selection)
}

/// Trains on the train rows of `split`, stops early on its val rows and
/// scores its test rows. `selection` restricts the feature columns.
pub fn train_on_split(
    features: &FeatureMatrix,
    split: SplitManifest,
    cfg: &TrainConfig,
    selection: Option<SelectionReport>,
) -> Result<RoundOutcome, PipelineError> {
    let mut train = features.select_segments(&split.train)?;
    let mut val = features.select_segments(&split.val)?;
    let mut test = features.select_segments(&split.test)?;
    let mut classes: Vec<HealthLabel> = [&train, &val, &test]
        .iter()
        .flat_map(|m| m.labels().iter().copied())
        .collect();
    classes.sort();
    classes.dedup();
    if let Some(report) = &selection {
        train = train.select_columns(&report.selected);
        val = val.select_columns(&report.selected);
        test = test.select_columns(&report.selected);
    }
    let (model, trace) = fit(&train, &val, &classes, cfg)?;
    let predictions = predict(&model, test.values().view())?;
    let rows = test
        .segment_ids()
        .iter()
        .zip(test.labels())
        .zip(&predictions.labels)
        .map(|((id, &truth), &predicted)| PredictionRow {
            segment_id: id.clone(),
            truth,
            predicted,
        })
        .collect();
    let scored = PredictionSet::new(rows, classes)?;
    let metrics = FoldMetrics::score(split.round, &scored)?;
    Ok(RoundOutcome {
        test_ids: test.segment_ids().to_vec(),
        split,
        selection,
        model,
        trace,
        predictions,
        scored,
        metrics,
    })
}

/// Runs every round `1..=K` and aggregates the fold metrics.
pub fn cross_validate(
    features: &FeatureMatrix,
    plan: &FoldPlan,
    val_fraction: f64,
    seed: u64,
    cfg: &TrainConfig,
    select_k: Option<usize>,
    method: &str,
) -> Result<(Vec<RoundOutcome>, MetricsReport), PipelineError> {
    let outcomes = (1..=plan.k())
        .map(|round| run_round(features, plan, round, val_fraction, seed, cfg, select_k))
        .collect::<Result<Vec<_>, _>>()?;
    let report = aggregate(method, outcomes.iter().map(|o| o.metrics.clone()).collect())?;
    Ok((outcomes, report))
}
