use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use vibforge::baseline::{
    predict, read_model, write_features, write_model, write_predictions, FeatureMatrix,
    SelectionReport,
};
use vibforge::folds::{read_split_manifest, FoldPlan};
use vibforge::pipeline::{select_on_train, train_on_split};

use super::{
    compute_features, features_or_compute, load_filtered_catalog, load_plan, par_map,
    read_features_file, round_file, rounds, split_for_round, FEATURES_FILE,
};
use crate::error::{CliError, CliResult};
use crate::record::Run;

pub fn features_cmd(run: &mut Run, filters: &[String]) -> CliResult<()> {
    let catalog = load_filtered_catalog(run, filters)?;
    let features = compute_features(run, &catalog)?;
    let mut buf = Vec::new();
    write_features(&features, &mut buf)?;
    let path = run.write(FEATURES_FILE, &buf)?;
    println!(
        "{} segments x {} features -> {}",
        features.n_rows(),
        features.n_features(),
        path.display()
    );
    Ok(())
}

/// On-disk selection: scores are strings so that `inf` survives JSON.
#[derive(Debug, Serialize, Deserialize)]
struct SelectionFile {
    k: usize,
    selected: Vec<usize>,
    selected_features: Vec<String>,
    scores: Vec<String>,
}

impl SelectionFile {
    fn new(report: &SelectionReport, features: &FeatureMatrix) -> Self {
        Self {
            k: report.k,
            selected: report.selected.clone(),
            selected_features: report
                .selected
                .iter()
                .map(|&j| features.feature_names()[j].clone())
                .collect(),
            scores: report.scores.iter().map(f64::to_string).collect(),
        }
    }

    fn into_report(self, features: &FeatureMatrix) -> CliResult<SelectionReport> {
        let bad = |m: String| CliError::data("SELECTION", m);
        if self.scores.len() != features.n_features() {
            return Err(bad(format!(
                "selection scores {} features, the feature table has {}",
                self.scores.len(),
                features.n_features()
            )));
        }
        let names = features.feature_names();
        for (&j, name) in self.selected.iter().zip(&self.selected_features) {
            if names.get(j) != Some(name) {
                return Err(bad(format!(
                    "selected feature {j} is {name:?} in the selection but not in the feature table"
                )));
            }
        }
        let scores = self
            .scores
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| bad(format!("score {s:?}: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(SelectionReport {
            scores,
            selected: self.selected,
            k: self.k,
        })
    }
}

/// ANOVA F selection on each round's training rows, written to `selection/round-<r>.json`.
pub fn select_cmd(run: &mut Run, round: Option<usize>) -> CliResult<()> {
    let k = run
        .config
        .select_k
        .ok_or_else(|| CliError::usage("select needs --select-k (or select_k in the config)"))?;
    let plan = load_plan(run)?;
    let features = features_or_compute(run)?;
    for r in rounds(&plan, round)? {
        let split = split_for_round(run, &plan, r)?;
        let report = select_on_train(&features, &split, k)?;
        let mut json = serde_json::to_vec_pretty(&SelectionFile::new(&report, &features))
            .expect("selection serializes");
        json.push(b'\n');
        let path = run.write(&round_file("selection", r, "json"), &json)?;
        println!(
            "round {r}: kept {} of {} features -> {}",
            report.selected.len(),
            features.n_features(),
            path.display()
        );
    }
    Ok(())
}

fn stored_selection(
    run: &mut Run,
    round: usize,
    features: &FeatureMatrix,
) -> CliResult<Option<SelectionReport>> {
    let path = run.out_path(&round_file("selection", round, "json"));
    if !path.exists() {
        return Ok(None);
    }
    let bytes = run.read_input(&path)?;
    let file: SelectionFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::data("SELECTION", format!("{}: {e}", path.display())))?;
    file.into_report(features).map(Some)
}

/// Trains the softmax baseline per round and writes model, trace and test predictions.
pub fn train_cmd(run: &mut Run, round: Option<usize>) -> CliResult<()> {
    let plan: FoldPlan = load_plan(run)?;
    let features = features_or_compute(run)?;
    let mut jobs = Vec::new();
    for r in rounds(&plan, round)? {
        let split = split_for_round(run, &plan, r)?;
        let selection = match stored_selection(run, r, &features)? {
            Some(s) => Some(s),
            None => match run.config.select_k {
                Some(k) => Some(select_on_train(&features, &split, k)?),
                None => None,
            },
        };
        jobs.push((split, selection));
    }
    let cfg = run.config.train.clone();
    let outcomes = par_map(run.config.jobs, &jobs, |(split, selection)| {
        Ok(train_on_split(
            &features,
            split.clone(),
            &cfg,
            selection.clone(),
        )?)
    })?;
    for o in outcomes {
        let r = o.split.round;
        let mut model = Vec::new();
        write_model(&o.model, &mut model)?;
        model.push(b'\n');
        run.write(&round_file("models", r, "json"), &model)?;
        let mut trace = serde_json::to_vec_pretty(&o.trace).expect("trace serializes");
        trace.push(b'\n');
        run.write(&round_file("traces", r, "json"), &trace)?;
        let mut preds = Vec::new();
        write_predictions(
            &o.test_ids,
            &o.model.class_labels,
            &o.predictions,
            &mut preds,
        )?;
        run.write(&round_file("predictions", r, "csv"), &preds)?;
        println!(
            "round {r}: test balanced accuracy {:.4} (best epoch {} of {})",
            o.metrics.balanced_accuracy,
            o.trace.best_epoch,
            o.trace.epochs.len()
        );
    }
    Ok(())
}

pub struct PredictArgs {
    pub model: PathBuf,
    pub features: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub out: String,
}

/// Applies a saved model to a feature table, optionally restricted to a split's test rows.
pub fn predict_cmd(run: &mut Run, args: PredictArgs) -> CliResult<()> {
    let model_bytes = run.read_input(&args.model)?;
    let model = read_model(&model_bytes[..])?;
    let mut features = match &args.features {
        Some(p) => read_features_file(run, p)?,
        None => features_or_compute(run)?,
    };
    if let Some(split_path) = &args.split {
        let bytes = run.read_input(split_path)?;
        let split = read_split_manifest(&bytes[..])?;
        features = features.select_segments(&split.test)?;
    }
    let columns = model
        .input_features
        .iter()
        .map(|name| {
            features
                .feature_names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| {
                    CliError::data(
                        "BASELINE",
                        format!("model feature {name:?} missing from the feature table"),
                    )
                })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let x = features.select_columns(&columns);
    let preds = predict(&model, x.values().view())?;
    let mut buf = Vec::new();
    write_predictions(x.segment_ids(), &model.class_labels, &preds, &mut buf)?;
    let path = run.write(&args.out, &buf)?;
    println!("{} predictions -> {}", x.n_rows(), path.display());
    Ok(())
}
