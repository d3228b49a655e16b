use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use vibforge::eval::{
    aggregate, load_predictions, render_table, write_metrics_csv, FoldMetrics, MetricsReport,
    ReportBlock,
};
use vibforge::folds::{DivisionKind, SegmentTable};

use super::{load_filtered_catalog, load_plan, split_for_round};
use crate::error::{CliError, CliResult};
use crate::record::Run;

/// A metrics report tagged with the fold division it was scored under.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsFile {
    pub division: DivisionKind,
    pub report: MetricsReport,
}

pub fn metrics_stem(method: &str, division: DivisionKind) -> String {
    format!("metrics/{method}-{division}")
}

/// Scores `<predictions>/round-<r>.csv` for every round of the fold plan.
pub fn evaluate_cmd(run: &mut Run, method: &str, predictions: Option<PathBuf>) -> CliResult<()> {
    if method.is_empty()
        || !method
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c))
    {
        return Err(CliError::usage(format!(
            "method name {method:?} may only hold letters, digits, '_', '.' and '-'"
        )));
    }
    let plan = load_plan(run)?;
    let catalog = load_filtered_catalog(run, &[])?;
    let table = SegmentTable::from_catalog(&catalog, run.config.segment.length())?;
    let truth: BTreeMap<String, _> = table
        .rows
        .iter()
        .map(|r| (r.segment_id.clone(), r.label))
        .collect();
    let dir = predictions.unwrap_or_else(|| run.out_path("predictions"));

    let mut per_fold = Vec::new();
    for round in 1..=plan.k() {
        let split = split_for_round(run, &plan, round)?;
        let path = dir.join(format!("round-{round}.csv"));
        let bytes = run.read_input(&path)?;
        let set = load_predictions(&bytes[..], &split, &truth)
            .map_err(|e| CliError::data("EVAL", format!("{}: {e}", path.display())))?;
        let fold = FoldMetrics::score(round, &set)?;
        println!(
            "round {round}: balanced accuracy {:.4}, macro F1 {:.4}",
            fold.balanced_accuracy, fold.macro_f1
        );
        per_fold.push(fold);
    }
    let report = aggregate(method, per_fold)?;
    let stem = metrics_stem(method, plan.rule.kind);
    let file = MetricsFile {
        division: plan.rule.kind,
        report,
    };
    let mut json = serde_json::to_vec_pretty(&file).expect("metrics serialize");
    json.push(b'\n');
    let path = run.write(&format!("{stem}.json"), &json)?;
    let mut csv = Vec::new();
    write_metrics_csv(&file.report, &mut csv)?;
    run.write(&format!("{stem}.csv"), &csv)?;
    println!(
        "{method} {}: balanced accuracy {:.4} +/- {:.4}, macro F1 {:.4} +/- {:.4} -> {}",
        plan.rule.kind,
        file.report.balanced_accuracy_mean,
        file.report.balanced_accuracy_std,
        file.report.macro_f1_mean,
        file.report.macro_f1_std,
        path.display()
    );
    Ok(())
}

/// Combines metrics files into `report.md`, one table block per division.
pub fn report_cmd(run: &mut Run, inputs: Vec<PathBuf>) -> CliResult<()> {
    let inputs = if inputs.is_empty() {
        let dir = run.out_path("metrics");
        let mut found: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| CliError::data("INPUT", format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        found.sort();
        found
    } else {
        inputs
    };
    if inputs.is_empty() {
        return Err(CliError::data(
            "INPUT",
            "no metrics files; run `vibforge evaluate` first",
        ));
    }
    let mut by_division: BTreeMap<&'static str, Vec<MetricsReport>> = BTreeMap::new();
    for path in &inputs {
        let bytes = run.read_input(path)?;
        let file: MetricsFile = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::data("EVAL", format!("{}: {e}", path.display())))?;
        by_division
            .entry(file.division.as_str())
            .or_default()
            .push(file.report);
    }
    let blocks: Vec<ReportBlock> = [DivisionKind::ByLoad, DivisionKind::BySeverity]
        .into_iter()
        .filter_map(|kind| {
            by_division
                .remove(kind.as_str())
                .map(|reports| ReportBlock {
                    title: match kind {
                        DivisionKind::ByLoad => "Division by load".into(),
                        DivisionKind::BySeverity => "Division by severity".into(),
                    },
                    reports,
                })
        })
        .collect();
    let table = render_table(&blocks);
    let path = run.write("report.md", table.as_bytes())?;
    print!("{table}");
    println!("-> {}", path.display());
    Ok(())
}
