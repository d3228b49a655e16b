use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{balanced_accuracy, confusion, macro_f1, EvalError, PredictionSet};
use crate::HealthLabel;

pub const STD_ESTIMATOR_NOTE: &str =
    "Std is the sample standard deviation across folds (denominator K-1).";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub balanced_accuracy: f64,
    pub macro_f1: f64,
    pub support: Vec<(HealthLabel, u64)>,
}

impl FoldMetrics {
    pub fn score(fold: usize, preds: &PredictionSet) -> Result<Self, EvalError> {
        let cm = confusion(preds)?;
        let support = cm.classes.iter().copied().zip(cm.support()).collect();
        Ok(Self {
            fold,
            balanced_accuracy: balanced_accuracy(&cm)?,
            macro_f1: macro_f1(&cm)?,
            support,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub per_fold: Vec<FoldMetrics>,
    pub balanced_accuracy_mean: f64,
    pub balanced_accuracy_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
}

/// Mean and sample standard deviation (K - 1 denominator) of each metric.
pub fn aggregate(method: &str, per_fold: Vec<FoldMetrics>) -> Result<MetricsReport, EvalError> {
    if per_fold.len() < 2 {
        return Err(EvalError::TooFewFolds(per_fold.len()));
    }
    let ba: Vec<f64> = per_fold.iter().map(|f| f.balanced_accuracy).collect();
    let f1: Vec<f64> = per_fold.iter().map(|f| f.macro_f1).collect();
    let (ba_mean, ba_std) = mean_std(&ba);
    let (f1_mean, f1_std) = mean_std(&f1);
    Ok(MetricsReport {
        method: method.to_string(),
        per_fold,
        balanced_accuracy_mean: ba_mean,
        balanced_accuracy_std: ba_std,
        macro_f1_mean: f1_mean,
        macro_f1_std: f1_std,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // Clamp so rounding never puts the mean outside the observed range.
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean.clamp(lo, hi), var.sqrt())
}

/// One division's rows of the results table (e.g. all methods under the load division).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBlock {
    pub title: String,
    pub reports: Vec<MetricsReport>,
}

/// Methods x {balanced accuracy, F1-macro} x {mean, std} as a Markdown
/// table per block, percentages to 2 decimals, best mean per block in bold.
pub fn render_table(blocks: &[ReportBlock]) -> String {
    let mut out = String::new();
    for block in blocks {
        let best_ba = best(block, |r| r.balanced_accuracy_mean);
        let best_f1 = best(block, |r| r.macro_f1_mean);
        writeln!(out, "### {}", block.title).unwrap();
        writeln!(out).unwrap();
        writeln!(
            out,
            "| Method | Balanced Accuracy Mean (%) | Balanced Accuracy Std (%) | F1-Macro Mean (%) | F1-Macro Std (%) |"
        )
        .unwrap();
        writeln!(out, "|---|---:|---:|---:|---:|").unwrap();
        for r in &block.reports {
            let cell = |v: f64, bold: bool| {
                let s = pct(v);
                if bold {
                    format!("**{s}**")
                } else {
                    s
                }
            };
            writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                r.method,
                cell(
                    r.balanced_accuracy_mean,
                    pct(r.balanced_accuracy_mean) == best_ba
                ),
                pct(r.balanced_accuracy_std),
                cell(r.macro_f1_mean, pct(r.macro_f1_mean) == best_f1),
                pct(r.macro_f1_std),
            )
            .unwrap();
        }
        writeln!(out).unwrap();
    }
    writeln!(out, "{STD_ESTIMATOR_NOTE}").unwrap();
    out
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn best(block: &ReportBlock, metric: impl Fn(&MetricsReport) -> f64) -> String {
    let max = block
        .reports
        .iter()
        .map(&metric)
        .fold(f64::NEG_INFINITY, f64::max);
    pct(max)
}

/// Per-fold rows followed by `mean` and `std` rows.
pub fn write_metrics_csv(report: &MetricsReport, w: impl Write) -> Result<(), EvalError> {
    let classes: Vec<HealthLabel> = report
        .per_fold
        .first()
        .map(|f| f.support.iter().map(|(c, _)| *c).collect())
        .unwrap_or_default();
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec![
        "method".to_string(),
        "fold".to_string(),
        "balanced_accuracy".to_string(),
        "macro_f1".to_string(),
    ];
    header.extend(classes.iter().map(|c| format!("support_{c}")));
    csv.write_record(&header)?;
    for f in &report.per_fold {
        let mut rec = vec![
            report.method.clone(),
            f.fold.to_string(),
            f.balanced_accuracy.to_string(),
            f.macro_f1.to_string(),
        ];
        for c in &classes {
            let n = f
                .support
                .iter()
                .find(|(l, _)| l == c)
                .map(|(_, n)| *n)
                .unwrap_or(0);
            rec.push(n.to_string());
        }
        csv.write_record(&rec)?;
    }
    let blank = vec![String::new(); classes.len()];
    for (name, ba, f1) in [
        ("mean", report.balanced_accuracy_mean, report.macro_f1_mean),
        ("std", report.balanced_accuracy_std, report.macro_f1_std),
    ] {
        let mut rec = vec![
            report.method.clone(),
            name.to_string(),
            ba.to_string(),
            f1.to_string(),
        ];
        rec.extend(blank.iter().cloned());
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn folds(values: &[f64]) -> Vec<FoldMetrics> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| FoldMetrics {
                fold: i + 1,
                balanced_accuracy: v,
                macro_f1: v,
                support: vec![(HealthLabel::H, 10)],
            })
            .collect()
    }

    #[test]
    fn worked_aggregate() {
        let r = aggregate("m", folds(&[0.90, 1.00, 0.95, 0.95])).unwrap();
        assert!((r.balanced_accuracy_mean - 0.95).abs() < 1e-12);
        assert!((r.balanced_accuracy_std - 0.040825).abs() < 1e-6);
    }

    #[test]
    fn identical_folds_have_zero_std() {
        let r = aggregate("m", folds(&[0.8; 4])).unwrap();
        assert_eq!(r.balanced_accuracy_std, 0.0);
        assert_eq!(r.balanced_accuracy_mean, 0.8);
    }

    #[test]
    fn one_fold_is_rejected() {
        assert!(matches!(
            aggregate("m", folds(&[0.5])),
            Err(EvalError::TooFewFolds(1))
        ));
    }

    #[test]
    fn table_bolds_best_mean() {
        let a = aggregate("Alpha", folds(&[0.90, 1.00, 0.95, 0.95])).unwrap();
        let b = aggregate("Beta", folds(&[0.5, 0.6])).unwrap();
        let text = render_table(&[ReportBlock {
            title: "Load division".into(),
            reports: vec![a, b],
        }]);
        assert!(text.contains("| Alpha | **95.00** | 4.08 | **95.00** | 4.08 |"));
        assert!(text.contains("| Beta | 55.00 | 7.07 | 55.00 | 7.07 |"));
        assert!(text.trim_end().ends_with(STD_ESTIMATOR_NOTE));
    }

    #[test]
    fn csv_has_mean_and_std_rows() {
        let r = aggregate("m", folds(&[0.5, 1.0])).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("method,fold,balanced_accuracy,macro_f1,support_H\nm,1,0.5,0.5,10\n")
        );
        assert!(text.contains("\nm,mean,0.75,0.75,\n"));
    }
}
