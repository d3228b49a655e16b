use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BaselineError, FeatureMatrix};

/// Per-feature one-way ANOVA F statistics and the top-k ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// `f64::INFINITY` when classes separate perfectly (zero within-class spread).
    pub scores: Vec<f64>,
    /// Feature indices by descending score; ties go to the lower index.
    pub selected: Vec<usize>,
    pub k: usize,
}

impl SelectionReport {
    /// Ranks `scores` and keeps the best `min(k, n)` indices.
    pub fn from_scores(scores: Vec<f64>, k: usize) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        order.truncate(k.min(scores.len()));
        Self {
            scores,
            selected: order,
            k,
        }
    }
}

/// `F = (SSB / (C - 1)) / (SSW / (N - C))` per feature, with two sentinels:
/// SSW = 0 and SSB > 0 gives `+inf`; a feature with no spread at all gives 0.
pub fn anova_f_scores(x: &FeatureMatrix, k: usize) -> Result<SelectionReport, BaselineError> {
    let mut groups: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, &label) in x.labels().iter().enumerate() {
        groups.entry(label).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(BaselineError::DegenerateClasses(format!(
            "{} class(es) present",
            groups.len()
        )));
    }
    if let Some((label, rows)) = groups.iter().find(|(_, rows)| rows.len() < 2) {
        return Err(BaselineError::DegenerateClasses(format!(
            "class {label} has {} sample(s)",
            rows.len()
        )));
    }
    let n = x.n_rows() as f64;
    let c = groups.len() as f64;
    let values = x.values();
    let scores = (0..x.n_features())
        .map(|j| {
            let col = values.column(j);
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                return 0.0;
            }
            let grand = col.sum() / n;
            let mut ssb = 0.0;
            let mut ssw = 0.0;
            let mut within_constant = true;
            for rows in groups.values() {
                let m = rows.iter().map(|&i| col[i]).sum::<f64>() / rows.len() as f64;
                ssb += rows.len() as f64 * (m - grand).powi(2);
                ssw += rows.iter().map(|&i| (col[i] - m).powi(2)).sum::<f64>();
                let v0 = col[rows[0]];
                within_constant &= rows.iter().all(|&i| col[i] == v0);
            }
            if within_constant {
                return f64::INFINITY;
            }
            (ssb / (c - 1.0)) / (ssw / (n - c))
        })
        .collect();
    Ok(SelectionReport::from_scores(scores, k))
}
