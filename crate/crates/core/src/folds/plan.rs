use std::collections::BTreeMap;

use super::{DivisionKind, DivisionRule, FoldError, FoldPlan, SegmentRecord, SegmentTable};

/// Builds a plan of the requested kind.
pub fn plan(table: &SegmentTable, kind: DivisionKind) -> Result<FoldPlan, FoldError> {
    match kind {
        DivisionKind::ByLoad => plan_by_load(table),
        DivisionKind::BySeverity => plan_by_severity(table),
    }
}

/// One fold per distinct load, loads ascending. Only benchmark labels (H/I/O/B) take part.
pub fn plan_by_load(table: &SegmentTable) -> Result<FoldPlan, FoldError> {
    let rows = benchmark_rows(table)?;
    let loads = load_mapping(&rows)?;
    let k = loads.len();
    if k < 2 {
        return Err(FoldError::TooFewFolds {
            kind: DivisionKind::ByLoad,
            k,
        });
    }
    let assignment = rows
        .iter()
        .map(|r| {
            (
                r.segment_id.clone(),
                rank(&loads, r.load.expect("checked by load_mapping")),
            )
        })
        .collect();
    Ok(FoldPlan {
        rule: DivisionRule {
            kind: DivisionKind::ByLoad,
            k,
        },
        assignment,
        fold_values: loads,
        catalog_hash: table.catalog_hash.clone(),
    })
}

/// One fold per distinct fault severity, ascending. Healthy segments have no
/// severity and go to the fold their load would get under [`plan_by_load`].
pub fn plan_by_severity(table: &SegmentTable) -> Result<FoldPlan, FoldError> {
    let rows = benchmark_rows(table)?;
    let missing: Vec<String> = recording_ids(
        rows.iter()
            .copied()
            .filter(|r| !r.label.is_healthy() && r.severity.is_none()),
    );
    if !missing.is_empty() {
        return Err(FoldError::MissingSeverity(missing));
    }
    let severities = distinct(rows.iter().filter_map(|r| r.severity));
    let k = severities.len();
    if k < 2 {
        return Err(FoldError::TooFewFolds {
            kind: DivisionKind::BySeverity,
            k,
        });
    }
    let healthy: Vec<&SegmentRecord> = rows
        .iter()
        .copied()
        .filter(|r| r.label.is_healthy())
        .collect();
    let loads = if healthy.is_empty() {
        Vec::new()
    } else {
        load_mapping(&rows)?
    };

    let mut assignment = BTreeMap::new();
    for r in &rows {
        let fold = match r.severity {
            Some(s) if !r.label.is_healthy() => rank(&severities, s),
            _ => {
                let load = r
                    .load
                    .ok_or_else(|| FoldError::MissingLoad(vec![r.recording_id.clone()]))?;
                let fold = rank(&loads, load);
                if fold > k {
                    return Err(FoldError::HealthyFoldOutOfRange {
                        recording_id: r.recording_id.clone(),
                        load,
                        fold,
                        k,
                    });
                }
                fold
            }
        };
        assignment.insert(r.segment_id.clone(), fold);
    }
    Ok(FoldPlan {
        rule: DivisionRule {
            kind: DivisionKind::BySeverity,
            k,
        },
        assignment,
        fold_values: severities,
        catalog_hash: table.catalog_hash.clone(),
    })
}

fn benchmark_rows(table: &SegmentTable) -> Result<Vec<&SegmentRecord>, FoldError> {
    let rows: Vec<&SegmentRecord> = table
        .rows
        .iter()
        .filter(|r| r.label.is_benchmark())
        .collect();
    if rows.is_empty() {
        return Err(FoldError::Empty);
    }
    Ok(rows)
}

/// Ascending distinct loads over all benchmark rows.
fn load_mapping(rows: &[&SegmentRecord]) -> Result<Vec<f64>, FoldError> {
    let missing = recording_ids(rows.iter().copied().filter(|r| r.load.is_none()));
    if !missing.is_empty() {
        return Err(FoldError::MissingLoad(missing));
    }
    Ok(distinct(rows.iter().filter_map(|r| r.load)))
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// 1-based fold index of `value` in the ascending `values`.
fn rank(values: &[f64], value: f64) -> usize {
    values
        .iter()
        .position(|&v| v == value)
        .expect("value taken from the same rows")
        + 1
}

fn recording_ids<'a>(rows: impl Iterator<Item = &'a SegmentRecord>) -> Vec<String> {
    let mut ids: Vec<String> = rows.map(|r| r.recording_id.clone()).collect();
    ids.sort();
    ids.dedup();
    ids
}
