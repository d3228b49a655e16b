use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use super::{EvalError, PredictionRow, PredictionSet};
use crate::baseline::PREDICTION_FIXED_COLUMNS;
use crate::folds::SplitManifest;
use crate::HealthLabel;

/// Joins a prediction CSV (`segment_id,predicted_label,p_<class>...`) with
/// the test rows of `split`. `truth` supplies each segment's true label.
///
/// The class set is the union of the CSV's probability columns and the true
/// labels of the test rows, in label order. Every test segment must appear
/// exactly once and no other segment may appear.
pub fn load_predictions(
    csv_source: impl Read,
    split: &SplitManifest,
    truth: &BTreeMap<String, HealthLabel>,
) -> Result<PredictionSet, EvalError> {
    let mut csv = csv::Reader::from_reader(csv_source);
    let header = csv.headers()?.clone();
    if header.len() < 2
        || header[0] != *PREDICTION_FIXED_COLUMNS[0]
        || header[1] != *PREDICTION_FIXED_COLUMNS[1]
    {
        return Err(EvalError::Parse {
            line: 1,
            reason: "expected header segment_id,predicted_label,p_<class>...".into(),
        });
    }
    let mut classes = Vec::new();
    for col in header.iter().skip(2) {
        let name = col.strip_prefix("p_").ok_or_else(|| EvalError::Parse {
            line: 1,
            reason: format!("column {col:?} is not a p_<class> column"),
        })?;
        let label: HealthLabel = name.parse().map_err(|_| EvalError::UnknownLabel {
            label: name.to_string(),
            line: Some(1),
        })?;
        classes.push(label);
    }

    let test: HashSet<&str> = split.test.iter().map(String::as_str).collect();
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(split.test.len());
    for (i, rec) in csv.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let id = rec.get(0).unwrap_or_default().to_string();
        let predicted_text = rec.get(1).unwrap_or_default();
        let predicted: HealthLabel =
            predicted_text
                .parse()
                .map_err(|_| EvalError::UnknownLabel {
                    label: predicted_text.to_string(),
                    line: Some(line),
                })?;
        if !classes.is_empty() && !classes.contains(&predicted) {
            return Err(EvalError::UnknownLabel {
                label: predicted_text.to_string(),
                line: Some(line),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(EvalError::DuplicateSegment(id));
        }
        if !test.contains(id.as_str()) {
            return Err(EvalError::UnexpectedSegment(id));
        }
        let truth = *truth
            .get(&id)
            .ok_or_else(|| EvalError::MissingTruth(id.clone()))?;
        rows.push(PredictionRow {
            segment_id: id,
            truth,
            predicted,
        });
    }
    if let Some(missing) = split.test.iter().find(|id| !seen.contains(id.as_str())) {
        return Err(EvalError::MissingSegment(missing.clone()));
    }
    let mut class_set = classes;
    class_set.extend(rows.iter().flat_map(|r| [r.truth, r.predicted]));
    class_set.sort();
    class_set.dedup();
    PredictionSet::new(rows, class_set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folds::DivisionKind;
    use crate::HealthLabel::*;

    fn split() -> SplitManifest {
        SplitManifest {
            kind: DivisionKind::ByLoad,
            round: 1,
            seed: 0,
            val_fraction: 0.2,
            train: vec!["t#0".into()],
            val: vec![],
            test: vec!["a#0".into(), "a#1".into()],
        }
    }

    fn truth() -> BTreeMap<String, HealthLabel> {
        [("a#0", H), ("a#1", O), ("t#0", H)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    const HEAD: &str = "segment_id,predicted_label,p_H,p_O\n";

    #[test]
    fn complete_file() {
        let text = format!("{HEAD}a#1,O,0.1,0.9\na#0,O,0.4,0.6\n");
        let set = load_predictions(text.as_bytes(), &split(), &truth()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.class_set(), &[H, O]);
    }

    #[test]
    fn missing_duplicate_unknown() {
        let text = format!("{HEAD}a#0,H,1,0\n");
        match load_predictions(text.as_bytes(), &split(), &truth()) {
            Err(EvalError::MissingSegment(id)) => assert_eq!(id, "a#1"),
            other => panic!("{other:?}"),
        }
        let text = format!("{HEAD}a#0,H,1,0\na#0,H,1,0\na#1,O,0,1\n");
        assert!(matches!(
            load_predictions(text.as_bytes(), &split(), &truth()),
            Err(EvalError::DuplicateSegment(_))
        ));
        let text = format!("{HEAD}a#0,Z,1,0\na#1,O,0,1\n");
        assert!(matches!(
            load_predictions(text.as_bytes(), &split(), &truth()),
            Err(EvalError::UnknownLabel { line: Some(2), .. })
        ));
        let text = format!("{HEAD}a#0,B,1,0\na#1,O,0,1\n");
        assert!(matches!(
            load_predictions(text.as_bytes(), &split(), &truth()),
            Err(EvalError::UnknownLabel { .. })
        ));
        let text = format!("{HEAD}t#0,H,1,0\n");
        assert!(matches!(
            load_predictions(text.as_bytes(), &split(), &truth()),
            Err(EvalError::UnexpectedSegment(_))
        ));
    }
}
