use std::io::{Read, Write};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{BaselineError, FeatureMatrix, Predictions, SoftmaxModel, Standardizer};
use crate::HealthLabel;

/// Leading columns of a prediction CSV; one `p_<class>` column per class follows.
pub const PREDICTION_FIXED_COLUMNS: [&str; 2] = ["segment_id", "predicted_label"];

/// CSV with header `segment_id,label,<feature names...>`.
pub fn write_features(x: &FeatureMatrix, w: impl Write) -> Result<(), BaselineError> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["segment_id".to_string(), "label".to_string()];
    header.extend(x.feature_names().iter().cloned());
    csv.write_record(&header)?;
    for (i, row) in x.values().outer_iter().enumerate() {
        let mut rec = vec![x.segment_ids()[i].clone(), x.labels()[i].to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_features(r: impl Read) -> Result<FeatureMatrix, BaselineError> {
    let mut csv = csv::Reader::from_reader(r);
    let header = csv.headers()?.clone();
    if header.len() < 2 || &header[0] != "segment_id" || &header[1] != "label" {
        return Err(BaselineError::Parse {
            line: 1,
            reason: "expected header segment_id,label,<features...>".into(),
        });
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let d = names.len();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut flat = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let bad = |reason: String| BaselineError::Parse { line, reason };
        if rec.len() != d + 2 {
            return Err(bad(format!(
                "expected {} fields, found {}",
                d + 2,
                rec.len()
            )));
        }
        ids.push(rec[0].to_string());
        labels.push(
            rec[1]
                .parse::<HealthLabel>()
                .map_err(|e| bad(e.to_string()))?,
        );
        for f in rec.iter().skip(2) {
            flat.push(f.parse::<f64>().map_err(|e| bad(format!("{f:?}: {e}")))?);
        }
    }
    let values = Array2::from_shape_vec((ids.len(), d), flat)
        .map_err(|e| BaselineError::Shape(e.to_string()))?;
    FeatureMatrix::new(values, names, ids, labels)
}

/// On-disk model layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub class_labels: Vec<HealthLabel>,
    /// Row per class; the last entry of each row is the bias.
    pub weights: Vec<Vec<f64>>,
    pub standardization: Standardizer,
    pub input_features: Vec<String>,
    pub config_hash: String,
}

impl From<&SoftmaxModel> for ModelFile {
    fn from(m: &SoftmaxModel) -> Self {
        Self {
            class_labels: m.class_labels.clone(),
            weights: m.weights.outer_iter().map(|r| r.to_vec()).collect(),
            standardization: m.standardizer.clone(),
            input_features: m.input_features.clone(),
            config_hash: m.config_hash.clone(),
        }
    }
}

pub fn write_model(model: &SoftmaxModel, w: impl Write) -> Result<(), BaselineError> {
    serde_json::to_writer_pretty(w, &ModelFile::from(model))?;
    Ok(())
}

pub fn read_model(r: impl Read) -> Result<SoftmaxModel, BaselineError> {
    let f: ModelFile = serde_json::from_reader(r)?;
    let c = f.class_labels.len();
    let d = f.standardization.kept.len();
    let shape_err = |m: String| BaselineError::Shape(m);
    if f.weights.len() != c || f.weights.iter().any(|row| row.len() != d + 1) {
        return Err(shape_err(format!("weights must be {c}x{}", d + 1)));
    }
    if f.standardization.mean.len() != d || f.standardization.std.len() != d {
        return Err(shape_err(
            "standardization vectors disagree with kept features".into(),
        ));
    }
    if f.standardization
        .kept
        .iter()
        .any(|&j| j >= f.input_features.len())
    {
        return Err(shape_err("kept feature index out of range".into()));
    }
    if f.standardization
        .std
        .iter()
        .any(|&s| s.is_nan() || s <= 0.0)
    {
        return Err(shape_err("standardization stds must be positive".into()));
    }
    let weights = Array2::from_shape_vec((c, d + 1), f.weights.into_iter().flatten().collect())
        .map_err(|e| shape_err(e.to_string()))?;
    Ok(SoftmaxModel {
        class_labels: f.class_labels,
        weights,
        standardizer: f.standardization,
        input_features: f.input_features,
        config_hash: f.config_hash,
    })
}

/// Writes `segment_id,predicted_label,p_<class>...` rows in the given order.
pub fn write_predictions<S: AsRef<str>>(
    segment_ids: &[S],
    classes: &[HealthLabel],
    predictions: &Predictions,
    w: impl Write,
) -> Result<(), BaselineError> {
    write_prediction_rows(
        segment_ids,
        classes,
        &predictions.labels,
        predictions.probabilities.view(),
        w,
    )
}

fn write_prediction_rows<S: AsRef<str>>(
    segment_ids: &[S],
    classes: &[HealthLabel],
    labels: &[HealthLabel],
    probs: ArrayView2<f64>,
    w: impl Write,
) -> Result<(), BaselineError> {
    if segment_ids.len() != labels.len()
        || probs.nrows() != labels.len()
        || probs.ncols() != classes.len()
    {
        return Err(BaselineError::Shape(
            "prediction rows disagree with ids or classes".into(),
        ));
    }
    let mut csv = csv::Writer::from_writer(w);
    let mut header: Vec<String> = PREDICTION_FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(classes.iter().map(|c| format!("p_{c}")));
    csv.write_record(&header)?;
    for (i, id) in segment_ids.iter().enumerate() {
        let mut rec = vec![id.as_ref().to_string(), labels[i].to_string()];
        rec.extend(probs.row(i).iter().map(|p| p.to_string()));
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{fit, predict, TrainConfig};
    use crate::HealthLabel::*;

    fn data() -> FeatureMatrix {
        FeatureMatrix::from_rows(vec![
            ("a#0".into(), H, vec![0.0, 1.0, 7.0]),
            ("a#1".into(), H, vec![0.2, 1.5, 7.0]),
            ("b#0".into(), O, vec![1.0, -1.0, 7.0]),
            ("b#1".into(), O, vec![1.3, -0.5, 7.0]),
        ])
        .unwrap()
    }

    #[test]
    fn features_round_trip() {
        let x = data();
        let mut buf = Vec::new();
        write_features(&x, &mut buf).unwrap();
        assert!(buf.starts_with(b"segment_id,label,f0,f1,f2\na#0,H,0,1,7\n"));
        assert_eq!(read_features(&buf[..]).unwrap(), x);
    }

    #[test]
    fn model_round_trip_predicts_identically() {
        let x = data();
        let (model, _) = fit(&x, &x, &[H, O], &TrainConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_model(&model, &mut buf).unwrap();
        let back = read_model(&buf[..]).unwrap();
        assert_eq!(back, model);
        assert_eq!(
            predict(&back, x.values().view()).unwrap(),
            predict(&model, x.values().view()).unwrap()
        );
    }

    #[test]
    fn prediction_csv_layout() {
        let probs = ndarray::array![[0.25, 0.75]];
        let mut buf = Vec::new();
        write_prediction_rows(&["s#0"], &[H, I], &[I], probs.view(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "segment_id,predicted_label,p_H,p_I\ns#0,I,0.25,0.75\n"
        );
    }
}
