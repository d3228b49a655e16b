use super::{Catalog, RecordingMeta, SensorPosition};
use crate::HealthLabel;

/// Conjunction of optional field filters. Unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordingFilter {
    pub dataset_id: Option<String>,
    pub equipment: Option<String>,
    pub label: Option<HealthLabel>,
    pub load: Option<f64>,
    pub load_unit: Option<String>,
    pub sensor_position: Option<SensorPosition>,
    pub severity: Option<String>,
    pub sampling_rate: Option<f64>,
    pub shaft_speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("filter clause {0:?} is not of the form key=value")]
    Syntax(String),
    #[error("unknown filter key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {reason}")]
    BadValue { key: String, reason: String },
}

impl RecordingFilter {
    pub fn matches(&self, r: &RecordingMeta) -> bool {
        fn eq<T: PartialEq>(want: &Option<T>, got: T) -> bool {
            want.as_ref().is_none_or(|w| *w == got)
        }
        eq(&self.dataset_id.as_deref(), r.dataset_id.as_str())
            && eq(&self.equipment.as_deref(), r.equipment.as_str())
            && eq(&self.label, r.label)
            && eq(&self.sensor_position.as_ref(), &r.sensor_position)
            && eq(&self.sampling_rate, r.sampling_rate)
            && self.load.is_none_or(|l| r.load_value() == Some(l))
            && self
                .load_unit
                .as_deref()
                .is_none_or(|u| r.load.as_ref().is_some_and(|q| q.unit == u))
            && self.shaft_speed.is_none_or(|s| r.shaft_speed == Some(s))
            && self
                .severity
                .as_deref()
                .is_none_or(|want| match &r.fault_severity {
                    None => want.is_empty() || want == "none",
                    Some(s) => match (s.numeric(), want.parse::<f64>()) {
                        (Some(v), Ok(w)) => v == w,
                        _ => s.to_string() == want,
                    },
                })
    }

    /// Adds one `key=value` clause, e.g. `dataset=cwru` or `load=0`.
    pub fn add_clause(&mut self, clause: &str) -> Result<(), FilterError> {
        let (key, value) = clause
            .split_once('=')
            .ok_or_else(|| FilterError::Syntax(clause.to_string()))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| {
            v.parse::<f64>().map_err(|e| FilterError::BadValue {
                key: key.to_string(),
                reason: e.to_string(),
            })
        };
        match key {
            "dataset" | "dataset_id" => self.dataset_id = Some(value.to_string()),
            "equipment" => self.equipment = Some(value.to_string()),
            "label" => {
                self.label = Some(value.parse().map_err(|e: crate::label::ParseLabelError| {
                    FilterError::BadValue {
                        key: key.to_string(),
                        reason: e.to_string(),
                    }
                })?)
            }
            "load" => self.load = Some(num(value)?),
            "load_unit" => self.load_unit = Some(value.to_string()),
            "sensor" | "sensor_position" => {
                self.sensor_position = Some(SensorPosition::parse(value))
            }
            "severity" => self.severity = Some(value.to_string()),
            "sampling_rate" => self.sampling_rate = Some(num(value)?),
            "shaft_speed" => self.shaft_speed = Some(num(value)?),
            other => return Err(FilterError::UnknownKey(other.to_string())),
        }
        Ok(())
    }
}

/// Recordings passing `filter`, ordered by recording id.
pub fn query<'a>(catalog: &'a Catalog, filter: &RecordingFilter) -> Vec<&'a RecordingMeta> {
    let mut out: Vec<_> = catalog
        .recordings()
        .iter()
        .filter(|r| filter.matches(r))
        .collect();
    out.sort_by(|a, b| a.recording_id.cmp(&b.recording_id));
    out
}
