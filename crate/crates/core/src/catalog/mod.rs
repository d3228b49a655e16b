//! The dataset registry: which recordings exist, where their files live, and
//! the operating conditions each was captured under.

mod adapters;
mod cwru_table;
mod ingest;
mod manifest;
mod query;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use adapters::{
    builtin_adapters, AdapterDescriptor, AdapterError, AdapterOptions, ChannelInfo, StemInfo,
};
pub use ingest::{ingest, IngestError};
pub use manifest::{
    datasets_path, load_catalog, read_catalog, save_catalog, write_catalog_csv, MANIFEST_HEADER,
};
pub use query::{query, FilterError, RecordingFilter};

use crate::HealthLabel;

/// A value with a unit, e.g. a motor load of `2 hp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: impl Into<String>) -> Self {
        Self {
            value,
            unit: unit.into(),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// Unit string marking a severity stored as an opaque code.
pub const SEVERITY_CODE_UNIT: &str = "code";

/// Fault severity: a physical defect size, or a dataset-specific code kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Severity {
    Size(Quantity),
    Code(String),
}

impl Severity {
    pub fn size(value: f64, unit: impl Into<String>) -> Self {
        Severity::Size(Quantity::new(value, unit))
    }

    pub fn code(code: impl Into<String>) -> Self {
        Severity::Code(code.into())
    }

    pub fn numeric(&self) -> Option<f64> {
        match self {
            Severity::Size(q) => Some(q.value),
            Severity::Code(_) => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Size(q) => q.fmt(f),
            Severity::Code(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SensorPosition {
    /// Drive end.
    DE,
    /// Fan end.
    FE,
    /// Base.
    BA,
    Other(String),
}

impl SensorPosition {
    pub fn parse(s: &str) -> Self {
        match s {
            "DE" => SensorPosition::DE,
            "FE" => SensorPosition::FE,
            "BA" => SensorPosition::BA,
            other => SensorPosition::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            SensorPosition::DE => "DE",
            SensorPosition::FE => "FE",
            SensorPosition::BA => "BA",
            SensorPosition::Other(s) => s,
        }
    }
}

impl fmt::Display for SensorPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Provenance and operating conditions of one raw vibration channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub recording_id: String,
    pub dataset_id: String,
    pub equipment: String,
    pub sampling_rate: f64,
    pub duration: f64,
    pub shaft_speed: Option<f64>,
    pub load: Option<Quantity>,
    pub sensor_position: SensorPosition,
    pub label: HealthLabel,
    pub fault_severity: Option<Severity>,
    pub source_file: String,
    pub channel_pattern: String,
}

impl RecordingMeta {
    /// Checks the per-row invariants; returns a human-readable reason on failure.
    pub fn check(&self) -> Result<(), String> {
        if self.recording_id.is_empty() {
            return Err("recording_id is empty".into());
        }
        if self.recording_id.contains('#') {
            return Err(format!(
                "recording_id {:?} contains '#', which is reserved for segment ids",
                self.recording_id
            ));
        }
        if !(self.sampling_rate.is_finite() && self.sampling_rate > 0.0) {
            return Err(format!(
                "sampling_rate must be positive, got {}",
                self.sampling_rate
            ));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(format!("duration must be positive, got {}", self.duration));
        }
        match (self.label.is_healthy(), &self.fault_severity) {
            (true, Some(s)) => Err(format!("healthy recording carries a fault severity ({s})")),
            (false, None) => Err(format!(
                "faulty recording (label {}) has no fault severity",
                self.label
            )),
            _ => Ok(()),
        }
    }

    /// Sample count implied by duration and sampling rate.
    pub fn sample_count(&self) -> usize {
        (self.duration * self.sampling_rate).round() as usize
    }

    pub fn load_value(&self) -> Option<f64> {
        self.load.as_ref().map(|q| q.value)
    }

    pub fn severity_value(&self) -> Option<f64> {
        self.fault_severity.as_ref().and_then(Severity::numeric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub citation: String,
    pub default_sampling_rates: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at row {row}, field {field:?}: {reason}")]
    Schema {
        row: usize,
        field: String,
        reason: String,
    },
    #[error("invariant violation at row {row} ({recording_id}): {reason}")]
    InvariantViolation {
        row: usize,
        recording_id: String,
        reason: String,
    },
    #[error("dataset descriptors {path}: {reason}")]
    Descriptors { path: String, reason: String },
}

/// Validated, immutable registry of datasets and recordings.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    datasets: BTreeMap<String, DatasetDescriptor>,
    recordings: Vec<RecordingMeta>,
}

impl Catalog {
    /// Validates every invariant. Row numbers in errors are 1-based positions in `recordings`.
    pub fn new(
        datasets: BTreeMap<String, DatasetDescriptor>,
        recordings: Vec<RecordingMeta>,
    ) -> Result<Self, CatalogError> {
        let mut ids = HashSet::new();
        let mut channels = HashSet::new();
        for (i, rec) in recordings.iter().enumerate() {
            let row = i + 1;
            if !datasets.contains_key(&rec.dataset_id) {
                return Err(CatalogError::Schema {
                    row,
                    field: "dataset_id".into(),
                    reason: format!("unknown dataset {:?}", rec.dataset_id),
                });
            }
            let violation = |reason: String| CatalogError::InvariantViolation {
                row,
                recording_id: rec.recording_id.clone(),
                reason,
            };
            rec.check().map_err(violation)?;
            if !ids.insert(rec.recording_id.as_str()) {
                return Err(violation("duplicate recording_id".into()));
            }
            if !channels.insert((
                rec.dataset_id.as_str(),
                rec.source_file.as_str(),
                &rec.sensor_position,
            )) {
                return Err(violation(format!(
                    "another recording already uses ({}, {}, {})",
                    rec.dataset_id, rec.source_file, rec.sensor_position
                )));
            }
        }
        Ok(Self {
            datasets,
            recordings,
        })
    }

    pub fn datasets(&self) -> &BTreeMap<String, DatasetDescriptor> {
        &self.datasets
    }

    pub fn recordings(&self) -> &[RecordingMeta] {
        &self.recordings
    }

    pub fn len(&self) -> usize {
        self.recordings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recordings.is_empty()
    }

    pub fn get(&self, recording_id: &str) -> Option<&RecordingMeta> {
        self.recordings
            .iter()
            .find(|r| r.recording_id == recording_id)
    }

    /// Recordings sorted by id, the canonical order for downstream stages.
    pub fn sorted(&self) -> Vec<&RecordingMeta> {
        let mut v: Vec<_> = self.recordings.iter().collect();
        v.sort_by(|a, b| a.recording_id.cmp(&b.recording_id));
        v
    }

    /// A new catalog holding only the recordings that pass `keep`.
    pub fn filtered(&self, keep: impl Fn(&RecordingMeta) -> bool) -> Catalog {
        Catalog {
            datasets: self.datasets.clone(),
            recordings: self
                .recordings
                .iter()
                .filter(|r| keep(r))
                .cloned()
                .collect(),
        }
    }

    /// SHA-256 of the canonical (id-sorted) manifest text; independent of row order.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        write_catalog_csv(&mut buf, self.sorted().into_iter())
            .expect("writing to memory cannot fail");
        crate::hashing::sha256_hex(&buf)
    }

    /// Absolute location of a recording's source file, resolving relative paths against `data_root`.
    pub fn resolve_source(rec: &RecordingMeta, data_root: &Path) -> PathBuf {
        let p = Path::new(&rec.source_file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            data_root.join(p)
        }
    }
}

/// Descriptors for every dataset with a built-in adapter.
pub fn builtin_descriptors() -> BTreeMap<String, DatasetDescriptor> {
    builtin_adapters()
        .into_iter()
        .map(|(id, a)| (id, a.descriptor()))
        .collect()
}
