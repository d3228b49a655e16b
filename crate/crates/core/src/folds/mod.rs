//! Bias-aware K-fold plans and train/val/test splits.
//!
//! Folds are built from whole recordings: every segment of one recording
//! (one sensor channel of one capture) lands in the same fold, and the
//! validation split moves whole recordings too.

mod io;
mod plan;
mod splits;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use io::{
    read_fold_plan, read_segment_table, read_split_manifest, write_fold_plan, write_segment_table,
    write_split_manifest, SEGMENTS_HEADER,
};
pub use plan::{plan, plan_by_load, plan_by_severity};
pub use splits::{make_splits, DEFAULT_VAL_FRACTION};

use crate::catalog::Catalog;
use crate::dsp::{parse_segment_id, segment_count, segment_id, DspError, SegmentLength};
use crate::HealthLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivisionKind {
    ByLoad,
    BySeverity,
}

impl DivisionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DivisionKind::ByLoad => "ByLoad",
            DivisionKind::BySeverity => "BySeverity",
        }
    }
}

impl fmt::Display for DivisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DivisionKind {
    type Err = FoldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "byload" | "load" => Ok(DivisionKind::ByLoad),
            "byseverity" | "severity" => Ok(DivisionKind::BySeverity),
            _ => Err(FoldError::UnknownRule(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionRule {
    pub kind: DivisionKind,
    pub k: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum FoldError {
    #[error("recordings without a load value: {}", .0.join(", "))]
    MissingLoad(Vec<String>),
    #[error("faulty recordings without a numeric severity: {}", .0.join(", "))]
    MissingSeverity(Vec<String>),
    #[error("{kind} division found {k} distinct value(s); cross-validation needs at least 2")]
    TooFewFolds { kind: DivisionKind, k: usize },
    #[error("healthy recording {recording_id} has load {load}, whose load fold {fold} exceeds the {k} severity folds")]
    HealthyFoldOutOfRange {
        recording_id: String,
        load: f64,
        fold: usize,
        k: usize,
    },
    #[error("unknown division rule {0:?} (expected ByLoad or BySeverity)")]
    UnknownRule(String),
    #[error("no benchmark segments to assign")]
    Empty,
    #[error("round {round} is outside 1..={k}")]
    InvalidRound { round: usize, k: usize },
    #[error("val_fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("malformed segment id {0:?} (expected <recording_id>#<index>)")]
    BadSegmentId(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One segment as the fold planner sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub segment_id: String,
    pub recording_id: String,
    pub dataset_id: String,
    pub label: HealthLabel,
    pub load: Option<f64>,
    pub severity: Option<f64>,
}

/// Every segment a catalog yields under a given segment length, in
/// canonical order (recording id, then segment index).
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTable {
    pub rows: Vec<SegmentRecord>,
    pub catalog_hash: String,
}

impl SegmentTable {
    /// Derives segment counts from recording metadata (`floor(samples / L)`)
    /// without touching signal files.
    pub fn from_catalog(catalog: &Catalog, length: SegmentLength) -> Result<Self, FoldError> {
        let mut rows = Vec::new();
        for rec in catalog.sorted() {
            let len = length.samples(rec.sampling_rate)?;
            for index in 0..segment_count(rec.sample_count(), len) {
                rows.push(SegmentRecord {
                    segment_id: segment_id(&rec.recording_id, index),
                    recording_id: rec.recording_id.clone(),
                    dataset_id: rec.dataset_id.clone(),
                    label: rec.label,
                    load: rec.load_value(),
                    severity: rec.severity_value(),
                });
            }
        }
        Ok(Self {
            rows,
            catalog_hash: catalog.content_hash(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, segment_id: &str) -> Option<&SegmentRecord> {
        self.rows.iter().find(|r| r.segment_id == segment_id)
    }

    /// Segment id -> row, for repeated lookups.
    pub fn index(&self) -> BTreeMap<&str, &SegmentRecord> {
        self.rows
            .iter()
            .map(|r| (r.segment_id.as_str(), r))
            .collect()
    }
}

/// Assignment of benchmark segments to folds `1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub rule: DivisionRule,
    pub assignment: BTreeMap<String, usize>,
    /// Grouping value (load or severity) of each fold, ascending; entry `i` is fold `i + 1`.
    pub fold_values: Vec<f64>,
    pub catalog_hash: String,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.rule.k
    }

    pub fn fold_of(&self, segment_id: &str) -> Option<usize> {
        self.assignment.get(segment_id).copied()
    }

    /// Segment ids of one fold in canonical order.
    pub fn fold_segments(&self, fold: usize) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .assignment
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(s, _)| s.as_str())
            .collect();
        sort_segment_ids(&mut v);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Val,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Val => "val",
            Role::Test => "test",
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Role::Train),
            "val" => Ok(Role::Val),
            "test" => Ok(Role::Test),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Train/val/test roles for one cross-validation round. Each list is in canonical segment order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub kind: DivisionKind,
    pub round: usize,
    pub seed: u64,
    pub val_fraction: f64,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl SplitManifest {
    pub fn role_of(&self, segment_id: &str) -> Option<Role> {
        [
            (Role::Train, &self.train),
            (Role::Val, &self.val),
            (Role::Test, &self.test),
        ]
        .into_iter()
        .find(|(_, ids)| ids.iter().any(|s| s == segment_id))
        .map(|(r, _)| r)
    }

    /// All `(segment_id, role)` pairs in canonical segment order.
    pub fn rows(&self) -> Vec<(&str, Role)> {
        let mut rows: Vec<(&str, Role)> = self
            .train
            .iter()
            .map(|s| (s.as_str(), Role::Train))
            .chain(self.val.iter().map(|s| (s.as_str(), Role::Val)))
            .chain(self.test.iter().map(|s| (s.as_str(), Role::Test)))
            .collect();
        rows.sort_by(|a, b| segment_order(a.0, b.0));
        rows
    }
}

/// Orders segment ids by recording id, then numeric index.
pub fn segment_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (parse_segment_id(a), parse_segment_id(b)) {
        (Some((ra, ia)), Some((rb, ib))) => ra.cmp(rb).then(ia.cmp(&ib)),
        _ => a.cmp(b),
    }
}

pub fn sort_segment_ids<S: AsRef<str>>(ids: &mut [S]) {
    ids.sort_by(|a, b| segment_order(a.as_ref(), b.as_ref()));
}
