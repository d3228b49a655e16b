//! Experiment configuration: a TOML file plus flag overrides.
//! Precedence is flags, then the file, then built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vibforge::baseline::TrainConfig;
use vibforge::dsp::{SegmentLength, StftParams, DEFAULT_SEGMENT_SECONDS};
use vibforge::folds::{DivisionKind, DEFAULT_VAL_FRACTION};
use vibforge::hashing::sha256_hex;
use vibforge::pipeline::FeatureSettings;
use vibforge::spectro::{Colormap, RenderParams};

use crate::error::{CliError, CliResult};

pub const DATA_DIR_ENV: &str = "VIBFORGE_DATA_DIR";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub catalog: Option<PathBuf>,
    pub data_root: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub segment_seconds: Option<f64>,
    pub segment_samples: Option<usize>,
    pub select_k: Option<usize>,
    #[serde(default)]
    pub stft: BTreeMap<String, StftParams>,
    #[serde(default)]
    pub render: RenderFile,
    #[serde(default)]
    pub folds: FoldsFile,
    #[serde(default)]
    pub train: TrainFile,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderFile {
    pub db_floor_epsilon: Option<f64>,
    pub invert: Option<bool>,
    pub colormap: Option<Colormap>,
    pub target_height: Option<usize>,
    pub target_width: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoldsFile {
    pub rule: Option<String>,
    pub val_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub learning_rate: Option<f64>,
    pub max_epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub l2_lambda: Option<f64>,
    pub early_stop_patience: Option<usize>,
    pub lr_reduce_factor: Option<f64>,
    pub lr_reduce_patience: Option<usize>,
}

/// Values given on the command line; `None` defers to the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub catalog: Option<PathBuf>,
    pub data_root: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub segment_seconds: Option<f64>,
    pub segment_samples: Option<usize>,
    pub select_k: Option<usize>,
    pub colormap: Option<Colormap>,
    pub invert: Option<bool>,
    pub rule: Option<String>,
    pub val_fraction: Option<f64>,
    pub learning_rate: Option<f64>,
    pub max_epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub l2_lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentSetting {
    Seconds(f64),
    Samples(usize),
}

impl SegmentSetting {
    pub fn length(self) -> SegmentLength {
        match self {
            SegmentSetting::Seconds(s) => SegmentLength::Duration(s),
            SegmentSetting::Samples(n) => SegmentLength::Samples(n),
        }
    }
}

/// Fully resolved settings for one run. Its JSON form is hashed into the run record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub catalog: PathBuf,
    pub data_root: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker count; outputs do not depend on it, so it is not hashed.
    #[serde(skip)]
    pub jobs: usize,
    pub segment: SegmentSetting,
    pub stft: BTreeMap<String, StftParams>,
    pub render: RenderParams,
    pub rule: DivisionKind,
    pub val_fraction: f64,
    pub select_k: Option<usize>,
    pub train: TrainConfig,
}

pub fn read_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data("CONFIG", format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::data("CONFIG", format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> CliResult<Self> {
        let output_dir = flags
            .output_dir
            .or(file.output_dir)
            .unwrap_or_else(|| PathBuf::from("."));
        let catalog = flags
            .catalog
            .or(file.catalog)
            .unwrap_or_else(|| output_dir.join("catalog.csv"));
        let data_root = flags
            .data_root
            .or(file.data_root)
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from));
        let seed = flags.seed.or(file.seed).unwrap_or(0);
        let jobs = flags
            .jobs
            .or(file.jobs)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if jobs == 0 {
            return Err(CliError::data("CONFIG", "jobs must be at least 1"));
        }

        let segment = match (flags.segment_seconds, flags.segment_samples) {
            (Some(s), _) => SegmentSetting::Seconds(s),
            (None, Some(n)) => SegmentSetting::Samples(n),
            (None, None) => match (file.segment_seconds, file.segment_samples) {
                (Some(_), Some(_)) => {
                    return Err(CliError::data(
                        "CONFIG",
                        "set segment_seconds or segment_samples, not both",
                    ))
                }
                (Some(s), None) => SegmentSetting::Seconds(s),
                (None, Some(n)) => SegmentSetting::Samples(n),
                (None, None) => SegmentSetting::Seconds(DEFAULT_SEGMENT_SECONDS),
            },
        };
        match segment {
            SegmentSetting::Seconds(s) if !(s.is_finite() && s > 0.0) => {
                return Err(CliError::data(
                    "CONFIG",
                    format!("segment seconds must be positive, got {s}"),
                ))
            }
            SegmentSetting::Samples(0) => {
                return Err(CliError::data("CONFIG", "segment samples must be positive"))
            }
            _ => {}
        }
        for (dataset, p) in &file.stft {
            p.validate()
                .map_err(|e| CliError::data("CONFIG", format!("stft.{dataset}: {e}")))?;
        }

        let defaults = RenderParams::default();
        let render = RenderParams {
            db_floor_epsilon: file
                .render
                .db_floor_epsilon
                .unwrap_or(defaults.db_floor_epsilon),
            invert: flags
                .invert
                .or(file.render.invert)
                .unwrap_or(defaults.invert),
            colormap: flags
                .colormap
                .or(file.render.colormap)
                .unwrap_or(defaults.colormap),
            target_height: file.render.target_height.unwrap_or(defaults.target_height),
            target_width: file.render.target_width.unwrap_or(defaults.target_width),
        };
        render.validate().map_err(|e| CliError::data("CONFIG", e))?;

        let rule = match flags.rule.or(file.folds.rule) {
            Some(r) => r.parse().map_err(|e| CliError::data("CONFIG", e))?,
            None => DivisionKind::ByLoad,
        };
        let val_fraction = flags
            .val_fraction
            .or(file.folds.val_fraction)
            .unwrap_or(DEFAULT_VAL_FRACTION);
        if !(val_fraction > 0.0 && val_fraction < 1.0) {
            return Err(CliError::data(
                "CONFIG",
                format!("val_fraction must lie strictly between 0 and 1, got {val_fraction}"),
            ));
        }

        let d = TrainConfig::default();
        let t = file.train;
        let train = TrainConfig {
            learning_rate: flags
                .learning_rate
                .or(t.learning_rate)
                .unwrap_or(d.learning_rate),
            max_epochs: flags.max_epochs.or(t.max_epochs).unwrap_or(d.max_epochs),
            batch_size: flags.batch_size.or(t.batch_size).unwrap_or(d.batch_size),
            l2_lambda: flags.l2_lambda.or(t.l2_lambda).unwrap_or(d.l2_lambda),
            early_stop_patience: t.early_stop_patience.unwrap_or(d.early_stop_patience),
            lr_reduce_factor: t.lr_reduce_factor.unwrap_or(d.lr_reduce_factor),
            lr_reduce_patience: t.lr_reduce_patience.unwrap_or(d.lr_reduce_patience),
            seed,
        };
        train.validate().map_err(|e| CliError::data("CONFIG", e))?;

        Ok(Self {
            catalog,
            data_root,
            output_dir,
            seed,
            jobs,
            segment,
            stft: file.stft,
            render,
            rule,
            val_fraction,
            select_k: flags.select_k.or(file.select_k),
            train,
        })
    }

    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    /// Where recording sources are resolved: the configured root, else the
    /// catalog's directory.
    pub fn data_root(&self) -> PathBuf {
        self.data_root.clone().unwrap_or_else(|| {
            self.catalog
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default()
        })
    }

    pub fn feature_settings(&self) -> FeatureSettings {
        FeatureSettings {
            segment_length: self.segment.length(),
            stft: self.stft.clone(),
            db_epsilon: self.render.db_floor_epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: FileConfig = toml::from_str(
            "seed = 5\nselect_k = 10\n[folds]\nrule = \"by-severity\"\nval_fraction = 0.3\n[train]\nmax_epochs = 7\n",
        )
        .unwrap();
        let flags = Overrides {
            seed: Some(9),
            max_epochs: Some(3),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(file, flags).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.train.seed, 9);
        assert_eq!(c.train.max_epochs, 3);
        assert_eq!(c.rule, DivisionKind::BySeverity);
        assert_eq!(c.val_fraction, 0.3);
        assert_eq!(c.select_k, Some(10));
        assert_eq!(c.train.batch_size, TrainConfig::default().batch_size);
        assert_eq!(c.segment, SegmentSetting::Seconds(0.25));
        assert_eq!(c.render, RenderParams::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("sed = 1\n").is_err());
        assert!(toml::from_str::<FileConfig>("[train]\nlr = 1\n").is_err());
    }

    #[test]
    fn stft_table_per_dataset() {
        let file: FileConfig = toml::from_str(
            "[stft.cwru]\nwindow_length = 100\nhop = 4\nnfft = 800\nfreq_max = 5000.0\n",
        )
        .unwrap();
        let c = ExperimentConfig::resolve(file, Overrides::default()).unwrap();
        let s = c.feature_settings();
        assert_eq!(s.stft_for("cwru").unwrap().nfft, 800);
        assert_eq!(s.stft_for("synthetic").unwrap().nfft, 1600);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::resolve(FileConfig::default(), Overrides::default()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
