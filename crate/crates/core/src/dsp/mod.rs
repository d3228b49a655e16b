//! Time-domain segmentation, STFT magnitude grids, averaged Fourier spectra
//! and statistical features.

mod features;
mod profile;
mod spectrum;
mod stft;

pub use features::{statistical_features, FeatureVector};
pub use profile::{DatasetProfile, PROFILES};
pub use spectrum::{fourier_spectrum, Spectrum};
pub use stft::{hop_from_overlap, stft, SpectrogramMatrix, StftParams, StftPlan};

use crate::HealthLabel;

/// Default segment duration in seconds.
pub const DEFAULT_SEGMENT_SECONDS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DspError {
    #[error("series has no samples")]
    EmptySeries,
    #[error("sampling rate must be positive and finite, got {0}")]
    InvalidSamplingRate(f64),
    #[error("segment length {0} yields fewer than one sample")]
    InvalidSegmentLength(String),
    #[error("invalid STFT parameters: {0}")]
    InvalidParams(String),
    #[error("segment has {len} samples, shorter than the {window}-sample window")]
    SegmentTooShort { len: usize, window: usize },
    #[error("series has {len} samples, shorter than the {frame}-sample frame")]
    SeriesTooShort { len: usize, frame: usize },
    #[error("all samples are equal; higher moments are undefined")]
    DegenerateSignal,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// A sampled signal `x(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sampling_rate: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sampling_rate: f64) -> Result<Self, DspError> {
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(DspError::InvalidSamplingRate(sampling_rate));
        }
        if samples.is_empty() {
            return Err(DspError::EmptySeries);
        }
        Ok(Self {
            samples,
            sampling_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// One fixed-length labeled slice of a recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub sampling_rate: f64,
    pub parent_recording: String,
    pub index: usize,
    pub label: HealthLabel,
    pub segment_id: String,
}

/// How long each segment is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentLength {
    /// Seconds; converted with `round(duration * sampling_rate)`.
    Duration(f64),
    /// A fixed sample count regardless of sampling rate.
    Samples(usize),
}

impl Default for SegmentLength {
    fn default() -> Self {
        SegmentLength::Duration(DEFAULT_SEGMENT_SECONDS)
    }
}

impl SegmentLength {
    pub fn samples(self, sampling_rate: f64) -> Result<usize, DspError> {
        match self {
            SegmentLength::Duration(d) => {
                let n = (d * sampling_rate).round();
                if !(n.is_finite() && n >= 1.0) {
                    return Err(DspError::InvalidSegmentLength(format!(
                        "{d} s at {sampling_rate} Hz"
                    )));
                }
                Ok(n as usize)
            }
            SegmentLength::Samples(0) => Err(DspError::InvalidSegmentLength("0 samples".into())),
            SegmentLength::Samples(n) => Ok(n),
        }
    }
}

pub fn segment_id(recording_id: &str, index: usize) -> String {
    format!("{recording_id}#{index}")
}

/// Splits a segment id back into `(recording_id, index)`.
pub fn parse_segment_id(id: &str) -> Option<(&str, usize)> {
    let (rec, idx) = id.rsplit_once('#')?;
    Some((rec, idx.parse().ok()?))
}

/// Number of whole segments of `segment_len` samples in `n_samples`.
pub fn segment_count(n_samples: usize, segment_len: usize) -> usize {
    n_samples.checked_div(segment_len).unwrap_or(0)
}

/// Cuts `series` into consecutive non-overlapping windows starting at sample 0.
/// A trailing remainder shorter than one window is dropped.
pub fn segment(
    series: &TimeSeries,
    length: SegmentLength,
    recording_id: &str,
    label: HealthLabel,
) -> Result<Vec<Segment>, DspError> {
    if series.is_empty() {
        return Err(DspError::EmptySeries);
    }
    let len = length.samples(series.sampling_rate())?;
    Ok(series
        .samples()
        .chunks_exact(len)
        .enumerate()
        .map(|(index, chunk)| Segment {
            samples: chunk.to_vec(),
            sampling_rate: series.sampling_rate(),
            parent_recording: recording_id.to_string(),
            index,
            label,
            segment_id: segment_id(recording_id, index),
        })
        .collect())
}
