//! Readers for the raw signal containers the public datasets ship in.
//!
//! [`parse_mat`] decodes level-5 MAT files (the MATLAB "v5/v6/v7" format,
//! not the HDF5-based v7.3). Only plain real numeric matrices of the classes
//! in [`ElementClass`] are accepted; everything else is a typed error. Text
//! signals (one or two CSV columns) go through [`read_text_signal`].

mod channel;
mod parse;
mod text;

use std::path::Path;

pub use channel::extract_channel;
pub use parse::parse_mat;
pub use text::read_text_signal;

use crate::dsp::{DspError, TimeSeries};

/// Storage class of a decoded variable, as declared in its array flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    Float64,
    Float32,
    Int32,
    Int16,
    Uint8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endianness {
    Little,
    Big,
}

/// One numeric variable. `data` is column-major and already widened to f64.
#[derive(Debug, Clone, PartialEq)]
pub struct MatVariable {
    pub name: String,
    pub element_class: ElementClass,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
    pub was_compressed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatFile {
    pub header_text: String,
    pub version: u16,
    pub endianness: Endianness,
    pub variables: Vec<MatVariable>,
}

impl MatFile {
    pub fn variable(&self, name: &str) -> Option<&MatVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatError {
    #[error("file ends at byte {len} but element at offset {offset} needs {needed} bytes")]
    TruncatedFile {
        offset: usize,
        needed: usize,
        len: usize,
    },
    #[error("bad endian indicator {found:?}: expected \"IM\" or \"MI\"")]
    BadMagic { found: [u8; 2] },
    #[error("unsupported MAT version 0x{0:04x} (only level 5, 0x0100, is read)")]
    BadVersion(u16),
    #[error("unsupported element (type tag {tag}) at byte offset {offset}: {detail}")]
    UnsupportedElement {
        tag: u32,
        offset: usize,
        detail: String,
    },
    #[error("corrupt compressed element at byte offset {offset}: {reason}")]
    DecompressFailure { offset: usize, reason: String },
    #[error("malformed element at byte offset {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("variable name {0:?} appears more than once")]
    DuplicateName(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid channel pattern {pattern:?}: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error("no variable matches {pattern:?} (available: {available:?})")]
    NoMatch {
        pattern: String,
        available: Vec<String>,
    },
    #[error("pattern {pattern:?} matches several variables: {matches:?}")]
    MatchAmbiguous {
        pattern: String,
        matches: Vec<String>,
    },
    #[error(transparent)]
    Series(#[from] DspError),
}

#[derive(Debug, thiserror::Error)]
pub enum SignalError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Mat { path: String, source: MatError },
    #[error("{path}: {source}")]
    Channel { path: String, source: ChannelError },
    #[error("{path}: line {line}: {reason}")]
    Text {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}: unsupported signal file extension (expected .mat, .csv or .txt)")]
    UnknownFormat { path: String },
}

/// Reads one channel of a signal file, dispatching on the extension.
///
/// `.mat` files go through [`parse_mat`] and [`extract_channel`]; `.csv` and
/// `.txt` files through [`read_text_signal`] (the pattern is ignored there).
pub fn read_signal_file(
    path: &Path,
    channel_pattern: &str,
    sampling_rate: f64,
) -> Result<TimeSeries, SignalError> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| SignalError::Io {
        path: shown.clone(),
        source,
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("mat") => {
            let file = parse_mat(&bytes).map_err(|source| SignalError::Mat {
                path: shown.clone(),
                source,
            })?;
            extract_channel(&file, channel_pattern, sampling_rate).map_err(|source| {
                SignalError::Channel {
                    path: shown.clone(),
                    source,
                }
            })
        }
        Some("csv") | Some("txt") => {
            let samples = read_text_signal(&bytes).map_err(|(line, reason)| SignalError::Text {
                path: shown.clone(),
                line,
                reason,
            })?;
            TimeSeries::new(samples, sampling_rate).map_err(|e| SignalError::Channel {
                path: shown.clone(),
                source: e.into(),
            })
        }
        _ => Err(SignalError::UnknownFormat { path: shown }),
    }
}
