use std::fmt;

use vibforge::baseline::BaselineError;
use vibforge::catalog::{CatalogError, FilterError, IngestError};
use vibforge::dsp::DspError;
use vibforge::eval::EvalError;
use vibforge::folds::FoldError;
use vibforge::matio::SignalError;
use vibforge::pipeline::PipelineError;
use vibforge::spectro::SpectroError;
use vibforge::synth::SynthError;

/// Exit classes: 1 usage, 2 data or validation, 3 internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Usage = 1,
    Data = 2,
    Internal = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub class: ExitClass,
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            class: ExitClass::Usage,
            code: "USAGE",
            message: message.into(),
        }
    }

    pub fn data(code: &'static str, message: impl fmt::Display) -> Self {
        Self {
            class: ExitClass::Data,
            code,
            message: message.to_string(),
        }
    }

    pub fn internal(code: &'static str, message: impl fmt::Display) -> Self {
        Self {
            class: ExitClass::Internal,
            code,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class as i32
    }

    /// The single stderr line: `error code=<CODE>: <message>`.
    pub fn line(&self) -> String {
        let flat = self.message.replace(['\n', '\r'], " ");
        format!("error code={}: {}", self.code, flat)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

macro_rules! data_error {
    ($($ty:ty => $code:literal),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::data($code, e)
            }
        })*
    };
}

data_error! {
    CatalogError => "CATALOG",
    FilterError => "FILTER",
    IngestError => "INGEST",
    SignalError => "SIGNAL",
    DspError => "DSP",
    SpectroError => "SPECTRO",
    FoldError => "FOLDS",
    BaselineError => "BASELINE",
    EvalError => "EVAL",
    SynthError => "SYNTH",
    PipelineError => "PIPELINE",
}

pub type CliResult<T> = Result<T, CliError>;
