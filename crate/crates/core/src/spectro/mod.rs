//! Spectrogram rasterization: magnitude grid -> dB -> 8-bit image -> fixed
//! 256x512 bilinear resize -> PNG.
//!
//! Image rows run top to bottom, so frequency row 0 (0 Hz) lands on the last
//! image row. Height is the frequency axis, width the time axis.

mod manifest;
mod png;
mod render;
mod resize;

use serde::{Deserialize, Serialize};

pub use manifest::{read_images_manifest, ImageRow, ImagesManifestWriter, IMAGES_HEADER};
pub use png::encode_png;
pub use render::{render, render_padded, to_db};
pub use resize::resize_bilinear;

use crate::dsp::SpectrogramMatrix;

pub const TARGET_HEIGHT: usize = 256;
pub const TARGET_WIDTH: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colormap {
    Grayscale,
    Viridis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderParams {
    /// Added to magnitudes before taking `20 log10`.
    pub db_floor_epsilon: f64,
    /// High energy renders dark when set.
    pub invert: bool,
    pub colormap: Colormap,
    pub target_height: usize,
    pub target_width: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            db_floor_epsilon: 1e-10,
            invert: true,
            colormap: Colormap::Grayscale,
            target_height: TARGET_HEIGHT,
            target_width: TARGET_WIDTH,
        }
    }
}

impl RenderParams {
    pub fn validate(&self) -> Result<(), SpectroError> {
        if !(self.db_floor_epsilon.is_finite() && self.db_floor_epsilon > 0.0) {
            return Err(SpectroError::InvalidParams(format!(
                "db_floor_epsilon must be positive, got {}",
                self.db_floor_epsilon
            )));
        }
        if self.target_height == 0 || self.target_width == 0 {
            return Err(SpectroError::InvalidParams(
                "target dimensions must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpectroError {
    #[error("invalid render parameters: {0}")]
    InvalidParams(String),
    #[error("cannot render an empty grid")]
    EmptyGrid,
    #[error("image {segment_id} is {height}x{width}, manifest requires {expected_height}x{expected_width}")]
    WrongSize {
        segment_id: String,
        height: usize,
        width: usize,
        expected_height: usize,
        expected_width: usize,
    },
    #[error("images manifest row {row}: {reason}")]
    Manifest { row: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// An 8-bit raster, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrogramImage {
    pub height: usize,
    pub width: usize,
    /// 1 (grayscale) or 3 (RGB).
    pub channels: usize,
    pub pixels: Vec<u8>,
    pub segment_id: String,
}

impl SpectrogramImage {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        segment_id: impl Into<String>,
    ) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Self {
            height,
            width,
            channels,
            pixels: vec![0; height * width * channels],
            segment_id: segment_id.into(),
        }
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.pixels[(row * self.width + col) * self.channels + channel]
    }

    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: u8) {
        self.pixels[(row * self.width + col) * self.channels + channel] = value;
    }
}

/// The full rendering chain for one magnitude grid: dB, render with the
/// upper band padded out to `freq_max`, then resize to the target size.
///
/// Grids cropped by a Nyquist frequency below `freq_max` get their missing
/// upper rows filled with the lowest-energy value, so every image spans the
/// same `[0, freq_max]` band.
pub fn spectrogram_image(
    matrix: &SpectrogramMatrix,
    params: &RenderParams,
) -> Result<SpectrogramImage, SpectroError> {
    params.validate()?;
    let db = to_db(&matrix.values, params.db_floor_epsilon);
    let full_rows = matrix
        .params
        .full_band_rows(matrix.sampling_rate)
        .max(db.nrows());
    let mut image = render_padded(&db, params, full_rows)?;
    image.segment_id = matrix.segment_id.clone();
    Ok(resize_bilinear(
        &image,
        params.target_height,
        params.target_width,
    ))
}
