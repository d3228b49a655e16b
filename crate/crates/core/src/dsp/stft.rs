use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{DspError, Segment};

/// Parameters of the short-time Fourier transform.
///
/// The window is always a periodic Hann window of `window_length` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftParams {
    pub window_length: usize,
    pub hop: usize,
    pub nfft: usize,
    /// Highest frequency kept, in Hz (inclusive). Saturates at Nyquist.
    pub freq_max: f64,
}

impl StftParams {
    pub fn validate(&self) -> Result<(), DspError> {
        if !(0 < self.hop && self.hop <= self.window_length && self.window_length <= self.nfft) {
            return Err(DspError::InvalidParams(format!(
                "need 0 < hop ({}) <= window_length ({}) <= nfft ({})",
                self.hop, self.window_length, self.nfft
            )));
        }
        if !(self.freq_max.is_finite() && self.freq_max > 0.0) {
            return Err(DspError::InvalidParams(format!(
                "freq_max must be positive, got {}",
                self.freq_max
            )));
        }
        Ok(())
    }

    /// Number of frequency rows kept at `sampling_rate`.
    pub fn rows(&self, sampling_rate: f64) -> usize {
        let top = self.freq_max.min(sampling_rate / 2.0);
        let bins = (top * self.nfft as f64 / sampling_rate * (1.0 + 1e-12)).floor() as usize;
        1 + bins.min(self.nfft / 2)
    }

    /// Rows a grid would need to reach `freq_max` if the sampling rate allowed it.
    pub fn full_band_rows(&self, sampling_rate: f64) -> usize {
        let bins =
            (self.freq_max * self.nfft as f64 / sampling_rate * (1.0 + 1e-12)).floor() as usize;
        1 + bins
    }

    /// Number of whole frames in `n` samples (partial trailing frames are dropped).
    pub fn frames(&self, n: usize) -> usize {
        if n < self.window_length {
            0
        } else {
            1 + (n - self.window_length) / self.hop
        }
    }
}

/// `max(1, round(window_length * (1 - overlap)))`.
pub fn hop_from_overlap(window_length: usize, overlap: f64) -> usize {
    assert!(
        (0.0..1.0).contains(&overlap),
        "overlap must lie in [0, 1), got {overlap}"
    );
    ((window_length as f64 * (1.0 - overlap)).round() as usize).max(1)
}

/// Magnitude grid `|S(tau, omega)|`: rows are frequencies, columns are frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramMatrix {
    pub values: Array2<f64>,
    pub freq_axis: Vec<f64>,
    pub time_axis: Vec<f64>,
    pub params: StftParams,
    pub sampling_rate: f64,
    pub segment_id: String,
}

impl SpectrogramMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

/// A reusable STFT: FFT plan plus window, for transforming many segments.
pub struct StftPlan {
    params: StftParams,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StftPlan")
            .field("params", &self.params)
            .finish()
    }
}

impl StftPlan {
    pub fn new(params: StftParams) -> Result<Self, DspError> {
        params.validate()?;
        let w = params.window_length;
        let window = (0..w)
            .map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / w as f64).cos()))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(params.nfft);
        Ok(Self {
            params,
            window,
            fft,
        })
    }

    pub fn params(&self) -> &StftParams {
        &self.params
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// One-sided magnitudes, cropped to `freq_max`.
    ///
    /// Uses the `e^{-i omega t}` kernel; the frame-relative kernel
    /// `e^{-i omega (t - tau)}` differs only by a unit-modulus factor, so the
    /// magnitudes are identical.
    pub fn magnitudes(&self, samples: &[f64], sampling_rate: f64) -> Result<Array2<f64>, DspError> {
        let p = &self.params;
        if samples.len() < p.window_length {
            return Err(DspError::SegmentTooShort {
                len: samples.len(),
                window: p.window_length,
            });
        }
        let rows = p.rows(sampling_rate);
        let cols = p.frames(samples.len());
        let mut out = Array2::zeros((rows, cols));
        let mut buf = vec![Complex64::new(0.0, 0.0); p.nfft];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for k in 0..cols {
            let frame = &samples[k * p.hop..k * p.hop + p.window_length];
            for (slot, (&x, &g)) in buf.iter_mut().zip(frame.iter().zip(&self.window)) {
                *slot = Complex64::new(x * g, 0.0);
            }
            buf[p.window_length..].fill(Complex64::new(0.0, 0.0));
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for r in 0..rows {
                out[[r, k]] = buf[r].norm();
            }
        }
        Ok(out)
    }

    pub fn transform(&self, segment: &Segment) -> Result<SpectrogramMatrix, DspError> {
        let fs = segment.sampling_rate;
        let values = self.magnitudes(&segment.samples, fs)?;
        let p = &self.params;
        let freq_axis = (0..values.nrows())
            .map(|r| r as f64 * fs / p.nfft as f64)
            .collect();
        let time_axis = (0..values.ncols())
            .map(|k| (k * p.hop) as f64 / fs)
            .collect();
        Ok(SpectrogramMatrix {
            values,
            freq_axis,
            time_axis,
            params: *p,
            sampling_rate: fs,
            segment_id: segment.segment_id.clone(),
        })
    }
}

/// STFT magnitude grid of one segment.
pub fn stft(segment: &Segment, params: &StftParams) -> Result<SpectrogramMatrix, DspError> {
    StftPlan::new(*params)?.transform(segment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::HealthLabel;

    fn seg(samples: Vec<f64>, fs: f64) -> Segment {
        Segment {
            samples,
            sampling_rate: fs,
            parent_recording: "r".into(),
            index: 0,
            label: HealthLabel::H,
            segment_id: "r#0".into(),
        }
    }

    fn params(w: usize, hop: usize) -> StftParams {
        StftParams {
            window_length: w,
            hop,
            nfft: 1600,
            freq_max: 10_000.0,
        }
    }

    #[test]
    fn hop_rounding() {
        assert_eq!(hop_from_overlap(200, 0.96), 8);
        assert_eq!(hop_from_overlap(180, 0.96), 7);
        assert_eq!(hop_from_overlap(200, 0.0), 200);
        assert_eq!(hop_from_overlap(10, 0.99), 1);
    }

    #[test]
    fn zero_segment_gives_zero_grid_with_closed_form_dims() {
        let m = stft(&seg(vec![0.0; 12_000], 48_000.0), &params(200, 8)).unwrap();
        assert_eq!((m.rows(), m.cols()), (334, 1476));
        assert!(m.values.iter().all(|&v| v == 0.0));
        assert!((m.freq_axis[1] - 30.0).abs() < 1e-12);
        assert!((m.freq_axis[333] - 9990.0).abs() < 1e-9);
        assert!((m.time_axis[1475] - 1475.0 * 8.0 / 48_000.0).abs() < 1e-12);
    }

    #[test]
    fn crop_saturates_at_nyquist() {
        let p = params(200, 8);
        assert_eq!(p.rows(12_000.0), 801);
        assert_eq!(p.full_band_rows(12_000.0), 1334);
        assert_eq!(p.rows(48_000.0), p.full_band_rows(48_000.0));
    }

    #[test]
    fn too_short_segment() {
        assert_eq!(
            stft(&seg(vec![0.0; 100], 48_000.0), &params(200, 8)).unwrap_err(),
            DspError::SegmentTooShort {
                len: 100,
                window: 200
            }
        );
    }

    #[test]
    fn invalid_params() {
        assert!(params(200, 0).validate().is_err());
        assert!(params(200, 201).validate().is_err());
        assert!(StftParams {
            nfft: 100,
            ..params(200, 8)
        }
        .validate()
        .is_err());
        assert!(StftParams {
            freq_max: 0.0,
            ..params(200, 8)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn periodic_hann() {
        let plan = StftPlan::new(params(4, 1)).unwrap();
        let w = plan.window();
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 0.5).abs() < 1e-15);
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!((w[3] - 0.5).abs() < 1e-15);
    }
}
