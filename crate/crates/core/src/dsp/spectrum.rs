use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{DspError, TimeSeries};

/// Frame-averaged one-sided magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    /// Index of the largest magnitude (first on ties).
    pub fn peak_bin(&self) -> usize {
        self.magnitudes
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &m)| {
                if m > best.1 {
                    (i, m)
                } else {
                    best
                }
            })
            .0
    }
}

/// Mean over frames of unwindowed one-sided FFT magnitudes, `frame` points each.
pub fn fourier_spectrum(
    series: &TimeSeries,
    frame: usize,
    hop: usize,
) -> Result<Spectrum, DspError> {
    if frame == 0 || hop == 0 {
        return Err(DspError::InvalidParams(format!(
            "frame ({frame}) and hop ({hop}) must be positive"
        )));
    }
    let x = series.samples();
    if x.len() < frame {
        return Err(DspError::SeriesTooShort {
            len: x.len(),
            frame,
        });
    }
    let frames = 1 + (x.len() - frame) / hop;
    let bins = frame / 2 + 1;
    let fft = FftPlanner::new().plan_fft_forward(frame);
    let mut buf = vec![Complex64::new(0.0, 0.0); frame];
    let mut acc = vec![0.0; bins];
    for k in 0..frames {
        for (slot, &v) in buf.iter_mut().zip(&x[k * hop..k * hop + frame]) {
            *slot = Complex64::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm();
        }
    }
    let fs = series.sampling_rate();
    Ok(Spectrum {
        freqs: (0..bins).map(|i| i as f64 * fs / frame as f64).collect(),
        magnitudes: acc.into_iter().map(|a| a / frames as f64).collect(),
    })
}
