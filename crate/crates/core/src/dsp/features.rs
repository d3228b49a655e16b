use serde::{Deserialize, Serialize};

use super::DspError;

/// Time-domain summary statistics of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub rms: f64,
    /// Population variance (denominator N).
    pub variance: f64,
    pub skewness: f64,
    /// Non-excess kurtosis (a Gaussian scores 3).
    pub kurtosis: f64,
    pub crest_factor: f64,
    pub peak_to_peak: f64,
    pub shape_factor: f64,
    pub impulse_factor: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 8] = [
        "rms",
        "variance",
        "skewness",
        "kurtosis",
        "crest_factor",
        "peak_to_peak",
        "shape_factor",
        "impulse_factor",
    ];

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.rms,
            self.variance,
            self.skewness,
            self.kurtosis,
            self.crest_factor,
            self.peak_to_peak,
            self.shape_factor,
            self.impulse_factor,
        ]
    }
}

pub fn statistical_features(samples: &[f64]) -> Result<FeatureVector, DspError> {
    let n = samples.len();
    if n < 2 {
        return Err(DspError::TooFewSamples(n));
    }
    let first = samples[0];
    if samples.iter().all(|&x| x == first) {
        return Err(DspError::DegenerateSignal);
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    let (mut sum_sq, mut sum_abs) = (0.0, 0.0);
    let (mut lo, mut hi, mut peak) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        sum_sq += x * x;
        sum_abs += x.abs();
        lo = lo.min(x);
        hi = hi.max(x);
        peak = peak.max(x.abs());
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    if m2 == 0.0 {
        return Err(DspError::DegenerateSignal);
    }
    let rms = (sum_sq / nf).sqrt();
    let mean_abs = sum_abs / nf;
    Ok(FeatureVector {
        rms,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        crest_factor: peak / rms,
        peak_to_peak: hi - lo,
        shape_factor: rms / mean_abs,
        impulse_factor: peak / mean_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_over_whole_periods() {
        let n = 4800;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 50.0 * i as f64 / 48_000.0).sin())
            .collect();
        let f = statistical_features(&x).unwrap();
        assert!((f.rms - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
        assert!((f.crest_factor - std::f64::consts::SQRT_2).abs() < 1e-3);
        assert!((f.peak_to_peak - 2.0).abs() < 1e-9);
        assert!(f.skewness.abs() < 1e-9);
        assert!((f.kurtosis - 1.5).abs() < 1e-6);
    }

    #[test]
    fn constant_is_degenerate() {
        assert_eq!(
            statistical_features(&[5.0; 64]),
            Err(DspError::DegenerateSignal)
        );
    }

    #[test]
    fn single_sample_is_too_few() {
        assert_eq!(
            statistical_features(&[1.0]),
            Err(DspError::TooFewSamples(1))
        );
    }
}
