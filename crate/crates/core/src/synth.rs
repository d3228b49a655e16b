//! Deterministic synthetic bearing signals: a shaft sinusoid, a train of
//! exponentially damped resonance bursts, and seeded Gaussian noise.
//!
//! Noise comes from [`SeededRng`] (ChaCha8 + Box–Muller, see [`crate::rng`])
//! on the stream `synth/noise` under `SynthSpec::seed`, so fixtures are
//! byte-stable across platforms.

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{
    builtin_descriptors, save_catalog, Catalog, CatalogError, Quantity, RecordingMeta,
    SensorPosition, Severity,
};
use crate::dsp::{DspError, TimeSeries};
use crate::rng::SeededRng;
use crate::HealthLabel;

/// Impulse responses are cut once their envelope `e^{-damping·τ}` drops below this.
const ENVELOPE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub recording_id: String,
    pub sampling_rate: f64,
    pub duration: f64,
    /// Bursts per second; 0 for healthy signals.
    pub impulse_rate: f64,
    pub resonance_freq: f64,
    /// Envelope decay rate in 1/s.
    pub damping: f64,
    pub impulse_amplitude: f64,
    pub shaft_freq: f64,
    pub shaft_amplitude: f64,
    pub noise_sigma: f64,
    pub label: HealthLabel,
    /// Motor load in hp, recorded in the metadata only.
    pub load_hp: Option<f64>,
    /// Defect size in inches, recorded in the metadata only. Required for faulty labels.
    pub severity_in: Option<f64>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            recording_id: "synthetic-recording".into(),
            sampling_rate: 8000.0,
            duration: 1.0,
            impulse_rate: 0.0,
            resonance_freq: 2000.0,
            damping: 500.0,
            impulse_amplitude: 1.0,
            shaft_freq: 30.0,
            shaft_amplitude: 0.5,
            noise_sigma: 0.1,
            label: HealthLabel::H,
            load_hp: None,
            severity_in: None,
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
    #[error("unknown preset {0:?} (available: mini)")]
    UnknownPreset(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        let finite = [
            self.sampling_rate,
            self.duration,
            self.impulse_rate,
            self.resonance_freq,
            self.damping,
            self.impulse_amplitude,
            self.shaft_freq,
            self.shaft_amplitude,
            self.noise_sigma,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all numeric fields must be finite".into());
        }
        if self.sampling_rate <= 0.0 || self.duration <= 0.0 {
            return bad("sampling_rate and duration must be positive".into());
        }
        if self.resonance_freq < 0.0 || self.resonance_freq >= self.sampling_rate / 2.0 {
            return bad(format!(
                "resonance_freq {} must lie below Nyquist ({})",
                self.resonance_freq,
                self.sampling_rate / 2.0
            ));
        }
        if self.impulse_rate < 0.0 || self.noise_sigma < 0.0 {
            return bad("impulse_rate and noise_sigma must be non-negative".into());
        }
        if self.impulse_rate > 0.0 && self.damping <= 0.0 {
            return bad("damping must be positive when impulses are present".into());
        }
        if self.label.is_healthy() && self.impulse_rate != 0.0 {
            return bad("healthy signals must have impulse_rate 0".into());
        }
        if self.label.is_healthy() == self.severity_in.is_some() {
            return bad(
                "severity_in is required for faulty labels and forbidden for healthy ones".into(),
            );
        }
        if (self.duration * self.sampling_rate).round() < 1.0 {
            return bad("duration is shorter than one sample".into());
        }
        Ok(())
    }

    pub fn metadata(&self) -> RecordingMeta {
        let n = (self.duration * self.sampling_rate).round();
        RecordingMeta {
            recording_id: self.recording_id.clone(),
            dataset_id: "synthetic".into(),
            equipment: "synthetic".into(),
            sampling_rate: self.sampling_rate,
            duration: n / self.sampling_rate,
            shaft_speed: Some(self.shaft_freq * 60.0),
            load: self.load_hp.map(|v| Quantity::new(v, "hp")),
            sensor_position: SensorPosition::DE,
            label: self.label,
            fault_severity: self.severity_in.map(|v| Severity::size(v, "in")),
            source_file: format!("{}.csv", self.recording_id),
            channel_pattern: String::new(),
        }
    }
}

/// Samples the signal at `t = n / sampling_rate` for `n` in `0..round(duration·fs)`.
pub fn generate(spec: &SynthSpec) -> Result<(TimeSeries, RecordingMeta), SynthError> {
    spec.validate()?;
    let fs = spec.sampling_rate;
    let n = (spec.duration * fs).round() as usize;
    let mut x: Vec<f64> = (0..n)
        .map(|i| spec.shaft_amplitude * (TAU * spec.shaft_freq * i as f64 / fs).sin())
        .collect();

    if spec.impulse_rate > 0.0 && spec.impulse_amplitude != 0.0 {
        let support = (-ENVELOPE_CUTOFF.ln()) / spec.damping;
        let mut k = 0u64;
        loop {
            let tk = k as f64 / spec.impulse_rate;
            let first = (tk * fs).ceil() as usize;
            if first >= n {
                break;
            }
            let last = (((tk + support) * fs).floor() as usize).min(n - 1);
            for (i, v) in x.iter_mut().enumerate().take(last + 1).skip(first) {
                let tau = i as f64 / fs - tk;
                if tau < 0.0 {
                    continue;
                }
                *v += spec.impulse_amplitude
                    * (-spec.damping * tau).exp()
                    * (TAU * spec.resonance_freq * tau).sin();
            }
            k += 1;
        }
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = SeededRng::derive(spec.seed, "synth/noise");
        for v in &mut x {
            *v += spec.noise_sigma * rng.standard_normal();
        }
    }
    Ok((TimeSeries::new(x, fs)?, spec.metadata()))
}

/// Class signatures of the fixture presets: `(label, impulse_rate, resonance_freq)`.
const MINI_CLASSES: [(HealthLabel, f64, f64); 4] = [
    (HealthLabel::H, 0.0, 0.0),
    (HealthLabel::I, 47.0, 2800.0),
    (HealthLabel::O, 29.0, 1700.0),
    (HealthLabel::B, 61.0, 3400.0),
];
const MINI_SEVERITIES: [f64; 4] = [0.007, 0.014, 0.021, 0.028];

/// Specs of a preset, in catalog order.
///
/// `mini`: classes H/I/O/B x loads 0-3 hp x 2 repeats = 32 recordings of
/// 10 s at 8 kHz. A faulty recording at load `l`, repeat `r` gets severity
/// index `(l + r) mod 4` of 0.007/0.014/0.021/0.028 in. Load lowers the shaft
/// frequency from 30 Hz by 0.4 Hz per hp.
pub fn preset_specs(preset: &str, seed: u64) -> Result<Vec<SynthSpec>, SynthError> {
    if preset != "mini" {
        return Err(SynthError::UnknownPreset(preset.to_string()));
    }
    let mut specs = Vec::new();
    for &(label, impulse_rate, resonance_freq) in &MINI_CLASSES {
        for load in 0..4u32 {
            for repeat in 0..2u32 {
                let severity =
                    (!label.is_healthy()).then(|| MINI_SEVERITIES[((load + repeat) % 4) as usize]);
                let sev_token = severity
                    .map(|s| format!("{:03}", (s * 1000.0).round() as u32))
                    .unwrap_or_else(|| "none".into());
                let stem = format!("syn_{label}_{load}hp_{sev_token}_r{repeat}");
                let recording_id = format!("synthetic-{stem}-DE");
                let amplitude =
                    1.0 + 0.25 * severity.map(|s| (s / 0.007).round() - 1.0).unwrap_or(0.0);
                specs.push(SynthSpec {
                    seed: crate::rng::derive_seed(seed, &recording_id),
                    recording_id,
                    sampling_rate: 8000.0,
                    duration: 10.0,
                    impulse_rate,
                    resonance_freq: if label.is_healthy() {
                        2000.0
                    } else {
                        resonance_freq
                    },
                    damping: 600.0,
                    impulse_amplitude: amplitude,
                    shaft_freq: 30.0 - 0.4 * f64::from(load),
                    shaft_amplitude: 0.5,
                    noise_sigma: 0.3,
                    label,
                    load_hp: Some(f64::from(load)),
                    severity_in: severity,
                });
            }
        }
    }
    Ok(specs)
}

/// Writes a preset's signals as 1-column CSV files under `out_dir/signals`
/// plus `catalog.csv` in `out_dir` and returns the catalog. Source paths are
/// relative to `out_dir`.
pub fn benchmark_fixture(preset: &str, seed: u64, out_dir: &Path) -> Result<Catalog, SynthError> {
    let specs = preset_specs(preset, seed)?;
    let io_err = |path: &Path, source| SynthError::Io {
        path: path.display().to_string(),
        source,
    };
    let signals = out_dir.join("signals");
    fs::create_dir_all(&signals).map_err(|e| io_err(&signals, e))?;
    let mut recordings = Vec::with_capacity(specs.len());
    for spec in &specs {
        let (series, mut meta) = generate(spec)?;
        meta.source_file = format!("signals/{}", meta.source_file);
        let path = out_dir.join(&meta.source_file);
        write_signal_csv(&path, series.samples()).map_err(|e| io_err(&path, e))?;
        recordings.push(meta);
    }
    let catalog = Catalog::new(builtin_descriptors(), recordings)?;
    save_catalog(&catalog, &out_dir.join("catalog.csv"))?;
    Ok(catalog)
}

/// One sample per line, shortest round-trip formatting.
pub fn write_signal_csv(path: &Path, samples: &[f64]) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in samples {
        writeln!(w, "{v}")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn faulty(rate: f64) -> SynthSpec {
        SynthSpec {
            impulse_rate: rate,
            label: HealthLabel::O,
            severity_in: Some(0.007),
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let s = faulty(20.0);
        assert_eq!(generate(&s).unwrap().0, generate(&s).unwrap().0);
        let other = SynthSpec {
            seed: 1,
            ..s.clone()
        };
        assert_ne!(generate(&s).unwrap().0, generate(&other).unwrap().0);
    }

    #[test]
    fn amplitude_scales_linearly_without_noise() {
        let base = SynthSpec {
            noise_sigma: 0.0,
            shaft_amplitude: 0.0,
            ..faulty(15.0)
        };
        let double = SynthSpec {
            impulse_amplitude: 2.0,
            ..base.clone()
        };
        let peak = |s: &SynthSpec| {
            generate(s)
                .unwrap()
                .0
                .samples()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        };
        assert_eq!(peak(&double), 2.0 * peak(&base));
    }

    #[test]
    fn validation() {
        let healthy_with_impulses = SynthSpec {
            impulse_rate: 5.0,
            ..SynthSpec::default()
        };
        assert!(matches!(
            generate(&healthy_with_impulses),
            Err(SynthError::InvalidSpec(_))
        ));
        let above_nyquist = SynthSpec {
            resonance_freq: 4000.0,
            ..faulty(5.0)
        };
        assert!(matches!(
            generate(&above_nyquist),
            Err(SynthError::InvalidSpec(_))
        ));
        let missing_severity = SynthSpec {
            severity_in: None,
            ..faulty(5.0)
        };
        assert!(matches!(
            generate(&missing_severity),
            Err(SynthError::InvalidSpec(_))
        ));
    }

    #[test]
    fn mini_preset_shape() {
        let specs = preset_specs("mini", 0).unwrap();
        assert_eq!(specs.len(), 32);
        assert!(specs
            .iter()
            .all(|s| s.duration == 10.0 && s.sampling_rate == 8000.0));
        let catalog = Catalog::new(
            builtin_descriptors(),
            specs.iter().map(SynthSpec::metadata).collect(),
        )
        .unwrap();
        assert_eq!(catalog.len(), 32);
        assert!(matches!(
            preset_specs("huge", 0),
            Err(SynthError::UnknownPreset(_))
        ));
    }
}
