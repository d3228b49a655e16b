use super::stft::{hop_from_overlap, StftParams};

/// Per-dataset spectrogram preprocessing defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetProfile {
    pub dataset_id: &'static str,
    /// Segment length at the primary sampling rate.
    pub signal_length: usize,
    pub window_length: usize,
    /// Nominal sampling rates in Hz, primary first.
    pub sampling_rates: &'static [f64],
}

pub const NFFT: usize = 1600;
pub const OVERLAP: f64 = 0.96;
pub const FREQ_MAX_HZ: f64 = 10_000.0;

pub const PROFILES: [DatasetProfile; 5] = [
    DatasetProfile {
        dataset_id: "cwru",
        signal_length: 12_000,
        window_length: 200,
        sampling_rates: &[48_000.0, 12_000.0],
    },
    DatasetProfile {
        dataset_id: "uored_vafcls",
        signal_length: 10_500,
        window_length: 180,
        sampling_rates: &[42_000.0],
    },
    DatasetProfile {
        dataset_id: "hust",
        signal_length: 12_800,
        window_length: 200,
        sampling_rates: &[51_200.0],
    },
    DatasetProfile {
        dataset_id: "paderborn",
        signal_length: 16_000,
        window_length: 180,
        sampling_rates: &[64_000.0],
    },
    DatasetProfile {
        dataset_id: "synthetic",
        signal_length: 2_000,
        window_length: 200,
        sampling_rates: &[8_000.0],
    },
];

impl DatasetProfile {
    pub fn lookup(dataset_id: &str) -> Option<&'static DatasetProfile> {
        PROFILES.iter().find(|p| p.dataset_id == dataset_id)
    }

    pub fn stft_params(&self) -> StftParams {
        StftParams {
            window_length: self.window_length,
            hop: hop_from_overlap(self.window_length, OVERLAP),
            nfft: NFFT,
            freq_max: FREQ_MAX_HZ,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hops_follow_overlap() {
        let hops: Vec<_> = PROFILES.iter().map(|p| p.stft_params().hop).collect();
        assert_eq!(hops, vec![8, 7, 8, 7, 8]);
    }

    #[test]
    fn signal_length_is_quarter_second_at_primary_rate() {
        for p in &PROFILES {
            assert_eq!(
                (p.sampling_rates[0] * 0.25).round() as usize,
                p.signal_length,
                "{}",
                p.dataset_id
            );
        }
    }
}
