use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Bearing health state of a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HealthLabel {
    /// Healthy.
    H,
    /// Inner race fault.
    I,
    /// Outer race fault.
    O,
    /// Ball (rolling element) fault.
    B,
    /// Cage fault.
    C,
    /// Compound fault (more than one defect location).
    X,
}

impl HealthLabel {
    pub const ALL: [HealthLabel; 6] = [
        HealthLabel::H,
        HealthLabel::I,
        HealthLabel::O,
        HealthLabel::B,
        HealthLabel::C,
        HealthLabel::X,
    ];

    /// The four states accepted by benchmark fold plans.
    pub const BENCHMARK: [HealthLabel; 4] = [
        HealthLabel::H,
        HealthLabel::I,
        HealthLabel::O,
        HealthLabel::B,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HealthLabel::H => "H",
            HealthLabel::I => "I",
            HealthLabel::O => "O",
            HealthLabel::B => "B",
            HealthLabel::C => "C",
            HealthLabel::X => "X",
        }
    }

    pub fn is_healthy(self) -> bool {
        self == HealthLabel::H
    }

    pub fn is_benchmark(self) -> bool {
        Self::BENCHMARK.contains(&self)
    }
}

impl fmt::Display for HealthLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown health label {0:?} (expected one of H, I, O, B, C, X)")]
pub struct ParseLabelError(pub String);

impl FromStr for HealthLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "H" => Ok(HealthLabel::H),
            "I" => Ok(HealthLabel::I),
            "O" => Ok(HealthLabel::O),
            "B" => Ok(HealthLabel::B),
            "C" => Ok(HealthLabel::C),
            "X" => Ok(HealthLabel::X),
            other => Err(ParseLabelError(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_round_trip() {
        for label in HealthLabel::ALL {
            assert_eq!(label.to_string().parse::<HealthLabel>().unwrap(), label);
        }
        assert!("healthy".parse::<HealthLabel>().is_err());
    }

    #[test]
    fn benchmark_subset() {
        assert!(HealthLabel::B.is_benchmark());
        assert!(!HealthLabel::C.is_benchmark());
        assert!(!HealthLabel::X.is_benchmark());
    }
}
