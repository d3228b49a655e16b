//! Per-dataset adapters: default sampling rates, channel patterns, and the
//! file-name grammar that encodes each recording's operating conditions.

use std::collections::BTreeMap;
use std::path::Path;

use glob::Pattern;

use super::cwru_table::{self, FaultEnd};
use super::{DatasetDescriptor, Quantity, RecordingMeta, SensorPosition, Severity};
use crate::HealthLabel;

/// A channel available in a source file: a MAT variable name (empty for
/// text files) and its sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInfo {
    pub name: String,
    pub len: usize,
}

/// Conditions decoded from a file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct StemInfo {
    pub label: HealthLabel,
    pub fault_severity: Option<Severity>,
    pub load: Option<Quantity>,
    pub shaft_speed: Option<f64>,
    pub equipment: String,
    /// Set when the file name itself determines the rate (CWRU).
    pub sampling_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdapterOptions {
    /// Replaces the adapter's default sampling rate.
    pub sampling_rate: Option<f64>,
    /// Replaces every channel pattern with this one glob.
    pub channel_pattern: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{dataset} file {stem:?}: bad token {token:?}: {reason}")]
pub struct AdapterError {
    pub dataset: String,
    pub stem: String,
    pub token: String,
    pub reason: String,
}

type StemParser = fn(&str) -> Result<StemInfo, (String, String)>;

#[derive(Clone)]
pub struct AdapterDescriptor {
    pub dataset_id: &'static str,
    pub name: &'static str,
    pub citation: &'static str,
    pub default_sampling_rates: &'static [f64],
    /// `(sensor position, variable-name glob)` for each channel the dataset carries.
    pub channel_patterns: &'static [(&'static str, &'static str)],
    /// Human-readable file-name grammar.
    pub grammar: &'static str,
    parse: StemParser,
}

impl std::fmt::Debug for AdapterDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdapterDescriptor")
            .field("dataset_id", &self.dataset_id)
            .field("default_sampling_rates", &self.default_sampling_rates)
            .field("channel_patterns", &self.channel_patterns)
            .finish()
    }
}

impl AdapterDescriptor {
    pub fn descriptor(&self) -> DatasetDescriptor {
        DatasetDescriptor {
            name: self.name.to_string(),
            citation: self.citation.to_string(),
            default_sampling_rates: self.default_sampling_rates.to_vec(),
        }
    }

    pub fn parse_stem(&self, stem: &str) -> Result<StemInfo, AdapterError> {
        (self.parse)(stem).map_err(|(token, reason)| AdapterError {
            dataset: self.dataset_id.to_string(),
            stem: stem.to_string(),
            token,
            reason,
        })
    }

    /// Catalog rows for one source file, one per sensor channel found in it.
    pub fn recordings_for(
        &self,
        source_file: &str,
        channels: &[ChannelInfo],
        opts: &AdapterOptions,
    ) -> Result<Vec<RecordingMeta>, AdapterError> {
        let stem = Path::new(source_file)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(source_file);
        let info = self.parse_stem(stem)?;
        let err = |token: &str, reason: String| AdapterError {
            dataset: self.dataset_id.to_string(),
            stem: stem.to_string(),
            token: token.to_string(),
            reason,
        };
        let fs = opts
            .sampling_rate
            .or(info.sampling_rate)
            .unwrap_or(self.default_sampling_rates[0]);

        let text_file = channels.len() == 1 && channels[0].name.is_empty();
        let overridden;
        let patterns: &[(&str, &str)] = match &opts.channel_pattern {
            Some(p) => {
                overridden = [(self.channel_patterns[0].0, p.as_str())];
                &overridden
            }
            None => self.channel_patterns,
        };

        let mut rows = Vec::new();
        for &(position, pattern) in patterns {
            let (channel, channel_pattern) = if text_file {
                (&channels[0], String::new())
            } else {
                let glob = Pattern::new(pattern).map_err(|e| err(pattern, e.msg.to_string()))?;
                let mut found: Vec<_> = channels.iter().filter(|c| glob.matches(&c.name)).collect();
                if found.len() > 1 {
                    found.retain(|c| !c.name.ends_with("RPM"));
                }
                if found.len() > 1 {
                    // CWRU files occasionally carry a neighbour's variables; keep the file's own.
                    let own = format!("X{:0>3}_", stem);
                    found.retain(|c| c.name.starts_with(&own));
                }
                match found.as_slice() {
                    [] => continue,
                    [one] => (
                        *one,
                        if opts.channel_pattern.is_some() {
                            pattern.to_string()
                        } else {
                            one.name.clone()
                        },
                    ),
                    many => {
                        let names: Vec<_> = many.iter().map(|c| c.name.as_str()).collect();
                        return Err(err(pattern, format!("ambiguous channel match: {names:?}")));
                    }
                }
            };
            if channel.len == 0 {
                return Err(err(&channel.name, "channel has no samples".into()));
            }
            rows.push(RecordingMeta {
                recording_id: format!("{}-{}-{}", self.dataset_id, stem, position),
                dataset_id: self.dataset_id.to_string(),
                equipment: info.equipment.clone(),
                sampling_rate: fs,
                duration: channel.len as f64 / fs,
                shaft_speed: info.shaft_speed,
                load: info.load.clone(),
                sensor_position: SensorPosition::parse(position),
                label: info.label,
                fault_severity: info.fault_severity.clone(),
                source_file: source_file.to_string(),
                channel_pattern,
            });
            if text_file {
                break;
            }
        }
        if rows.is_empty() {
            let names: Vec<_> = channels.iter().map(|c| c.name.as_str()).collect();
            return Err(err(
                stem,
                format!("no channel matches {patterns:?} among {names:?}"),
            ));
        }
        Ok(rows)
    }
}

fn bad(token: &str, reason: impl Into<String>) -> (String, String) {
    (token.to_string(), reason.into())
}

fn two_digits(token: &str, prefix: char) -> Result<u32, (String, String)> {
    let rest = token
        .strip_prefix(prefix)
        .ok_or_else(|| bad(token, format!("expected prefix {prefix:?}")))?;
    if rest.len() != 2 || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(token, "expected two digits"));
    }
    Ok(rest.parse().expect("two ascii digits"))
}

fn parse_cwru(stem: &str) -> Result<StemInfo, (String, String)> {
    if stem.is_empty() || !stem.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(stem, "CWRU files are named by their numeric file id"));
    }
    let number: u32 = stem
        .parse()
        .map_err(|_| bad(stem, "file id out of range"))?;
    let f = cwru_table::lookup(number).ok_or_else(|| bad(stem, "not a known CWRU file id"))?;
    let equipment = match f.fault_end {
        FaultEnd::Fan => "SKF 6203-2RS",
        FaultEnd::Drive | FaultEnd::None => "SKF 6205-2RS",
    };
    Ok(StemInfo {
        label: f.label,
        fault_severity: f.size_in.map(|s| Severity::size(s, "in")),
        load: Some(Quantity::new(f64::from(f.load_hp), "hp")),
        shaft_speed: Some(cwru_table::RPM_BY_LOAD[f.load_hp as usize]),
        equipment: equipment.to_string(),
        sampling_rate: Some(f.sampling_rate),
    })
}

fn parse_uored(stem: &str) -> Result<StemInfo, (String, String)> {
    let tokens: Vec<_> = stem.split(['-', '_']).collect();
    let [kind, bearing, state] = tokens.as_slice() else {
        return Err(bad(stem, "expected <H|I|O|B|C>-<bearing>-<state>"));
    };
    let label = match *kind {
        "H" => HealthLabel::H,
        "I" => HealthLabel::I,
        "O" => HealthLabel::O,
        "B" => HealthLabel::B,
        "C" => HealthLabel::C,
        other => return Err(bad(other, "expected one of H, I, O, B, C")),
    };
    if bearing.is_empty() || !bearing.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(bearing, "bearing number must be digits"));
    }
    let fault_severity = match (label, *state) {
        (HealthLabel::H, "0") => None,
        (HealthLabel::H, s) => return Err(bad(s, "healthy recordings have state 0")),
        (_, "1") => Some(Severity::code("developing")),
        (_, "2") => Some(Severity::code("developed")),
        (_, s) => {
            return Err(bad(
                s,
                "faulty recordings have state 1 (developing) or 2 (developed)",
            ))
        }
    };
    Ok(StemInfo {
        label,
        fault_severity,
        load: None,
        shaft_speed: None,
        equipment: "6203".into(),
        sampling_rate: None,
    })
}

fn parse_hust(stem: &str) -> Result<StemInfo, (String, String)> {
    let split = stem
        .find(|c: char| c.is_ascii_digit())
        .unwrap_or(stem.len());
    let (kind, digits) = stem.split_at(split);
    let label = match kind {
        "N" | "H" => HealthLabel::H,
        "I" => HealthLabel::I,
        "O" => HealthLabel::O,
        "B" => HealthLabel::B,
        "IO" | "IB" | "OB" => HealthLabel::X,
        other => return Err(bad(other, "expected one of N, I, O, B, IO, IB, OB")),
    };
    if digits.len() != 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(digits, "expected <bearing digit><two-digit load code>"));
    }
    let bearing = &digits[..1];
    if !("4"..="8").contains(&bearing) {
        return Err(bad(bearing, "bearing digit must be 4..8 (6204..6208)"));
    }
    let load_code: u32 = digits[1..].parse().expect("digits");
    Ok(StemInfo {
        label,
        fault_severity: (!label.is_healthy()).then(|| Severity::code(kind)),
        load: Some(Quantity::new(f64::from(load_code * 100), "W")),
        shaft_speed: None,
        equipment: format!("620{bearing}"),
        sampling_rate: None,
    })
}

fn parse_paderborn(stem: &str) -> Result<StemInfo, (String, String)> {
    let tokens: Vec<_> = stem.split('_').collect();
    let [speed, torque, force, code, trial] = tokens.as_slice() else {
        return Err(bad(
            stem,
            "expected N<speed>_M<torque>_F<force>_<bearing code>_<trial>",
        ));
    };
    let rpm = f64::from(two_digits(speed, 'N')? * 100);
    let torque_nm = f64::from(two_digits(torque, 'M')?) / 10.0;
    two_digits(force, 'F')?;
    if trial.is_empty() || !trial.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(trial, "trial number must be digits"));
    }
    let digits_ok = |s: &str, n: usize| s.len() == n && s.bytes().all(|b| b.is_ascii_digit());
    let (label, fault_severity) = if let Some(rest) = code.strip_prefix("KA") {
        (HealthLabel::O, digits_ok(rest, 2))
    } else if let Some(rest) = code.strip_prefix("KI") {
        (HealthLabel::I, digits_ok(rest, 2))
    } else if let Some(rest) = code.strip_prefix("KB") {
        (HealthLabel::X, digits_ok(rest, 2))
    } else if let Some(rest) = code.strip_prefix('K') {
        (HealthLabel::H, digits_ok(rest, 3))
    } else {
        return Err(bad(code, "bearing code must start with K, KA, KI or KB"));
    };
    if !fault_severity {
        return Err(bad(code, "malformed bearing code"));
    }
    Ok(StemInfo {
        label,
        fault_severity: (!label.is_healthy()).then(|| Severity::code(*code)),
        load: Some(Quantity::new(torque_nm, "Nm")),
        shaft_speed: Some(rpm),
        equipment: "6204".into(),
        sampling_rate: None,
    })
}

/// Synthetic file stems: `syn_<label>_<load>hp_<severity in mils | none>_r<repeat>`,
/// e.g. `syn_I_2hp_007_r1` or `syn_H_0hp_none_r0`.
fn parse_synthetic(stem: &str) -> Result<StemInfo, (String, String)> {
    let tokens: Vec<_> = stem.split('_').collect();
    let [prefix, label, load, severity, repeat] = tokens.as_slice() else {
        return Err(bad(
            stem,
            "expected syn_<label>_<load>hp_<severity>_r<repeat>",
        ));
    };
    if *prefix != "syn" {
        return Err(bad(prefix, "expected \"syn\""));
    }
    let label: HealthLabel = label
        .parse()
        .map_err(|_| bad(label, "not a health label"))?;
    let load_hp: f64 = load
        .strip_suffix("hp")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(load, "expected <number>hp"))?;
    let fault_severity = match (*severity, label.is_healthy()) {
        ("none", true) => None,
        ("none", false) => return Err(bad(severity, "faulty recordings need a severity")),
        (_, true) => return Err(bad(severity, "healthy recordings take severity \"none\"")),
        (mils, false) => {
            let v: u32 = mils
                .parse()
                .map_err(|_| bad(mils, "severity is in thousandths of an inch"))?;
            Some(Severity::size(f64::from(v) / 1000.0, "in"))
        }
    };
    repeat
        .strip_prefix('r')
        .and_then(|r| r.parse::<u32>().ok())
        .ok_or_else(|| bad(repeat, "expected r<repeat>"))?;
    Ok(StemInfo {
        label,
        fault_severity,
        load: Some(Quantity::new(load_hp, "hp")),
        shaft_speed: None,
        equipment: "synthetic".into(),
        sampling_rate: None,
    })
}

/// Built-in adapters keyed by dataset id.
///
/// HUST and PADERBORN default to 51.2 kHz and 64 kHz; pass
/// [`AdapterOptions::sampling_rate`] to use a different rate.
pub fn builtin_adapters() -> BTreeMap<String, AdapterDescriptor> {
    let adapters = [
        AdapterDescriptor {
            dataset_id: "cwru",
            name: "Case Western Reserve University Bearing Data Center",
            citation: "Case Western Reserve University Bearing Data Center, download pages (2021)",
            default_sampling_rates: &[12_000.0, 48_000.0],
            channel_patterns: &[("DE", "*_DE_time"), ("FE", "*_FE_time"), ("BA", "*_BA_time")],
            grammar: "<file id>.mat, e.g. 109.mat; conditions from the published file index",
            parse: parse_cwru,
        },
        AdapterDescriptor {
            dataset_id: "uored_vafcls",
            name: "University of Ottawa Rolling-element Dataset - Vibration and Acoustic Faults under Constant Load and Speed",
            citation: "Sehri, Dumond & Bouchard (2023), Data in Brief 49, 109327",
            default_sampling_rates: &[42_000.0],
            channel_patterns: &[("acc", "*")],
            grammar: "<H|I|O|B|C>-<bearing>-<state 0|1|2>, e.g. B-11-2",
            parse: parse_uored,
        },
        AdapterDescriptor {
            dataset_id: "hust",
            name: "HUST bearing dataset",
            citation: "Thuan & Hong (2023)",
            default_sampling_rates: &[51_200.0],
            channel_patterns: &[("acc", "*")],
            grammar: "<N|I|O|B|IO|IB|OB><bearing 4-8><load code x100 W>, e.g. B702",
            parse: parse_hust,
        },
        AdapterDescriptor {
            dataset_id: "paderborn",
            name: "Paderborn University bearing dataset",
            citation: "Paderborn University KAt-DataCenter",
            default_sampling_rates: &[64_000.0],
            channel_patterns: &[("acc", "*vibration*")],
            grammar: "N<rpm/100>_M<Nm*10>_F<N/100>_<K###|KA##|KI##|KB##>_<trial>, e.g. N09_M07_F10_KI21_9",
            parse: parse_paderborn,
        },
        AdapterDescriptor {
            dataset_id: "synthetic",
            name: "Synthetic bearing signals",
            citation: "generated",
            default_sampling_rates: &[8_000.0],
            channel_patterns: &[("DE", "*")],
            grammar: "syn_<label>_<load>hp_<severity mils|none>_r<repeat>",
            parse: parse_synthetic,
        },
    ];
    adapters
        .into_iter()
        .map(|a| (a.dataset_id.to_string(), a))
        .collect()
}
