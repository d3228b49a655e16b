use glob::Pattern;

use super::{ChannelError, MatFile};
use crate::dsp::TimeSeries;

/// Selects one sensor channel by glob pattern over the variable names.
///
/// Several matches are resolved by discarding names ending in `RPM` (the
/// tachometer scalars CWRU files carry next to each channel); if exactly one
/// candidate survives it wins, otherwise the call is ambiguous.
pub fn extract_channel(
    file: &MatFile,
    name_pattern: &str,
    sampling_rate: f64,
) -> Result<TimeSeries, ChannelError> {
    let pattern = Pattern::new(name_pattern).map_err(|e| ChannelError::BadPattern {
        pattern: name_pattern.to_string(),
        reason: e.msg.to_string(),
    })?;
    let matches: Vec<_> = file
        .variables
        .iter()
        .filter(|v| pattern.matches(&v.name))
        .collect();

    let chosen = match matches.as_slice() {
        [] => {
            return Err(ChannelError::NoMatch {
                pattern: name_pattern.to_string(),
                available: file.variables.iter().map(|v| v.name.clone()).collect(),
            })
        }
        [only] => *only,
        many => {
            let signals: Vec<_> = many.iter().filter(|v| !v.name.ends_with("RPM")).collect();
            match signals.as_slice() {
                [only] => **only,
                _ => {
                    return Err(ChannelError::MatchAmbiguous {
                        pattern: name_pattern.to_string(),
                        matches: many.iter().map(|v| v.name.clone()).collect(),
                    })
                }
            }
        }
    };
    Ok(TimeSeries::new(chosen.data.clone(), sampling_rate)?)
}
