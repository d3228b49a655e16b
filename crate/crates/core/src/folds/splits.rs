use std::collections::BTreeMap;

use super::{sort_segment_ids, FoldError, FoldPlan, SplitManifest};
use crate::dsp::parse_segment_id;
use crate::rng::SeededRng;

pub const DEFAULT_VAL_FRACTION: f64 = 0.2;

/// Test = fold `round`. The other folds' recordings are sorted by id,
/// shuffled with a stream derived from `seed` and `round`, and moved into
/// val one whole recording at a time until val holds at least
/// `val_fraction` of the non-test segments. The last remaining recording
/// always stays in train.
pub fn make_splits(
    plan: &FoldPlan,
    round: usize,
    val_fraction: f64,
    seed: u64,
) -> Result<SplitManifest, FoldError> {
    let k = plan.k();
    if k < 2 || round == 0 || round > k {
        return Err(FoldError::InvalidRound { round, k });
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(FoldError::InvalidFraction(val_fraction));
    }
    let mut test = Vec::new();
    let mut by_recording: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (seg, &fold) in &plan.assignment {
        if fold == round {
            test.push(seg.clone());
        } else {
            let (rec, _) =
                parse_segment_id(seg).ok_or_else(|| FoldError::BadSegmentId(seg.clone()))?;
            by_recording.entry(rec).or_default().push(seg.clone());
        }
    }
    let remaining: usize = by_recording.values().map(Vec::len).sum();
    let target = val_fraction * remaining as f64;

    let mut recordings: Vec<&str> = by_recording.keys().copied().collect();
    SeededRng::derive(seed, &format!("splits/round-{round}")).shuffle(&mut recordings);

    let mut val = Vec::new();
    let mut moved = 0;
    for rec in &recordings {
        if val.len() as f64 >= target || moved + 1 == recordings.len() {
            break;
        }
        val.extend(by_recording[rec].iter().cloned());
        moved += 1;
    }
    let in_val: std::collections::HashSet<&str> = recordings[..moved].iter().copied().collect();
    let mut train: Vec<String> = by_recording
        .iter()
        .filter(|(rec, _)| !in_val.contains(*rec))
        .flat_map(|(_, segs)| segs.iter().cloned())
        .collect();

    sort_segment_ids(&mut train);
    sort_segment_ids(&mut val);
    sort_segment_ids(&mut test);
    Ok(SplitManifest {
        kind: plan.rule.kind,
        round,
        seed,
        val_fraction,
        train,
        val,
        test,
    })
}
