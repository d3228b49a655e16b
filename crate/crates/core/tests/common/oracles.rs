//! Reference implementations written straight from the definitions, with
//! no shared code paths with the library.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use vibforge::baseline::loss_and_gradient;
use vibforge::catalog::{Catalog, Quantity, RecordingMeta, SensorPosition, Severity};
use vibforge::dsp::StftParams;
use vibforge::folds::{DivisionKind, FoldPlan, SegmentTable};
use vibforge::rng::SeededRng;
use vibforge::HealthLabel;

/// Direct O(N^2) windowed DFT magnitudes, rows = kept bins, cols = frames.
pub fn naive_stft(x: &[f64], fs: f64, p: &StftParams) -> Vec<Vec<f64>> {
    let w = p.window_length;
    let window: Vec<f64> = (0..w)
        .map(|n| (PI * n as f64 / w as f64).sin().powi(2))
        .collect();
    let frames = if x.len() < w {
        0
    } else {
        (x.len() - w) / p.hop + 1
    };
    let top = p.freq_max.min(fs / 2.0);
    let rows = (0..=p.nfft / 2)
        .take_while(|&k| k as f64 * fs / p.nfft as f64 <= top * (1.0 + 1e-12))
        .count();
    let mut out = vec![vec![0.0; frames]; rows];
    for (t, col) in (0..frames).map(|t| (t, t * p.hop)) {
        for (k, row) in out.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for n in 0..w {
                let v = x[col + n] * window[n];
                let ang = -2.0 * PI * (k * n % p.nfft) as f64 / p.nfft as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            row[t] = re.hypot(im);
        }
    }
    out
}

/// Balanced accuracy and macro-F1 by enumerating rows once per class.
pub fn brute_metrics(rows: &[(HealthLabel, HealthLabel)], classes: &[HealthLabel]) -> (f64, f64) {
    let mut recalls = Vec::new();
    let mut f1s = Vec::new();
    for &c in classes {
        let support = rows.iter().filter(|(t, _)| *t == c).count();
        if support == 0 {
            continue;
        }
        let tp = rows.iter().filter(|(t, p)| *t == c && *p == c).count();
        let fp = rows.iter().filter(|(t, p)| *t != c && *p == c).count();
        let fn_ = support - tp;
        recalls.push(tp as f64 / support as f64);
        let denom = 2 * tp + fp + fn_;
        f1s.push(if tp == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        });
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    (mean(&recalls), mean(&f1s))
}

/// Largest relative error between the analytic gradient and central differences.
pub fn gradient_check(w: &Array2<f64>, x: ArrayView2<f64>, y: &[usize], lambda: f64) -> f64 {
    let (_, analytic) = loss_and_gradient(w, x, y, lambda);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for idx in 0..w.len() {
        let (r, c) = (idx / w.ncols(), idx % w.ncols());
        let mut plus = w.clone();
        plus[[r, c]] += h;
        let mut minus = w.clone();
        minus[[r, c]] -= h;
        let numeric = (loss_and_gradient(&plus, x, y, lambda).0
            - loss_and_gradient(&minus, x, y, lambda).0)
            / (2.0 * h);
        let a = analytic[[r, c]];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
        worst = worst.max(err);
    }
    worst
}

/// Textbook one-way ANOVA F for one feature column.
pub fn anova_f(values: &[f64], labels: &[HealthLabel]) -> f64 {
    let mut groups: BTreeMap<HealthLabel, Vec<f64>> = BTreeMap::new();
    for (&v, &l) in values.iter().zip(labels) {
        groups.entry(l).or_default().push(v);
    }
    let n = values.len() as f64;
    let k = groups.len() as f64;
    let grand = values.iter().sum::<f64>() / n;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups.values() {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    (ssb / (k - 1.0)) / (ssw / (n - k))
}

pub fn recording(
    id: &str,
    label: HealthLabel,
    load: Option<f64>,
    severity: Option<f64>,
    duration: f64,
) -> RecordingMeta {
    RecordingMeta {
        recording_id: id.to_string(),
        dataset_id: "synthetic".into(),
        equipment: "synthetic".into(),
        sampling_rate: 8000.0,
        duration,
        shaft_speed: Some(1800.0),
        load: load.map(|v| Quantity::new(v, "hp")),
        sensor_position: SensorPosition::DE,
        label,
        fault_severity: severity.map(|v| Severity::size(v, "in")),
        source_file: format!("{id}.csv"),
        channel_pattern: String::new(),
    }
}

/// A random catalog that admits both divisions: every faulty recording has
/// a severity, and healthy loads never rank above the number of severities.
pub fn random_catalog(seed: u64) -> Vec<RecordingMeta> {
    let mut rng = SeededRng::new(seed);
    let n_loads = 2 + rng.below(3) as usize;
    let n_sev = 2 + rng.below(3) as usize;
    let loads: Vec<f64> = (0..n_loads).map(|i| i as f64 * 0.5).collect();
    let sevs: Vec<f64> = (1..=n_sev).map(|i| i as f64 * 0.007).collect();
    let mut recs = Vec::new();
    let n = 6 + rng.below(20) as usize;
    for i in 0..n {
        let label = [
            HealthLabel::H,
            HealthLabel::I,
            HealthLabel::O,
            HealthLabel::B,
            HealthLabel::C,
            HealthLabel::X,
        ][rng.below(6) as usize];
        let load_pool = if label.is_healthy() {
            &loads[..n_loads.min(n_sev)]
        } else {
            &loads[..]
        };
        let load = load_pool[rng.below(load_pool.len() as u64) as usize];
        let severity = (!label.is_healthy()).then(|| sevs[rng.below(n_sev as u64) as usize]);
        let duration = 0.25 * (1 + rng.below(8)) as f64 + 0.1 * rng.uniform();
        recs.push(recording(
            &format!("r{i:03}_{label}"),
            label,
            Some(load),
            severity,
            duration,
        ));
    }
    // Every severity appears on a benchmark label, so K = n_sev bounds the
    // load rank of every healthy recording.
    for (j, &s) in sevs.iter().enumerate() {
        recs.push(recording(
            &format!("anchor{j}"),
            HealthLabel::O,
            Some(loads[j % n_loads]),
            Some(s),
            1.0,
        ));
    }
    recs
}

/// Every fold-plan invariant, as a list of violations.
pub fn fold_violations(table: &SegmentTable, plan: &FoldPlan) -> Vec<String> {
    let mut v = Vec::new();
    let bench: Vec<_> = table
        .rows
        .iter()
        .filter(|r| r.label.is_benchmark())
        .collect();
    if plan.k() < 2 {
        v.push(format!("k = {}", plan.k()));
    }
    if plan.assignment.len() != bench.len() {
        v.push(format!(
            "{} assigned, {} benchmark segments",
            plan.assignment.len(),
            bench.len()
        ));
    }
    for r in &table.rows {
        let fold = plan.fold_of(&r.segment_id);
        if !r.label.is_benchmark() {
            if fold.is_some() {
                v.push(format!("{} ({}) assigned", r.segment_id, r.label));
            }
            continue;
        }
        let Some(f) = fold else {
            v.push(format!("{} unassigned", r.segment_id));
            continue;
        };
        if f == 0 || f > plan.k() {
            v.push(format!("{} in fold {f}", r.segment_id));
            continue;
        }
        let value = plan.fold_values[f - 1];
        match plan.rule.kind {
            DivisionKind::ByLoad => {
                if r.load != Some(value) {
                    v.push(format!(
                        "{} load {:?} in fold {value}",
                        r.segment_id, r.load
                    ));
                }
            }
            DivisionKind::BySeverity => {
                if r.label.is_healthy() {
                    let loads: BTreeSet<u64> = bench
                        .iter()
                        .filter_map(|b| b.load.map(f64::to_bits))
                        .collect();
                    let mut loads: Vec<f64> = loads.into_iter().map(f64::from_bits).collect();
                    loads.sort_by(f64::total_cmp);
                    let want = loads.iter().position(|&l| Some(l) == r.load).map(|p| p + 1);
                    if want != Some(f) {
                        v.push(format!(
                            "healthy {} in fold {f}, load rank {want:?}",
                            r.segment_id
                        ));
                    }
                } else if r.severity != Some(value) {
                    v.push(format!(
                        "{} severity {:?} in fold {value}",
                        r.segment_id, r.severity
                    ));
                }
            }
        }
    }
    let mut rec_fold: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &bench {
        if let Some(f) = plan.fold_of(&r.segment_id) {
            if let Some(&prev) = rec_fold.get(r.recording_id.as_str()) {
                if prev != f {
                    v.push(format!("recording {} split over folds", r.recording_id));
                }
            }
            rec_fold.insert(&r.recording_id, f);
        }
    }
    let mut values = plan.fold_values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values != plan.fold_values || values.len() != plan.k() {
        v.push("fold values not strictly ascending".into());
    }
    v
}

pub fn catalog_of(recs: Vec<RecordingMeta>) -> Catalog {
    Catalog::new(vibforge::catalog::builtin_descriptors(), recs).expect("valid catalog")
}
