//! One function per acceptance criterion. `Ok` carries a short summary,
//! `Err` the first violations found.

use std::time::Instant;

use ndarray::Array2;
use vibforge::baseline::{fit, write_model, FeatureMatrix, TrainConfig};
use vibforge::dsp::{
    hop_from_overlap, segment, Segment, SegmentLength, StftParams, StftPlan, TimeSeries, PROFILES,
};
use vibforge::eval::{
    aggregate, balanced_accuracy, confusion, macro_f1, FoldMetrics, PredictionRow, PredictionSet,
};
use vibforge::folds::{plan, DivisionKind, SegmentTable};
use vibforge::pipeline::{catalog_features, cross_validate, FeatureSettings};
use vibforge::rng::SeededRng;
use vibforge::spectro::{spectrogram_image, RenderParams};
use vibforge::synth::benchmark_fixture;
use vibforge::HealthLabel;

use super::fuzz::fuzz_case;
use super::mat_writer::{write_mat, Options, Storage, Var};
use super::oracles::{
    brute_metrics, catalog_of, fold_violations, gradient_check, naive_stft, random_catalog,
};

pub type Check = Result<String, String>;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Profile parameters with window and sampling rate divided by 4.
pub fn scaled_params() -> Vec<(f64, StftParams)> {
    PROFILES
        .iter()
        .filter(|p| p.dataset_id != "synthetic")
        .map(|p| {
            let w = p.window_length / 4;
            let fs = p.sampling_rates[0] / 4.0;
            let params = StftParams {
                window_length: w,
                hop: hop_from_overlap(w, 0.96),
                nfft: 400,
                freq_max: 2_500.0,
            };
            (fs, params)
        })
        .collect()
}

/// Largest deviation of the pipeline STFT from the oracle, relative to the
/// larger of the element and its frame's windowed-energy norm (which bounds
/// every bin of the frame).
pub fn stft_oracle_error(x: &[f64], fs: f64, params: StftParams) -> f64 {
    let fast = StftPlan::new(params).unwrap().magnitudes(x, fs).unwrap();
    let slow = naive_stft(x, fs, &params);
    let plan = StftPlan::new(params).unwrap();
    let win = plan.window();
    assert_eq!(fast.nrows(), slow.len());
    let mut worst: f64 = 0.0;
    for t in 0..fast.ncols() {
        let frame = &x[t * params.hop..t * params.hop + params.window_length];
        let norm = frame
            .iter()
            .zip(win)
            .map(|(v, g)| (v * g).powi(2))
            .sum::<f64>()
            .sqrt();
        for (r, row) in slow.iter().enumerate() {
            let (a, b) = (fast[[r, t]], row[t]);
            worst = worst.max((a - b).abs() / b.abs().max(norm).max(f64::MIN_POSITIVE));
        }
    }
    worst
}

pub fn stft_oracle() -> Check {
    let start = Instant::now();
    let sets = scaled_params();
    let mut rng = SeededRng::derive(0, "stft-oracle");
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let (fs, params) = sets[case % sets.len()];
        let n = 512 + rng.below(4096 - 512 + 1) as usize;
        let x: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        worst = worst.max(stft_oracle_error(&x, fs, params));
    }
    let secs = start.elapsed().as_secs_f64();
    if worst <= 1e-9 && secs < 60.0 {
        Ok(format!(
            "50 segments, max relative error {worst:.2e}, {secs:.1} s"
        ))
    } else {
        Err(format!("max relative error {worst:.2e}, {secs:.1} s"))
    }
}

fn dims(fs: f64, n: usize, w: usize) -> (usize, usize, usize, usize) {
    let params = StftParams {
        window_length: w,
        hop: hop_from_overlap(w, 0.96),
        nfft: 1600,
        freq_max: 10_000.0,
    };
    let seg = Segment {
        samples: (0..n).map(|i| (i as f64 * 0.37).sin()).collect(),
        sampling_rate: fs,
        parent_recording: "r".into(),
        index: 0,
        label: HealthLabel::H,
        segment_id: "r#0".into(),
    };
    let m = StftPlan::new(params).unwrap().transform(&seg).unwrap();
    let img = spectrogram_image(&m, &RenderParams::default()).unwrap();
    (m.rows(), m.cols(), img.height, img.width)
}

pub fn dimensions() -> Check {
    let cwru = dims(48_000.0, 12_000, 200);
    let uored = dims(42_000.0, 10_500, 180);
    if cwru == (334, 1476, 256, 512) && uored == (381, 1475, 256, 512) {
        Ok("CWRU 334x1476, UORED 381x1475, images 256x512".into())
    } else {
        Err(format!("CWRU {cwru:?}, UORED {uored:?}"))
    }
}

pub fn segmentation() -> Check {
    let series = TimeSeries::new(vec![0.0; 480_000], 48_000.0).unwrap();
    let segs = segment(
        &series,
        SegmentLength::Samples(12_000),
        "cwru-097",
        HealthLabel::H,
    )
    .map_err(|e| e.to_string())?;
    let by_seconds = segment(
        &series,
        SegmentLength::Duration(0.25),
        "cwru-097",
        HealthLabel::H,
    )
    .map_err(|e| e.to_string())?;
    let ok = segs.len() == 40
        && by_seconds.len() == 40
        && segs.iter().all(|s| s.samples.len() == 12_000);
    if ok {
        Ok("10 s at 48 kHz -> 40 segments of 12000".into())
    } else {
        Err(format!("{} segments", segs.len()))
    }
}

pub fn fold_properties() -> Check {
    let mut violations = Vec::new();
    let mut plans = 0;
    for seed in 0..200 {
        let recs = random_catalog(seed);
        let table = SegmentTable::from_catalog(&catalog_of(recs.clone()), SegmentLength::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let mut shuffled = recs;
        SeededRng::derive(seed, "permute").shuffle(&mut shuffled);
        let table2 = SegmentTable::from_catalog(&catalog_of(shuffled), SegmentLength::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        for kind in [DivisionKind::ByLoad, DivisionKind::BySeverity] {
            let p = plan(&table, kind).map_err(|e| format!("seed {seed} {kind}: {e}"))?;
            let p2 = plan(&table2, kind).map_err(|e| format!("seed {seed} {kind}: {e}"))?;
            plans += 1;
            violations.extend(
                fold_violations(&table, &p)
                    .into_iter()
                    .map(|v| format!("seed {seed} {kind}: {v}")),
            );
            if p != p2 {
                violations.push(format!("seed {seed} {kind}: plan depends on row order"));
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{plans} plans over 200 catalogs, 0 violations"))
    } else {
        violations.truncate(10);
        Err(violations.join("; "))
    }
}

fn scored(rows: &[(HealthLabel, HealthLabel)], classes: &[HealthLabel]) -> (f64, f64) {
    let set = PredictionSet::new(
        rows.iter()
            .enumerate()
            .map(|(i, &(truth, predicted))| PredictionRow {
                segment_id: format!("s#{i}"),
                truth,
                predicted,
            })
            .collect(),
        classes.to_vec(),
    )
    .unwrap();
    let cm = confusion(&set).unwrap();
    (balanced_accuracy(&cm).unwrap(), macro_f1(&cm).unwrap())
}

pub fn metrics() -> Check {
    use HealthLabel::*;
    let all = [H, I, O, B];
    let mut rng = SeededRng::derive(0, "metrics");
    let mut worst: f64 = 0.0;
    let mut zero_support_sets = 0;
    for _ in 0..1000 {
        let n_classes = 2 + rng.below(3) as usize;
        let classes = &all[..n_classes];
        // The last class is often left without support.
        let truth_pool = if rng.below(2) == 0 {
            n_classes - 1
        } else {
            n_classes
        };
        let n = 1 + rng.below(40) as usize;
        let rows: Vec<_> = (0..n)
            .map(|_| {
                (
                    classes[rng.below(truth_pool as u64) as usize],
                    classes[rng.below(n_classes as u64) as usize],
                )
            })
            .collect();
        if classes.iter().any(|c| rows.iter().all(|(t, _)| t != c)) {
            zero_support_sets += 1;
        }
        let (ba, f1) = scored(&rows, classes);
        let (bba, bf1) = brute_metrics(&rows, classes);
        worst = worst.max((ba - bba).abs()).max((f1 - bf1).abs());
    }
    let (ba, f1) = scored(&[(H, H), (H, I), (I, I), (O, O)], &[H, I, O]);
    let folds: Vec<FoldMetrics> = [0.90, 1.00, 0.95, 0.95]
        .iter()
        .enumerate()
        .map(|(i, &v)| FoldMetrics {
            fold: i + 1,
            balanced_accuracy: v,
            macro_f1: v,
            support: vec![],
        })
        .collect();
    let report = aggregate("m", folds).map_err(|e| e.to_string())?;
    let ok = worst <= 1e-12
        && close(ba, 0.8333, 5e-5)
        && close(f1, 0.7778, 5e-5)
        && close(report.balanced_accuracy_mean, 0.95, 1e-12)
        && close(report.balanced_accuracy_std, 0.040825, 5e-7);
    let summary = format!(
        "1000 sets ({zero_support_sets} with zero-support classes), max deviation {worst:.1e}; \
         example {ba:.4}/{f1:.4}; aggregate {:.2} +/- {:.6}",
        report.balanced_accuracy_mean, report.balanced_accuracy_std
    );
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

pub fn gradient_configs(n_configs: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for case in 0..n_configs {
        let mut rng = SeededRng::derive(case, "gradient");
        let n = 2 + rng.below(20) as usize;
        let d = 1 + rng.below(8) as usize;
        let c = 2 + rng.below(4) as usize;
        let lambda = if rng.below(3) == 0 {
            0.0
        } else {
            rng.uniform() * 0.1
        };
        let w = Array2::from_shape_fn((c, d + 1), |_| rng.standard_normal() * 0.5);
        let x = Array2::from_shape_fn((n, d), |_| rng.standard_normal());
        let y: Vec<usize> = (0..n).map(|_| rng.below(c as u64) as usize).collect();
        worst = worst.max(gradient_check(&w, x.view(), &y, lambda));
    }
    worst
}

pub fn toy_features(seed: u64, n: usize, tag: &str) -> FeatureMatrix {
    let mut rng = SeededRng::derive(seed, tag);
    let labels = [HealthLabel::H, HealthLabel::I, HealthLabel::O];
    FeatureMatrix::from_rows(
        (0..n)
            .map(|i| {
                let l = i % 3;
                let v = (0..6)
                    .map(|j| if j == l { 3.0 } else { 0.0 } + rng.standard_normal())
                    .collect();
                (format!("{tag}#{i}"), labels[l], v)
            })
            .collect(),
    )
    .unwrap()
}

pub fn train_bytes(seed: u64) -> (Vec<u8>, String) {
    let train = toy_features(1, 90, "train");
    let val = toy_features(2, 30, "val");
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let classes = [HealthLabel::H, HealthLabel::I, HealthLabel::O];
    let (model, trace) = fit(&train, &val, &classes, &cfg).unwrap();
    let mut buf = Vec::new();
    write_model(&model, &mut buf).unwrap();
    let weights: String = model
        .weights
        .iter()
        .map(|v| format!("{:016x}", v.to_bits()))
        .collect();
    (
        buf,
        format!("{weights}{}", serde_json::to_string(&trace).unwrap()),
    )
}

pub fn baseline_numerics() -> Check {
    let worst = gradient_configs(100);
    let a = train_bytes(7);
    let b = train_bytes(7);
    let c = train_bytes(8);
    let summary = format!(
        "max gradient relative error {worst:.1e}; reruns identical: {}; other seed differs: {}",
        a == b,
        a != c
    );
    if worst <= 1e-5 && a == b {
        Ok(summary)
    } else {
        Err(summary)
    }
}

pub fn end_to_end() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let catalog = benchmark_fixture("mini", 0, dir.path()).map_err(|e| e.to_string())?;
    let settings = FeatureSettings::default();
    let features = catalog_features(&catalog, dir.path(), &settings).map_err(|e| e.to_string())?;
    let table =
        SegmentTable::from_catalog(&catalog, settings.segment_length).map_err(|e| e.to_string())?;
    let p = plan(&table, DivisionKind::ByLoad).map_err(|e| e.to_string())?;
    let (_, report) = cross_validate(
        &features,
        &p,
        0.2,
        0,
        &TrainConfig::default(),
        None,
        "softmax",
    )
    .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let summary = format!(
        "{} segments, {} folds, balanced accuracy {:.4} +/- {:.4}, {secs:.1} s",
        features.n_rows(),
        p.k(),
        report.balanced_accuracy_mean,
        report.balanced_accuracy_std
    );
    if report.balanced_accuracy_mean >= 0.9 && secs < 300.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

pub fn dual_encoding_identical() -> bool {
    let vars = vec![
        Var::column(
            "X097_DE_time",
            (0..500).map(|i| (i as f64 * 0.01).cos()).collect(),
        ),
        Var {
            name: "X097RPM".into(),
            rows: 1,
            cols: 1,
            data: vec![1796.0],
            storage: Storage::Double,
        },
    ];
    let decode = |compressed| {
        vibforge::matio::parse_mat(&write_mat(
            &vars,
            Options {
                big_endian: false,
                compressed,
            },
        ))
        .map(|f| {
            f.variables
                .into_iter()
                .map(|v| (v.name, v.dims, v.data))
                .collect::<Vec<_>>()
        })
    };
    match (decode(false), decode(true)) {
        (Ok(a), Ok(b)) => a == b && a.len() == 2 && a[0].2 == vars[0].data,
        _ => false,
    }
}

pub fn parser_robustness() -> Check {
    let failures: Vec<String> = (0..500).filter_map(|c| fuzz_case(c).err()).collect();
    let dual = dual_encoding_identical();
    if failures.is_empty() && dual {
        Ok("dual encodings identical; 500 fuzz cases, only typed errors".into())
    } else {
        Err(format!("dual encodings identical: {dual}; {failures:?}"))
    }
}
