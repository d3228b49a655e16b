pub mod data;
pub mod evaluate;
pub mod images;
pub mod model;
pub mod split;

use std::path::Path;

use rayon::prelude::*;
use vibforge::baseline::{read_features, FeatureMatrix};
use vibforge::catalog::{load_catalog, Catalog, RecordingFilter};
use vibforge::folds::{make_splits, read_fold_plan, read_split_manifest, FoldPlan, SplitManifest};
use vibforge::pipeline::{catalog_features, recording_features};

use crate::error::{CliError, CliResult};
use crate::record::Run;

pub const FOLDS_FILE: &str = "folds.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const SEGMENTS_FILE: &str = "segments.csv";
pub const IMAGES_MANIFEST: &str = "images.csv";

pub fn round_file(dir: &str, round: usize, ext: &str) -> String {
    format!("{dir}/round-{round}.{ext}")
}

/// Loads the configured catalog, keeping recordings that match every `key=value` filter.
pub fn load_filtered_catalog(run: &mut Run, filters: &[String]) -> CliResult<Catalog> {
    let path = run.config.catalog.clone();
    let catalog = load_catalog(&path)?;
    run.note_input(&path)?;
    let mut filter = RecordingFilter::default();
    for clause in filters {
        filter.add_clause(clause)?;
    }
    let kept = catalog.filtered(|r| filter.matches(r));
    if kept.is_empty() {
        return Err(CliError::data("CATALOG", "no recordings match the filters"));
    }
    Ok(kept)
}

/// Records the hash of every signal file the catalog points to.
pub fn note_sources(run: &mut Run, catalog: &Catalog) -> CliResult<()> {
    let root = run.config.data_root();
    for rec in catalog.sorted() {
        run.note_input(&Catalog::resolve_source(rec, &root))?;
    }
    Ok(())
}

/// Maps `f` over `items` on at most `jobs` threads, keeping input order.
pub fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CliResult<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::internal("THREADS", e))?;
    pool.install(|| items.par_iter().map(f).collect())
}

pub fn load_plan(run: &mut Run) -> CliResult<FoldPlan> {
    let path = run.out_path(FOLDS_FILE);
    if !path.exists() {
        return Err(CliError::data(
            "INPUT",
            format!("{} not found; run `vibforge folds` first", path.display()),
        ));
    }
    let bytes = run.read_input(&path)?;
    Ok(read_fold_plan(&bytes[..])?)
}

/// The split manifest for `round`: the stored file when present, else derived
/// from the plan with the configured seed and val fraction.
pub fn split_for_round(run: &mut Run, plan: &FoldPlan, round: usize) -> CliResult<SplitManifest> {
    let path = run.out_path(&round_file("splits", round, "csv"));
    if path.exists() {
        let bytes = run.read_input(&path)?;
        let split = read_split_manifest(&bytes[..])?;
        if split.round != round || split.kind != plan.rule.kind {
            return Err(CliError::data(
                "FOLDS",
                format!(
                    "{} is for {} round {}, expected {} round {round}",
                    path.display(),
                    split.kind,
                    split.round,
                    plan.rule.kind
                ),
            ));
        }
        return Ok(split);
    }
    Ok(make_splits(
        plan,
        round,
        run.config.val_fraction,
        run.config.seed,
    )?)
}

/// Rounds to run: the one requested, or all of `1..=K`.
pub fn rounds(plan: &FoldPlan, round: Option<usize>) -> CliResult<Vec<usize>> {
    match round {
        Some(r) if r == 0 || r > plan.k() => Err(CliError::data(
            "FOLDS",
            format!("round {r} is outside 1..={}", plan.k()),
        )),
        Some(r) => Ok(vec![r]),
        None => Ok((1..=plan.k()).collect()),
    }
}

/// Pooled spectrogram features for every catalog recording, in catalog order.
pub fn compute_features(run: &mut Run, catalog: &Catalog) -> CliResult<FeatureMatrix> {
    note_sources(run, catalog)?;
    let root = run.config.data_root();
    let settings = run.config.feature_settings();
    if run.config.jobs == 1 {
        return Ok(catalog_features(catalog, &root, &settings)?);
    }
    let recs = catalog.sorted();
    let per_recording = par_map(run.config.jobs, &recs, |rec| {
        Ok(recording_features(rec, &root, &settings)?)
    })?;
    Ok(FeatureMatrix::from_rows(
        per_recording.into_iter().flatten().collect(),
    )?)
}

/// `features.csv` from the output directory when present, else computed from the catalog.
pub fn features_or_compute(run: &mut Run) -> CliResult<FeatureMatrix> {
    let path = run.out_path(FEATURES_FILE);
    if path.exists() {
        return read_features_file(run, &path);
    }
    let catalog = load_filtered_catalog(run, &[])?;
    compute_features(run, &catalog)
}

pub fn read_features_file(run: &mut Run, path: &Path) -> CliResult<FeatureMatrix> {
    let bytes = run.read_input(path)?;
    Ok(read_features(&bytes[..])?)
}
