use vibforge::folds::{
    make_splits, plan, read_segment_table, write_fold_plan, write_split_manifest, SegmentTable,
};

use super::{load_filtered_catalog, load_plan, round_file, rounds, FOLDS_FILE, SEGMENTS_FILE};
use crate::error::CliResult;
use crate::record::Run;

/// Builds the fold plan from `segments.csv` when present, else from catalog metadata.
pub fn folds_cmd(run: &mut Run, filters: &[String]) -> CliResult<()> {
    let segments_path = run.out_path(SEGMENTS_FILE);
    let table = if filters.is_empty() && segments_path.exists() {
        let bytes = run.read_input(&segments_path)?;
        read_segment_table(&bytes[..])?
    } else {
        let catalog = load_filtered_catalog(run, filters)?;
        SegmentTable::from_catalog(&catalog, run.config.segment.length())?
    };
    let fold_plan = plan(&table, run.config.rule)?;
    let mut buf = Vec::new();
    write_fold_plan(&fold_plan, &mut buf)?;
    let path = run.write(FOLDS_FILE, &buf)?;
    for fold in 1..=fold_plan.k() {
        println!(
            "fold {fold} ({} = {}): {} segments",
            fold_plan.rule.kind,
            fold_plan.fold_values[fold - 1],
            fold_plan.fold_segments(fold).len()
        );
    }
    println!("{} folds -> {}", fold_plan.k(), path.display());
    Ok(())
}

/// Writes `splits/round-<r>.csv` for the requested round or every round.
pub fn splits_cmd(run: &mut Run, round: Option<usize>) -> CliResult<()> {
    let fold_plan = load_plan(run)?;
    for r in rounds(&fold_plan, round)? {
        let split = make_splits(&fold_plan, r, run.config.val_fraction, run.config.seed)?;
        let mut buf = Vec::new();
        write_split_manifest(&split, &mut buf)?;
        let path = run.write(&round_file("splits", r, "csv"), &buf)?;
        println!(
            "round {r}: train {} val {} test {} -> {}",
            split.train.len(),
            split.val.len(),
            split.test.len(),
            path.display()
        );
    }
    Ok(())
}
