use std::fmt::Write as _;
use std::path::PathBuf;

use vibforge::catalog::{builtin_adapters, datasets_path, ingest, save_catalog, AdapterOptions};
use vibforge::dsp::{fourier_spectrum, segment_count, segment_id};
use vibforge::folds::{write_segment_table, SegmentRecord, SegmentTable};
use vibforge::pipeline::load_series;
use vibforge::synth::benchmark_fixture;

use super::{load_filtered_catalog, note_sources, par_map, SEGMENTS_FILE};
use crate::error::{CliError, CliResult};
use crate::record::Run;

pub struct IngestArgs {
    pub adapter: String,
    pub root: Option<PathBuf>,
    pub sampling_rate: Option<f64>,
    pub channel_pattern: Option<String>,
}

pub fn ingest_cmd(run: &mut Run, args: IngestArgs) -> CliResult<()> {
    let adapters = builtin_adapters();
    let adapter = adapters.get(&args.adapter).ok_or_else(|| {
        let known: Vec<&str> = adapters.keys().map(String::as_str).collect();
        CliError::usage(format!(
            "unknown adapter {:?} (available: {})",
            args.adapter,
            known.join(", ")
        ))
    })?;
    let root = args
        .root
        .or_else(|| run.config.data_root.clone())
        .ok_or_else(|| CliError::usage("no dataset root: pass --root or set VIBFORGE_DATA_DIR"))?;
    let opts = AdapterOptions {
        sampling_rate: args.sampling_rate,
        channel_pattern: args.channel_pattern,
    };
    let catalog = ingest(&root, adapter, &opts)?;
    let path = run.config.catalog.clone();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::internal("OUTPUT", format!("{}: {e}", parent.display())))?;
    }
    save_catalog(&catalog, &path)?;
    run.note_output(&path);
    run.note_output(&datasets_path(&path));
    println!(
        "{} recordings from {} -> {}",
        catalog.len(),
        root.display(),
        path.display()
    );
    Ok(())
}

pub fn synth_cmd(run: &mut Run, preset: &str) -> CliResult<()> {
    let out = run.out_dir().to_path_buf();
    let catalog = benchmark_fixture(preset, run.config.seed, &out)?;
    let path = out.join("catalog.csv");
    run.note_output(&path);
    run.note_output(&datasets_path(&path));
    for rec in catalog.sorted() {
        run.note_output(&out.join(&rec.source_file));
    }
    println!(
        "preset {preset}: {} recordings -> {}",
        catalog.len(),
        path.display()
    );
    Ok(())
}

/// Reads every signal and writes `segments.csv` with the actual segment counts.
pub fn segment_cmd(run: &mut Run, filters: &[String]) -> CliResult<()> {
    let catalog = load_filtered_catalog(run, filters)?;
    note_sources(run, &catalog)?;
    let root = run.config.data_root();
    let length = run.config.segment.length();
    let recs = catalog.sorted();
    let per_recording = par_map(run.config.jobs, &recs, |rec| {
        let series = load_series(rec, &root)?;
        let len = length.samples(rec.sampling_rate)?;
        Ok((0..segment_count(series.len(), len))
            .map(|index| SegmentRecord {
                segment_id: segment_id(&rec.recording_id, index),
                recording_id: rec.recording_id.clone(),
                dataset_id: rec.dataset_id.clone(),
                label: rec.label,
                load: rec.load_value(),
                severity: rec.severity_value(),
            })
            .collect::<Vec<_>>())
    })?;
    let table = SegmentTable {
        rows: per_recording.into_iter().flatten().collect(),
        catalog_hash: catalog.content_hash(),
    };
    let mut buf = Vec::new();
    write_segment_table(&table, &mut buf)?;
    let path = run.write(SEGMENTS_FILE, &buf)?;
    println!(
        "{} segments from {} recordings -> {}",
        table.len(),
        recs.len(),
        path.display()
    );
    Ok(())
}

pub struct SpectrumArgs {
    pub recordings: Vec<String>,
    pub filters: Vec<String>,
    pub frame: usize,
    pub hop: Option<usize>,
}

/// Frame-averaged magnitude spectrum per recording as long-format CSV.
pub fn spectrum_cmd(run: &mut Run, args: SpectrumArgs) -> CliResult<()> {
    let mut catalog = load_filtered_catalog(run, &args.filters)?;
    if !args.recordings.is_empty() {
        if let Some(missing) = args.recordings.iter().find(|id| catalog.get(id).is_none()) {
            return Err(CliError::data(
                "CATALOG",
                format!("recording {missing:?} not in the catalog"),
            ));
        }
        catalog = catalog.filtered(|r| args.recordings.contains(&r.recording_id));
    }
    note_sources(run, &catalog)?;
    let root = run.config.data_root();
    let hop = args.hop.unwrap_or((args.frame / 2).max(1));
    let recs = catalog.sorted();
    let spectra = par_map(run.config.jobs, &recs, |rec| {
        let series = load_series(rec, &root)?;
        Ok(fourier_spectrum(&series, args.frame, hop)?)
    })?;
    let mut csv = String::from("recording_id,freq_hz,magnitude\n");
    for (rec, spectrum) in recs.iter().zip(&spectra) {
        for (f, m) in spectrum.freqs.iter().zip(&spectrum.magnitudes) {
            writeln!(csv, "{},{f},{m}", rec.recording_id).expect("write to string");
        }
    }
    let path = run.write("spectrum.csv", csv.as_bytes())?;
    println!("{} spectra -> {}", spectra.len(), path.display());
    Ok(())
}
