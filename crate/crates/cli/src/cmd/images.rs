use vibforge::dsp::StftPlan;
use vibforge::pipeline::recording_segments;
use vibforge::spectro::{encode_png, spectrogram_image, ImageRow, ImagesManifestWriter};

use super::{load_filtered_catalog, load_plan, note_sources, par_map, IMAGES_MANIFEST};
use crate::error::CliResult;
use crate::record::{write_file, Run};

/// Renders every segment to `images/<segment_id>.png` and lists them in `images.csv`.
pub fn spectrogram_cmd(run: &mut Run, filters: &[String], with_folds: bool) -> CliResult<()> {
    let catalog = load_filtered_catalog(run, filters)?;
    let plan = if with_folds {
        Some(load_plan(run)?)
    } else {
        None
    };
    note_sources(run, &catalog)?;
    let root = run.config.data_root();
    let settings = run.config.feature_settings();
    let render = run.config.render;
    let out_dir = run.out_dir().to_path_buf();
    let recs = catalog.sorted();

    let per_recording = par_map(run.config.jobs, &recs, |rec| {
        let stft = StftPlan::new(settings.stft_for(&rec.dataset_id)?)?;
        let mut rows = Vec::new();
        for seg in recording_segments(rec, &root, settings.segment_length)? {
            let image = spectrogram_image(&stft.transform(&seg)?, &render)?;
            let png_path = format!("images/{}.png", seg.segment_id);
            write_file(&out_dir.join(&png_path), &encode_png(&image))?;
            let row = ImageRow {
                fold: plan.as_ref().and_then(|p| p.fold_of(&seg.segment_id)),
                segment_id: seg.segment_id,
                png_path,
                label: seg.label,
                dataset_id: rec.dataset_id.clone(),
            };
            rows.push((row, image.height, image.width));
        }
        Ok(rows)
    })?;

    let mut manifest =
        ImagesManifestWriter::new(Vec::new(), render.target_height, render.target_width)?;
    let mut count = 0;
    for (row, height, width) in per_recording.iter().flatten() {
        manifest.add_sized(row, *height, *width)?;
        count += 1;
    }
    let path = run.write(IMAGES_MANIFEST, &manifest.finish()?)?;
    println!("{count} images -> {}", path.display());
    Ok(())
}
