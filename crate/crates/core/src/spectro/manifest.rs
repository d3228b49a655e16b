use std::io::{Read, Write};

use super::{SpectroError, SpectrogramImage};
use crate::HealthLabel;

pub const IMAGES_HEADER: [&str; 5] = ["segment_id", "png_path", "label", "dataset_id", "fold"];

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRow {
    pub segment_id: String,
    pub png_path: String,
    pub label: HealthLabel,
    pub dataset_id: String,
    pub fold: Option<usize>,
}

/// Writes the images manifest, refusing images that are not at the target size.
pub struct ImagesManifestWriter<W: Write> {
    inner: csv::Writer<W>,
    height: usize,
    width: usize,
}

impl<W: Write> ImagesManifestWriter<W> {
    pub fn new(writer: W, height: usize, width: usize) -> Result<Self, SpectroError> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(IMAGES_HEADER)?;
        Ok(Self {
            inner,
            height,
            width,
        })
    }

    pub fn add(&mut self, image: &SpectrogramImage, row: &ImageRow) -> Result<(), SpectroError> {
        self.add_sized(row, image.height, image.width)
    }

    /// Adds a row for an image already encoded elsewhere, given its size.
    pub fn add_sized(
        &mut self,
        row: &ImageRow,
        height: usize,
        width: usize,
    ) -> Result<(), SpectroError> {
        if height != self.height || width != self.width {
            return Err(SpectroError::WrongSize {
                segment_id: row.segment_id.clone(),
                height,
                width,
                expected_height: self.height,
                expected_width: self.width,
            });
        }
        let fold = row.fold.map(|f| f.to_string()).unwrap_or_default();
        self.inner.write_record([
            row.segment_id.as_str(),
            &row.png_path,
            row.label.as_str(),
            &row.dataset_id,
            &fold,
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, SpectroError> {
        self.inner.flush()?;
        self.inner
            .into_inner()
            .map_err(|e| SpectroError::Io(std::io::Error::other(e.to_string())))
    }
}

pub fn read_images_manifest(reader: impl Read) -> Result<Vec<ImageRow>, SpectroError> {
    let mut csv = csv::Reader::from_reader(reader);
    let header = csv.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != IMAGES_HEADER {
        return Err(SpectroError::Manifest {
            row: 0,
            reason: format!("expected header {}", IMAGES_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let bad = |reason: String| SpectroError::Manifest { row, reason };
        let label = rec[2]
            .parse::<HealthLabel>()
            .map_err(|e| bad(e.to_string()))?;
        let fold = match &rec[4] {
            "" => None,
            f => Some(
                f.parse::<usize>()
                    .map_err(|e| bad(format!("fold {f:?}: {e}")))?,
            ),
        };
        rows.push(ImageRow {
            segment_id: rec[0].to_string(),
            png_path: rec[1].to_string(),
            label,
            dataset_id: rec[3].to_string(),
            fold,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str) -> ImageRow {
        ImageRow {
            segment_id: id.into(),
            png_path: format!("images/{id}.png"),
            label: HealthLabel::O,
            dataset_id: "cwru".into(),
            fold: Some(2),
        }
    }

    #[test]
    fn rejects_unresized_image() {
        let mut w = ImagesManifestWriter::new(Vec::new(), 256, 512).unwrap();
        let img = SpectrogramImage::new(255, 512, 1, "a#0");
        assert!(matches!(
            w.add(&img, &row("a#0")),
            Err(SpectroError::WrongSize { height: 255, .. })
        ));
    }

    #[test]
    fn write_then_read() {
        let mut w = ImagesManifestWriter::new(Vec::new(), 2, 3).unwrap();
        let img = SpectrogramImage::new(2, 3, 1, "a#0");
        w.add(&img, &row("a#0")).unwrap();
        let mut r2 = row("a#1");
        r2.fold = None;
        w.add(&img, &r2).unwrap();
        let bytes = w.finish().unwrap();
        let rows = read_images_manifest(&bytes[..]).unwrap();
        assert_eq!(rows, vec![row("a#0"), r2]);
    }
}
