use ndarray::Array2;

use super::{Colormap, RenderParams, SpectroError, SpectrogramImage};

/// Element-wise `20 log10(value + epsilon)`.
pub fn to_db(values: &Array2<f64>, epsilon: f64) -> Array2<f64> {
    values.mapv(|v| 20.0 * (v + epsilon).log10())
}

/// Renders a dB grid at its native size. See [`render_padded`].
pub fn render(db: &Array2<f64>, params: &RenderParams) -> Result<SpectrogramImage, SpectroError> {
    render_padded(db, params, db.nrows())
}

/// Min–max normalizes `db` to `[0, 1]` and maps it to pixels, producing an
/// image `total_rows` tall. Grid row 0 is drawn on the bottom image row;
/// rows beyond the grid (the top of the image) get the lowest-energy value.
///
/// A constant grid renders as all zeros.
pub fn render_padded(
    db: &Array2<f64>,
    params: &RenderParams,
    total_rows: usize,
) -> Result<SpectrogramImage, SpectroError> {
    let (rows, cols) = db.dim();
    if rows == 0 || cols == 0 {
        return Err(SpectroError::EmptyGrid);
    }
    let total_rows = total_rows.max(rows);
    let channels = match params.colormap {
        Colormap::Grayscale => 1,
        Colormap::Viridis => 3,
    };
    let mut image = SpectrogramImage::new(total_rows, cols, channels, "");

    let (lo, hi) = db
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo == hi {
        return Ok(image);
    }
    let span = hi - lo;
    let shade = |normalized: f64| -> [u8; 3] {
        let t = if params.invert {
            1.0 - normalized
        } else {
            normalized
        };
        match params.colormap {
            Colormap::Grayscale => {
                let v = (255.0 * t).round() as u8;
                [v, v, v]
            }
            Colormap::Viridis => viridis(t),
        }
    };
    for img_row in 0..total_rows {
        let grid_row = total_rows - 1 - img_row;
        for col in 0..cols {
            let normalized = if grid_row < rows {
                (db[[grid_row, col]] - lo) / span
            } else {
                0.0
            };
            let rgb = shade(normalized);
            for (c, &value) in rgb.iter().enumerate().take(channels) {
                image.set(img_row, col, c, value);
            }
        }
    }
    Ok(image)
}

// Viridis sampled at nine evenly spaced points.
const VIRIDIS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [71.0, 44.0, 122.0],
    [59.0, 81.0, 139.0],
    [44.0, 113.0, 142.0],
    [33.0, 144.0, 141.0],
    [39.0, 173.0, 129.0],
    [92.0, 200.0, 99.0],
    [170.0, 220.0, 50.0],
    [253.0, 231.0, 37.0],
];

fn viridis(t: f64) -> [u8; 3] {
    let pos = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(VIRIDIS.len() - 2);
    let f = pos - i as f64;
    let mut out = [0u8; 3];
    for (c, o) in out.iter_mut().enumerate() {
        *o = (VIRIDIS[i][c] + f * (VIRIDIS[i + 1][c] - VIRIDIS[i][c])).round() as u8;
    }
    out
}
