use super::SpectrogramImage;

/// Bilinear resize with corner-aligned sampling: output pixel `i` along an
/// axis samples source coordinate `i * (src - 1) / (dst - 1)`, so both
/// corners map onto source corners. A 1-pixel output axis samples source
/// coordinate 0.
pub fn resize_bilinear(
    image: &SpectrogramImage,
    target_height: usize,
    target_width: usize,
) -> SpectrogramImage {
    assert!(image.height > 0 && image.width > 0, "source image is empty");
    assert!(
        target_height > 0 && target_width > 0,
        "target size is empty"
    );
    let ys = axis(image.height, target_height);
    let xs = axis(image.width, target_width);
    let mut out = SpectrogramImage::new(
        target_height,
        target_width,
        image.channels,
        image.segment_id.clone(),
    );
    for (r, &(y0, y1, fy)) in ys.iter().enumerate() {
        for (c, &(x0, x1, fx)) in xs.iter().enumerate() {
            for ch in 0..image.channels {
                let p = |y, x| f64::from(image.get(y, x, ch));
                let top = p(y0, x0) + fx * (p(y0, x1) - p(y0, x0));
                let bottom = p(y1, x0) + fx * (p(y1, x1) - p(y1, x0));
                let v = top + fy * (bottom - top);
                out.set(r, c, ch, v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

fn axis(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    (0..dst)
        .map(|i| {
            if dst == 1 || src == 1 {
                return (0, 0, 0.0);
            }
            let pos = (i * (src - 1)) as f64 / (dst - 1) as f64;
            let lo = (pos.floor() as usize).min(src - 1);
            let hi = (lo + 1).min(src - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}
