use super::plane::{ensure_same_dims, GrayMap, ImageRgb, Plane, Rgb};
use crate::error::Result;

/// Blends `fg` over `bg` with the matte `alpha`: `α·fg + (1−α)·bg`.
pub fn composite_over(fg: &ImageRgb, alpha: &GrayMap, bg: &ImageRgb) -> Result<ImageRgb> {
    ensure_same_dims(fg, alpha, "alpha")?;
    ensure_same_dims(fg, bg, "background")?;
    let data = fg
        .data()
        .iter()
        .zip(alpha.data())
        .zip(bg.data())
        .map(|((f, &a), b)| over_pixel(*f, a, *b))
        .collect();
    Plane::new(fg.height(), fg.width(), data)
}

#[inline]
pub(crate) fn over_pixel(fg: Rgb, alpha: f64, bg: Rgb) -> Rgb {
    let mut out = [0.0; 3];
    for c in 0..3 {
        let v = alpha * fg[c] + (1.0 - alpha) * bg[c];
        out[c] = v.clamp(fg[c].min(bg[c]), fg[c].max(bg[c]));
    }
    out
}

/// BT.601 luma.
pub fn luma(img: &ImageRgb) -> GrayMap {
    img.map(|p| (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).clamp(0.0, 1.0))
}
