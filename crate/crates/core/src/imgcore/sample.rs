//! Bilinear sampling with border replication.

use super::plane::{ensure_same_dims, FlowField, Pixel, Plane, ValidityMask};
use crate::error::{invalid, Result};

/// Samples `src` at the continuous position `(x, y)`.
///
/// Coordinates are clamped to the raster before interpolation, so positions
/// outside the frame replicate the nearest border pixel.
#[inline]
pub fn sample_bilinear<P: Pixel>(src: &Plane<P>, x: f64, y: f64) -> P {
    let (h, w) = src.dims();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let top = src.get(x0, y0).lerp(src.get(x1, y0), fx);
    if fy == 0.0 {
        return top;
    }
    let bottom = src.get(x0, y1).lerp(src.get(x1, y1), fx);
    top.lerp(bottom, fy)
}

/// Warps `src` by a backward-sampling flow: `out(x, y) = src(x + dx, y + dy)`.
pub fn warp_backward<P: Pixel>(src: &Plane<P>, flow: &FlowField) -> Result<Plane<P>> {
    ensure_same_dims(src, flow, "flow")?;
    let w = src.width();
    let data = flow
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = (i % w) as f64;
            let y = (i / w) as f64;
            sample_bilinear(src, x + v.x, y + v.y)
        })
        .collect();
    Plane::new(src.height(), w, data)
}

/// Marks pixels whose flow target lies inside a `src_height`×`src_width` frame.
pub fn validity_mask(flow: &FlowField, src_height: usize, src_width: usize) -> ValidityMask {
    let w = flow.width();
    let max_x = src_width as f64 - 1.0;
    let max_y = src_height as f64 - 1.0;
    let data = flow
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = (i % w) as f64 + v.x;
            let y = (i / w) as f64 + v.y;
            (0.0..=max_x).contains(&x) && (0.0..=max_y).contains(&y)
        })
        .collect();
    Plane::new(flow.height(), w, data).expect("flow dimensions are non-empty")
}

/// Source coordinate of destination index `i` under half-pixel-center alignment,
/// clamped to the source extent.
#[inline]
pub fn half_pixel_coord(i: usize, src_len: usize, dst_len: usize) -> f64 {
    let scale = src_len as f64 / dst_len as f64;
    ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64)
}

pub(crate) fn axis_map(src_len: usize, dst_len: usize) -> Vec<f64> {
    (0..dst_len).map(|i| half_pixel_coord(i, src_len, dst_len)).collect()
}

/// Bilinear resize with pixel centers at `i + 0.5`.
pub fn resize_bilinear<P: Pixel>(src: &Plane<P>, new_height: usize, new_width: usize) -> Result<Plane<P>> {
    if new_height == 0 || new_width == 0 {
        return Err(invalid(format!("resize target must be non-empty, got {new_height}x{new_width}")));
    }
    let xs = axis_map(src.width(), new_width);
    let ys = axis_map(src.height(), new_height);
    let mut data = Vec::with_capacity(new_height * new_width);
    for &sy in &ys {
        for &sx in &xs {
            data.push(sample_bilinear(src, sx, sy));
        }
    }
    Plane::new(new_height, new_width, data)
}
