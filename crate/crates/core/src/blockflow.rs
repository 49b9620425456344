//! Exhaustive-search block matching and forward/backward consistency maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::imgcore::{ensure_same_dims, luma, warp_backward, FlowField, GrayMap, ImageRgb, Plane, Vec2};

/// Per-pixel agreement of forward and backward motion, in (0, 1].
pub type ConsistencyMap = GrayMap;

/// Residual norm at which consistency falls to 1/e.
pub const CONSISTENCY_SCALE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMeParams {
    pub block_size: usize,
    pub search_radius: usize,
}

impl Default for BlockMeParams {
    fn default() -> Self {
        BlockMeParams {
            block_size: 16,
            search_radius: 16,
        }
    }
}

impl BlockMeParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_size < 4 {
            return Err(invalid(format!("block size must be at least 4, got {}", self.block_size)));
        }
        if self.search_radius < 1 {
            return Err(invalid("search radius must be at least 1"));
        }
        Ok(())
    }
}

/// Luma quantized to 16 bits so SAD is exact integer arithmetic.
struct LumaU16 {
    height: usize,
    width: usize,
    data: Vec<u16>,
}

impl LumaU16 {
    fn from_image(img: &ImageRgb) -> Self {
        let y = luma(img);
        LumaU16 {
            height: y.height(),
            width: y.width(),
            data: y.data().iter().map(|&v| (v * 65535.0).round() as u16).collect(),
        }
    }

    /// Copy with `pad` replicated pixels on every side.
    fn padded(&self, pad: usize) -> LumaU16 {
        let pw = self.width + 2 * pad;
        let ph = self.height + 2 * pad;
        let mut data = Vec::with_capacity(pw * ph);
        for py in 0..ph {
            let y = py.saturating_sub(pad).min(self.height - 1);
            let row = &self.data[y * self.width..(y + 1) * self.width];
            data.extend(std::iter::repeat_n(row[0], pad));
            data.extend_from_slice(row);
            data.extend(std::iter::repeat_n(row[self.width - 1], pad));
        }
        LumaU16 {
            height: ph,
            width: pw,
            data,
        }
    }
}

/// Candidate displacements ordered by the tie-break rule: smaller |v|, then dy, then dx.
fn candidate_order(radius: usize) -> Vec<(i32, i32)> {
    let r = radius as i32;
    let mut c: Vec<(i32, i32)> = (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))).collect();
    c.sort_by_key(|&(dx, dy)| (dx * dx + dy * dy, dy, dx));
    c
}

#[inline]
fn row_sad(a: &[u16], b: &[u16]) -> u32 {
    a.iter().zip(b).map(|(&x, &y)| (x as i32 - y as i32).unsigned_abs()).sum()
}

struct Matcher<'a> {
    target: &'a LumaU16,
    reference: &'a LumaU16,
    radius: usize,
    candidates: &'a [(i32, i32)],
}

impl Matcher<'_> {
    fn best_vector(&self, bx: usize, by: usize, bw: usize, bh: usize) -> (i32, i32) {
        let tw = self.target.width;
        let rw = self.reference.width;
        let r = self.radius as i32;
        let mut best = u32::MAX;
        let mut best_v = (0, 0);
        // Candidates come in tie-break order, so only a strictly smaller cost wins.
        'cand: for &(dx, dy) in self.candidates {
            let rx = (bx as i32 + dx + r) as usize;
            let ry = (by as i32 + dy + r) as usize;
            let mut sad = 0u32;
            for row in 0..bh {
                let t0 = (by + row) * tw + bx;
                let r0 = (ry + row) * rw + rx;
                sad += row_sad(&self.target.data[t0..t0 + bw], &self.reference.data[r0..r0 + bw]);
                if sad >= best {
                    continue 'cand;
                }
            }
            best = sad;
            best_v = (dx, dy);
        }
        best_v
    }
}

fn estimate_luma(target: &LumaU16, reference: &LumaU16, params: &BlockMeParams) -> FlowField {
    let bs = params.block_size;
    let padded = reference.padded(params.search_radius);
    let candidates = candidate_order(params.search_radius);
    let matcher = Matcher {
        target,
        reference: &padded,
        radius: params.search_radius,
        candidates: &candidates,
    };
    let (h, w) = (target.height, target.width);
    let tiles_x = w.div_ceil(bs);
    let tile_rows: Vec<Vec<(i32, i32)>> = (0..h.div_ceil(bs))
        .into_par_iter()
        .map(|ty| {
            let by = ty * bs;
            let bh = bs.min(h - by);
            (0..tiles_x)
                .map(|tx| {
                    let bx = tx * bs;
                    matcher.best_vector(bx, by, bs.min(w - bx), bh)
                })
                .collect()
        })
        .collect();
    Plane::from_fn(h, w, |x, y| {
        let (dx, dy) = tile_rows[y / bs][x / bs];
        Vec2::new(dx as f64, dy as f64)
    })
}

fn check_inputs(target: &ImageRgb, reference: &ImageRgb, params: &BlockMeParams) -> Result<()> {
    params.validate()?;
    ensure_same_dims(target, reference, "reference frame")?;
    let (h, w) = target.dims();
    if h < params.block_size || w < params.block_size {
        return Err(invalid(format!(
            "frame {h}x{w} smaller than block size {}",
            params.block_size
        )));
    }
    Ok(())
}

/// Block-matching flow such that `target(x) ≈ reference(x + v)`.
///
/// Each tile of `target` gets the integer displacement in `[-r, r]²` with the
/// smallest luma SAD against the border-replicated reference.
pub fn estimate_flow(target: &ImageRgb, reference: &ImageRgb, params: &BlockMeParams) -> Result<FlowField> {
    check_inputs(target, reference, params)?;
    Ok(estimate_luma(
        &LumaU16::from_image(target),
        &LumaU16::from_image(reference),
        params,
    ))
}

/// Consistency of the forward flow of frame i with the backward flow of frame i−1:
/// `exp(−|F + warp(B, F)| / 100)`.
pub fn consistency_map(forward: &FlowField, backward: &FlowField) -> Result<ConsistencyMap> {
    let carried = warp_backward(backward, forward)?;
    forward.zip_map(&carried, "backward flow", |f, b| {
        let residual = (f + b).norm();
        (-residual / CONSISTENCY_SCALE).exp().max(f64::MIN_POSITIVE)
    })
}

/// Flows and consistencies for a whole video, 0-based.
///
/// `forward[k]` maps frame k+1 into frame k, `backward[k]` maps frame k into
/// frame k+1 and `consistency[k]` belongs to frame k+1.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoFlows {
    pub forward: Vec<FlowField>,
    pub backward: Vec<FlowField>,
    pub consistency: Vec<ConsistencyMap>,
}

pub fn flow_pyramid_for_video(frames: &[ImageRgb], params: &BlockMeParams) -> Result<VideoFlows> {
    if frames.len() < 2 {
        return Err(invalid(format!("need at least 2 frames, got {}", frames.len())));
    }
    for f in &frames[1..] {
        check_inputs(&frames[0], f, params)?;
    }
    let lumas: Vec<LumaU16> = frames.par_iter().map(LumaU16::from_image).collect();
    let pairs: Vec<(FlowField, FlowField)> = lumas
        .par_windows(2)
        .map(|w| (estimate_luma(&w[1], &w[0], params), estimate_luma(&w[0], &w[1], params)))
        .collect();
    let (forward, backward): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let consistency = forward
        .iter()
        .zip(&backward)
        .map(|(f, b)| consistency_map(f, b))
        .collect::<Result<_>>()?;
    Ok(VideoFlows {
        forward,
        backward,
        consistency,
    })
}
