//! Temporal smoothing of person-probability maps and trimap generation.

use serde::{Deserialize, Serialize};

use crate::blockflow::ConsistencyMap;
use crate::error::{invalid, Error, Result};
use crate::imgcore::{ensure_same_dims, warp_backward, FlowField, GrayMap, Plane};

/// Pixel confidence `4(p − ½)²`: 1 at p ∈ {0, 1}, 0 at p = ½.
pub fn confidence(p: &GrayMap) -> GrayMap {
    p.map(|&v| confidence_value(v))
}

#[inline]
fn confidence_value(p: f64) -> f64 {
    let d = 2.0 * p - 1.0;
    (d * d).clamp(0.0, 1.0)
}

/// Forward recurrence
/// `A_0 = p_0`, `A_i = s_i·p_i + (1 − s_i)·C_i·warp(A_{i−1}, F_i)`.
///
/// `flows[k]` and `consistencies[k]` belong to frame `k + 1`: the flow samples
/// frame k from frame k+1.
pub fn smooth_sequence(
    probs: &[GrayMap],
    flows: &[FlowField],
    consistencies: &[ConsistencyMap],
) -> Result<Vec<GrayMap>> {
    let Some(first) = probs.first() else {
        return Err(invalid("probability sequence is empty"));
    };
    let want = probs.len() - 1;
    if flows.len() != want {
        return Err(Error::Length {
            what: "flow sequence",
            want,
            got: flows.len(),
        });
    }
    if consistencies.len() != want {
        return Err(Error::Length {
            what: "consistency sequence",
            want,
            got: consistencies.len(),
        });
    }
    let mut out = Vec::with_capacity(probs.len());
    out.push(first.clone());
    for ((p, flow), c) in probs[1..].iter().zip(flows).zip(consistencies) {
        ensure_same_dims(first, p, "probability map")?;
        ensure_same_dims(first, c, "consistency map")?;
        let history = warp_backward(out.last().expect("seeded with first map"), flow)?;
        let data = p
            .data()
            .iter()
            .zip(c.data())
            .zip(history.data())
            .map(|((&p, &c), &a)| {
                let s = confidence_value(p);
                (s * p + (1.0 - s) * (c * a)).clamp(0.0, 1.0)
            })
            .collect();
        out.push(Plane::new(p.height(), p.width(), data)?);
    }
    Ok(out)
}

/// Trimap label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum TrimapLabel {
    Background = 0,
    Unknown = 128,
    Foreground = 255,
}

pub type Trimap = Plane<TrimapLabel>;

pub const DEFAULT_ITERATIONS_FRACTION: f64 = 0.01;

/// Max (dilate) or min (erode) over the `(2k+1)²` square, with everything
/// outside the frame treated as background. Equals `k` passes of a 3×3
/// 8-connected structuring element.
fn square_filter(mask: &Plane<bool>, k: usize, dilate: bool) -> Plane<bool> {
    if k == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let pass = |len: usize, get: &dyn Fn(usize) -> bool| -> Vec<bool> {
        // Prefix counts of set pixels along one line.
        let mut prefix = vec![0usize; len + 1];
        for i in 0..len {
            prefix[i + 1] = prefix[i] + get(i) as usize;
        }
        (0..len)
            .map(|i| {
                let lo = i.saturating_sub(k);
                let hi = (i + k + 1).min(len);
                let count = prefix[hi] - prefix[lo];
                if dilate {
                    count > 0
                } else {
                    // The window must lie fully inside the frame and be all set.
                    i >= k && i + k < len && count == 2 * k + 1
                }
            })
            .collect()
    };
    let mut horizontal = Plane::filled(h, w, false);
    for y in 0..h {
        let line = pass(w, &|x| mask.get(x, y));
        horizontal.data_mut()[y * w..(y + 1) * w].copy_from_slice(&line);
    }
    let mut out = Plane::filled(h, w, false);
    for x in 0..w {
        let line = pass(h, &|y| horizontal.get(x, y));
        for (y, v) in line.into_iter().enumerate() {
            out.set(x, y, v);
        }
    }
    out
}

pub fn dilate(mask: &Plane<bool>, iterations: usize) -> Plane<bool> {
    square_filter(mask, iterations, true)
}

pub fn erode(mask: &Plane<bool>, iterations: usize) -> Plane<bool> {
    square_filter(mask, iterations, false)
}

/// Trimap from a segmentation map: binarize at ½, dilate for the unknown band and
/// erode for the sure foreground, each `round(fraction · width)` iterations.
pub fn make_trimap(seg: &GrayMap, iterations_fraction: f64) -> Result<Trimap> {
    if iterations_fraction.is_nan() || iterations_fraction < 0.0 {
        return Err(invalid("iteration fraction must be non-negative"));
    }
    let k = (iterations_fraction * seg.width() as f64).round() as usize;
    let binary = seg.map(|&v| v >= 0.5);
    let dilated = dilate(&binary, k);
    let eroded = erode(&binary, k);
    eroded.zip_map(&dilated, "mask", |e, d| {
        if e {
            TrimapLabel::Foreground
        } else if !d {
            TrimapLabel::Background
        } else {
            TrimapLabel::Unknown
        }
    })
}
