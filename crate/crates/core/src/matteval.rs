//! Training losses and temporal matte quality metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{ensure_same_dims, warp_backward, FlowField, GrayMap, ImageRgb, ValidityMask};

/// Weight of the foreground color term in the total loss.
pub const FOREGROUND_WEIGHT: f64 = 0.25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_alpha: f64,
    pub l_global: f64,
    pub l_local: f64,
    pub l_foreground: f64,
    pub total: f64,
}

impl LossReport {
    pub fn new(l_alpha: f64, l_global: f64, l_local: f64, l_foreground: f64) -> Self {
        LossReport {
            l_alpha,
            l_global,
            l_local,
            l_foreground,
            total: total_loss(l_alpha, l_global, l_local, l_foreground),
        }
    }
}

/// Metrics on the 0–255 alpha scale.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ssda: f64,
    pub dtssd: f64,
    pub messddt: f64,
}

pub fn total_loss(l_alpha: f64, l_global: f64, l_local: f64, l_foreground: f64) -> f64 {
    l_alpha + l_global + l_local + FOREGROUND_WEIGHT * l_foreground
}

fn check_sequences<P, Q>(a: &[crate::imgcore::Plane<P>], b: &[crate::imgcore::Plane<Q>], what: &'static str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Length {
            what,
            want: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Length { what, want: 1, got: 0 });
    }
    for (x, y) in a.iter().zip(b) {
        ensure_same_dims(&a[0], x, what)?;
        ensure_same_dims(&a[0], y, what)?;
    }
    Ok(())
}

/// Mean absolute alpha error over all frames and pixels.
pub fn loss_alpha(pred: &[GrayMap], gt: &[GrayMap]) -> Result<f64> {
    check_sequences(pred, gt, "ground-truth alphas")?;
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .flat_map(|(p, g)| p.data().iter().zip(g.data()).map(|(a, b)| (a - b).abs()))
        .sum();
    Ok(sum / (pred.len() * pred[0].len()) as f64)
}

/// A ground-truth correspondence into an earlier frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePair {
    /// Earlier frame index (0-based).
    pub from: usize,
    /// Later frame index; the flow and mask live on this frame.
    pub to: usize,
    pub flow: FlowField,
    pub valid: ValidityMask,
}

/// Masked temporal L1 over `pairs`, normalized by `(N − 1)·H·W`.
fn temporal_l1(pred: &[GrayMap], pairs: &[FramePair]) -> Result<f64> {
    let n = pred.len();
    if n < 2 {
        return Err(Error::Length {
            what: "predicted alphas",
            want: 2,
            got: n,
        });
    }
    let mut sum = 0.0;
    for pair in pairs {
        if pair.from >= n || pair.to >= n {
            return Err(Error::InvalidArgument(format!(
                "frame pair {}->{} outside clip of {n} frames",
                pair.from, pair.to
            )));
        }
        let target = &pred[pair.to];
        ensure_same_dims(target, &pair.valid, "validity mask")?;
        let carried = warp_backward(&pred[pair.from], &pair.flow)?;
        sum += target
            .data()
            .iter()
            .zip(carried.data())
            .zip(pair.valid.data())
            .filter(|(_, &v)| v)
            .map(|((a, b), _)| (a - b).abs())
            .sum::<f64>();
    }
    Ok(sum / ((n - 1) * pred[0].len()) as f64)
}

/// Global temporal loss: each frame against frame 0 carried along the ground-truth flow.
pub fn loss_global(pred: &[GrayMap], from_first: &[FramePair]) -> Result<f64> {
    temporal_l1(pred, from_first)
}

/// Local temporal loss: each frame against its predecessor.
pub fn loss_local(pred: &[GrayMap], consecutive: &[FramePair]) -> Result<f64> {
    temporal_l1(pred, consecutive)
}

/// Alpha-weighted L1 on foreground colors.
pub fn loss_foreground(pred_fg: &[ImageRgb], gt_fg: &[ImageRgb], pred_alpha: &[GrayMap]) -> Result<f64> {
    check_sequences(pred_fg, gt_fg, "ground-truth foregrounds")?;
    check_sequences(pred_fg, pred_alpha, "predicted alphas")?;
    let mut sum = 0.0;
    for ((p, g), a) in pred_fg.iter().zip(gt_fg).zip(pred_alpha) {
        for ((pp, gp), &av) in p.data().iter().zip(g.data()).zip(a.data()) {
            let diff: f64 = pp.iter().zip(gp).map(|(x, y)| (x - y).abs()).sum();
            sum += av * diff;
        }
    }
    Ok(sum / (pred_fg.len() * pred_fg[0].len() * 3) as f64)
}

pub struct LossInputs<'a> {
    pub pred_alpha: &'a [GrayMap],
    pub gt_alpha: &'a [GrayMap],
    pub pred_fg: &'a [ImageRgb],
    pub gt_fg: &'a [ImageRgb],
    pub from_first: &'a [FramePair],
    pub consecutive: &'a [FramePair],
}

pub fn compute_losses(inputs: &LossInputs<'_>) -> Result<LossReport> {
    Ok(LossReport::new(
        loss_alpha(inputs.pred_alpha, inputs.gt_alpha)?,
        loss_global(inputs.pred_alpha, inputs.from_first)?,
        loss_local(inputs.pred_alpha, inputs.consecutive)?,
        loss_foreground(inputs.pred_fg, inputs.gt_fg, inputs.pred_alpha)?,
    ))
}

const ALPHA_SCALE: f64 = 255.0;

/// SSDA, dtSSD and MESSDdt on the 0–255 scale.
///
/// `flows[k]` is the ground-truth backward flow of frame `k + 1` into frame `k`.
pub fn temporal_metrics(pred: &[GrayMap], gt: &[GrayMap], flows: &[FlowField]) -> Result<MetricReport> {
    check_sequences(pred, gt, "ground-truth alphas")?;
    let n = pred.len();
    if flows.len() != n - 1 {
        return Err(Error::Length {
            what: "ground-truth flows",
            want: n - 1,
            got: flows.len(),
        });
    }
    let s = ALPHA_SCALE;
    let pixels = pred[0].len() as f64;

    let ssda = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| {
            p.data()
                .iter()
                .zip(g.data())
                .map(|(a, b)| (s * (a - b)).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / n as f64;

    if n < 2 {
        return Ok(MetricReport {
            ssda,
            dtssd: 0.0,
            messddt: 0.0,
        });
    }

    let mut dtssd = 0.0;
    let mut messddt = 0.0;
    for i in 1..n {
        let (p1, p0, g1, g0) = (&pred[i], &pred[i - 1], &gt[i], &gt[i - 1]);
        let sq: f64 = (0..p1.len())
            .map(|k| {
                let dp = p1.data()[k] - p0.data()[k];
                let dg = g1.data()[k] - g0.data()[k];
                (s * (dp - dg)).powi(2)
            })
            .sum();
        dtssd += sq.sqrt();

        let p0w = warp_backward(p0, &flows[i - 1])?;
        let g0w = warp_backward(g0, &flows[i - 1])?;
        let m: f64 = (0..p1.len())
            .map(|k| {
                let now = (s * (p1.data()[k] - g1.data()[k])).powi(2);
                let before = (s * (p0w.data()[k] - g0w.data()[k])).powi(2);
                (now - before).abs()
            })
            .sum();
        messddt += m / pixels;
    }
    let pairs = (n - 1) as f64;
    Ok(MetricReport {
        ssda,
        dtssd: dtssd / pairs,
        messddt: messddt / pairs,
    })
}
