//! Loss and metric reports for a generated clip against predictions.

use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;
use vmkit_core::clipforge::layout::{alpha_name, fg_name};
use vmkit_core::clipforge::{read_clip_dir, ClipFiles};
use vmkit_core::io;
use vmkit_core::{GrayMap, ImageRgb};
use vmkit_core::matteval::{compute_losses, temporal_metrics, LossInputs};

fn load_clip(clip: &Path) -> Result<ClipFiles> {
    let files = read_clip_dir(clip)?;
    if files.is_empty() {
        bail!("{}: clip has no frames", clip.display());
    }
    Ok(files)
}

fn check_dims(path: &Path, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        bail!("{}: raster is {}x{}, clip is {}x{}", path.display(), got.1, got.0, want.1, want.0);
    }
    Ok(())
}

/// Prediction files use the clip layout names: `alpha_%04d.png`, `fg_%04d.png`.
fn read_predictions(pred: &Path, n: usize, dims: (usize, usize), with_fg: bool) -> Result<(Vec<GrayMap>, Vec<ImageRgb>)> {
    let mut alphas = Vec::with_capacity(n);
    let mut fgs = Vec::new();
    for i in 0..n {
        let p = pred.join(alpha_name(i));
        let a = io::read_gray(&p)?;
        check_dims(&p, a.dims(), dims)?;
        alphas.push(a);
        if with_fg {
            let p = pred.join(fg_name(i));
            let f = io::read_rgb(&p)?;
            check_dims(&p, f.dims(), dims)?;
            fgs.push(f);
        }
    }
    Ok((alphas, fgs))
}

pub fn losses(clip: &Path, pred: &Path) -> Result<impl Serialize> {
    let files = load_clip(clip)?;
    let dims = files.gt_alphas[0].dims();
    let (alphas, fgs) = read_predictions(pred, files.len(), dims, true)?;
    let from_first = files.pairs_from_first();
    let consecutive = files.consecutive_pairs();
    Ok(compute_losses(&LossInputs {
        pred_alpha: &alphas,
        gt_alpha: &files.gt_alphas,
        pred_fg: &fgs,
        gt_fg: &files.gt_foregrounds,
        from_first: &from_first,
        consecutive: &consecutive,
    })?)
}

pub fn metrics(clip: &Path, pred: &Path) -> Result<impl Serialize> {
    let files = load_clip(clip)?;
    let dims = files.gt_alphas[0].dims();
    let (alphas, _) = read_predictions(pred, files.len(), dims, false)?;
    Ok(temporal_metrics(&alphas, &files.gt_alphas, &files.consecutive_flows())?)
}
