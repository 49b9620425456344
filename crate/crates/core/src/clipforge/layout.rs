//! Clip directory layout:
//!
//! ```text
//! frame_0001.png ...            8-bit RGB, JPEG-degraded input frames
//! alpha_0001.png ...            16-bit gray ground-truth alpha
//! fg_0001.png ...               8-bit RGB ground-truth foreground
//! flow_0001_to_0002.flo ...     Middlebury flow from frame i back to frame 1
//! valid_0001_to_0002.png ...    8-bit validity mask of that flow
//! manifest.json
//! ```

use std::path::Path;

use super::{ClipManifest, TrainingClip};
use crate::error::{Error, Result};
use crate::imgcore::{validity_mask, FlowField, GrayMap, ImageRgb, ValidityMask};
use crate::io;
use crate::matteval::FramePair;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn frame_name(i: usize) -> String {
    format!("frame_{:04}.png", i + 1)
}

pub fn alpha_name(i: usize) -> String {
    format!("alpha_{:04}.png", i + 1)
}

pub fn fg_name(i: usize) -> String {
    format!("fg_{:04}.png", i + 1)
}

pub fn flow_name(i: usize) -> String {
    format!("flow_0001_to_{:04}.flo", i + 1)
}

pub fn valid_name(i: usize) -> String {
    format!("valid_0001_to_{:04}.png", i + 1)
}

/// Writes `clip` into the existing directory `dir`.
pub fn write_clip_dir(dir: &Path, clip: &TrainingClip) -> Result<()> {
    for i in 0..clip.len() {
        io::write_rgb(&dir.join(frame_name(i)), &clip.frames[i])?;
        io::write_gray16(&dir.join(alpha_name(i)), &clip.gt_alphas[i])?;
        io::write_rgb(&dir.join(fg_name(i)), &clip.gt_foregrounds[i])?;
    }
    for pair in clip.pairs_from_first()? {
        io::write_flo(&dir.join(flow_name(pair.to)), &pair.flow)?;
        io::write_mask(&dir.join(valid_name(pair.to)), &pair.valid)?;
    }
    io::write_json(&dir.join(MANIFEST_FILE), &clip.manifest)
}

/// A clip read back from disk.
#[derive(Clone, Debug)]
pub struct ClipFiles {
    pub manifest: ClipManifest,
    pub frames: Vec<ImageRgb>,
    pub gt_alphas: Vec<GrayMap>,
    pub gt_foregrounds: Vec<ImageRgb>,
    /// `flows_from_first[k]` maps frame k+1 back into frame 0.
    pub flows_from_first: Vec<FlowField>,
    pub valid_from_first: Vec<ValidityMask>,
}

impl ClipFiles {
    pub fn len(&self) -> usize {
        self.gt_alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gt_alphas.is_empty()
    }

    pub fn pairs_from_first(&self) -> Vec<FramePair> {
        self.flows_from_first
            .iter()
            .zip(&self.valid_from_first)
            .enumerate()
            .map(|(k, (flow, valid))| FramePair {
                from: 0,
                to: k + 1,
                flow: flow.clone(),
                valid: valid.clone(),
            })
            .collect()
    }

    /// Backward flow of frame k+1 into frame k, from differences of the stored flows.
    pub fn consecutive_flows(&self) -> Vec<FlowField> {
        let (h, w) = self.gt_alphas[0].dims();
        let zero = FlowField::zeros(h, w);
        self.flows_from_first
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let prev = if k == 0 { &zero } else { &self.flows_from_first[k - 1] };
                f.zip_map(prev, "flow", |a, b| a - b).expect("stored flows share dimensions")
            })
            .collect()
    }

    pub fn consecutive_pairs(&self) -> Vec<FramePair> {
        let (h, w) = self.gt_alphas[0].dims();
        self.consecutive_flows()
            .into_iter()
            .enumerate()
            .map(|(k, flow)| FramePair {
                from: k,
                to: k + 1,
                valid: validity_mask(&flow, h, w),
                flow,
            })
            .collect()
    }
}

fn check_dims(path: &Path, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: 0,
            reason: format!("raster is {}x{}, manifest says {}x{}", got.0, got.1, want.0, want.1),
        });
    }
    Ok(())
}

pub fn read_clip_dir(dir: &Path) -> Result<ClipFiles> {
    let manifest: ClipManifest = io::read_json(&dir.join(MANIFEST_FILE))?;
    let dims = (manifest.height, manifest.width);
    let n = manifest.frames;
    let mut files = ClipFiles {
        manifest,
        frames: Vec::with_capacity(n),
        gt_alphas: Vec::with_capacity(n),
        gt_foregrounds: Vec::with_capacity(n),
        flows_from_first: Vec::new(),
        valid_from_first: Vec::new(),
    };
    for i in 0..n {
        let p = dir.join(frame_name(i));
        let frame = io::read_rgb(&p)?;
        check_dims(&p, frame.dims(), dims)?;
        files.frames.push(frame);
        let p = dir.join(alpha_name(i));
        let alpha = io::read_gray(&p)?;
        check_dims(&p, alpha.dims(), dims)?;
        files.gt_alphas.push(alpha);
        let p = dir.join(fg_name(i));
        let fg = io::read_rgb(&p)?;
        check_dims(&p, fg.dims(), dims)?;
        files.gt_foregrounds.push(fg);
    }
    for i in 1..n {
        let p = dir.join(flow_name(i));
        let flow = io::read_flo(&p)?;
        check_dims(&p, flow.dims(), dims)?;
        files.flows_from_first.push(flow);
        let p = dir.join(valid_name(i));
        let valid = io::read_mask(&p)?;
        check_dims(&p, valid.dims(), dims)?;
        files.valid_from_first.push(valid);
    }
    Ok(files)
}
