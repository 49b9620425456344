//! Per-video commands: motion estimation, probability smoothing, trimaps.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use vmkit_core::blockflow::{flow_pyramid_for_video, BlockMeParams};
use vmkit_core::io::{self, IMAGE_EXTENSIONS};
use vmkit_core::probsmooth::{make_trimap, smooth_sequence};

pub fn forward_name(i: usize) -> String {
    format!("forward_{i:04}.flo")
}

pub fn backward_name(i: usize) -> String {
    format!("backward_{i:04}.flo")
}

pub fn consistency_name(i: usize) -> String {
    format!("consistency_{i:04}.png")
}

fn inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let files = io::list_files(dir, IMAGE_EXTENSIONS)?;
    if files.is_empty() {
        bail!("{}: no image files", dir.display());
    }
    Ok(files)
}

/// Same file name as the input, always PNG.
fn output_path(out: &Path, input: &Path) -> PathBuf {
    out.join(input.file_name().expect("listed files have names")).with_extension("png")
}

/// Names are 1-based frame numbers: `forward_i` samples frame i−1 from frame i,
/// `backward_i` samples frame i+1 from frame i, and `consistency_i` belongs to frame i.
pub fn flow(input: &Path, out: &Path, params: &BlockMeParams) -> Result<()> {
    let frames = inputs(input)?
        .iter()
        .map(|p| io::read_rgb(p))
        .collect::<Result<Vec<_>, _>>()?;
    if frames.len() < 2 {
        bail!("{}: need at least 2 frames, found {}", input.display(), frames.len());
    }
    let flows = flow_pyramid_for_video(&frames, params)?;
    io::create_dir(out)?;
    for k in 0..flows.forward.len() {
        io::write_flo(&out.join(forward_name(k + 2)), &flows.forward[k])?;
        io::write_flo(&out.join(backward_name(k + 1)), &flows.backward[k])?;
        io::write_gray16(&out.join(consistency_name(k + 2)), &flows.consistency[k])?;
    }
    Ok(())
}

pub fn smooth(probs: &Path, flows: &Path, out: &Path) -> Result<()> {
    let files = inputs(probs)?;
    let maps = files.iter().map(|p| io::read_gray(p)).collect::<Result<Vec<_>, _>>()?;
    let mut fields = Vec::with_capacity(maps.len().saturating_sub(1));
    let mut consistencies = Vec::with_capacity(maps.len().saturating_sub(1));
    for i in 2..=maps.len() {
        fields.push(io::read_flo(&flows.join(forward_name(i)))?);
        consistencies.push(io::read_gray(&flows.join(consistency_name(i)))?);
    }
    let smoothed = smooth_sequence(&maps, &fields, &consistencies)?;
    io::create_dir(out)?;
    for (path, map) in files.iter().zip(&smoothed) {
        io::write_gray16(&output_path(out, path), map)?;
    }
    Ok(())
}

pub fn trimap(probs: &Path, out: &Path, iterations_fraction: f64) -> Result<()> {
    let files = inputs(probs)?;
    io::create_dir(out)?;
    for path in &files {
        let t = make_trimap(&io::read_gray(path)?, iterations_fraction)?;
        io::write_trimap(&output_path(out, path), &t)?;
    }
    Ok(())
}
