use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use vmkit_core::clipforge::{write_clip_dir, BackgroundAsset, ClipGenerator, ForegroundAsset, GeneratorConfig};
use vmkit_core::fakemotion::MotionSpec;
use vmkit_core::io::{self, IMAGE_EXTENSIONS};
use vmkit_core::seed::mix64;

pub struct GenJob {
    pub foregrounds: PathBuf,
    pub backgrounds: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub clips: usize,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
}

const ALPHA_SUFFIX: &str = "_alpha";

/// `<id>.<ext>` portraits, each with a matching `<id>_alpha.png`.
pub fn load_foregrounds(dir: &Path) -> Result<Vec<ForegroundAsset>> {
    let mut assets = Vec::new();
    for path in io::list_files(dir, IMAGE_EXTENSIONS)? {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if stem.ends_with(ALPHA_SUFFIX) {
            continue;
        }
        let alpha_path = dir.join(format!("{stem}{ALPHA_SUFFIX}.png"));
        if !alpha_path.is_file() {
            bail!("{}: no alpha matte {}", path.display(), alpha_path.display());
        }
        assets.push(ForegroundAsset {
            image: io::read_rgb(&path)?,
            alpha: io::read_gray(&alpha_path)?,
            id: stem,
        });
    }
    if assets.is_empty() {
        bail!("{}: no foreground images", dir.display());
    }
    Ok(assets)
}

/// One subdirectory of frames per background clip.
pub fn load_backgrounds(dir: &Path) -> Result<Vec<BackgroundAsset>> {
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("{}: cannot list background directory", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut assets = Vec::new();
    for sub in subdirs {
        let frames = io::list_files(&sub, IMAGE_EXTENSIONS)?
            .iter()
            .map(|p| io::read_rgb(p))
            .collect::<Result<Vec<_>, _>>()?;
        if frames.is_empty() {
            continue;
        }
        let id = sub.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        assets.push(BackgroundAsset { id, frames });
    }
    if assets.is_empty() {
        bail!("{}: no background clips", dir.display());
    }
    Ok(assets)
}

pub fn clip_dir_name(k: usize) -> String {
    format!("clip_{k:06}")
}

pub fn run(job: &GenJob) -> Result<()> {
    if job.clips == 0 {
        return Ok(());
    }
    if job.frames < 2 {
        bail!("clips need at least 2 frames, got {}", job.frames);
    }
    let fgs = load_foregrounds(&job.foregrounds)?;
    let bgs = load_backgrounds(&job.backgrounds)?;
    let config = GeneratorConfig {
        height: job.height,
        width: job.width,
        motion: MotionSpec::with_frames(job.frames),
    };
    let generator = ClipGenerator::new(&fgs, &bgs, config)?;
    io::create_dir(&job.out)?;
    (0..job.clips)
        .into_par_iter()
        .try_for_each(|k| write_one(&generator, &job.out, k, mix64(job.seed, k as u64)))
}

fn write_one(generator: &ClipGenerator<'_>, out: &Path, k: usize, seed: u64) -> Result<()> {
    let name = clip_dir_name(k);
    let tmp = out.join(format!(".{name}.tmp"));
    let done = out.join(&name);
    let result = (|| -> Result<()> {
        let clip = generator.generate(seed).with_context(|| format!("{name} (seed {seed:#018x})"))?;
        if tmp.exists() {
            fs::remove_dir_all(&tmp).with_context(|| format!("{}: cannot clear", tmp.display()))?;
        }
        io::create_dir(&tmp)?;
        write_clip_dir(&tmp, &clip)?;
        if done.exists() {
            fs::remove_dir_all(&done).with_context(|| format!("{}: cannot replace", done.display()))?;
        }
        fs::rename(&tmp, &done).with_context(|| format!("{}: cannot move into place", done.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&tmp);
    }
    result
}
