//! Training clip assembly: compositing branches, JPEG degradation, the seeded
//! generator and the on-disk clip layout.

mod augment;
mod generator;
pub mod layout;

use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::ImageFormat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fakemotion::{pairwise_flow, Direction, ForegroundClip, MotionSpec};
use crate::imgcore::{ensure_same_dims, over_pixel, FlowField, GrayMap, ImageRgb, Plane, ValidityMask};
use crate::io::{rgb_from_image, rgb_to_image};
use crate::matteval::FramePair;

pub use augment::{
    augment_background, augment_foreground, Augmentation, CropRect, BACKGROUND_MIN_AREA, BRIGHTNESS_RANGE,
    CONTRAST_MAX, CONTRAST_MIN, FOREGROUND_MAX_ANGLE_DEG, FOREGROUND_MIN_AREA,
};
pub use generator::{BackgroundAsset, ClipGenerator, ForegroundAsset, GeneratorConfig};
pub use layout::{read_clip_dir, write_clip_dir, ClipFiles};

pub const BACKGROUND_ONLY_PROBABILITY: f64 = 0.05;
pub const COMPOSITE_PROBABILITY: f64 = 0.5;
pub const JPEG_QUALITY_MIN: u8 = 30;
pub const JPEG_QUALITY_MAX: u8 = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Composited,
    ForegroundOnly,
    BackgroundOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub foregrounds: Vec<Augmentation>,
    pub background: Augmentation,
}

/// Everything needed to regenerate a clip from the source assets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipManifest {
    pub seed: u64,
    pub branch: Branch,
    pub foreground_ids: Vec<String>,
    pub background_id: String,
    pub background_start: usize,
    pub augmentation: AugmentationRecord,
    pub exit_sides: Vec<Option<Direction>>,
    pub second_foreground_shift: Option<Direction>,
    pub jpeg_quality: u8,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub motion: MotionSpec,
}

/// A generated training clip. Ground-truth flows come from the first foreground.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingClip {
    pub frames: Vec<ImageRgb>,
    pub gt_alphas: Vec<GrayMap>,
    pub gt_foregrounds: Vec<ImageRgb>,
    pub motion: ForegroundClip,
    pub manifest: ClipManifest,
}

impl TrainingClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Backward flow of frame `to` into frame `from` (0-based).
    pub fn pairwise_flow(&self, from: usize, to: usize) -> Result<(FlowField, ValidityMask)> {
        pairwise_flow(&self.motion, from, to)
    }

    /// Frame 0 → frame i pairs for the global temporal loss.
    pub fn pairs_from_first(&self) -> Result<Vec<FramePair>> {
        (1..self.len()).map(|i| self.pair(0, i)).collect()
    }

    /// Frame i−1 → frame i pairs for the local temporal loss.
    pub fn consecutive_pairs(&self) -> Result<Vec<FramePair>> {
        (1..self.len()).map(|i| self.pair(i - 1, i)).collect()
    }

    fn pair(&self, from: usize, to: usize) -> Result<FramePair> {
        let (flow, valid) = self.pairwise_flow(from, to)?;
        Ok(FramePair { from, to, flow, valid })
    }
}

/// JPEG round trip at `quality` (30–80).
pub fn jpeg_degrade(frame: &ImageRgb, quality: u8) -> Result<ImageRgb> {
    if !(JPEG_QUALITY_MIN..=JPEG_QUALITY_MAX).contains(&quality) {
        return Err(invalid(format!(
            "JPEG quality {quality} outside {JPEG_QUALITY_MIN}..={JPEG_QUALITY_MAX}"
        )));
    }
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality).encode_image(&rgb_to_image(frame))?;
    let decoded = image::load(Cursor::new(buf), ImageFormat::Jpeg)?.to_rgb8();
    Ok(rgb_from_image(&decoded))
}

/// Picks the compositing branch and JPEG quality, then builds the clip.
///
/// Background-only with probability 5%; otherwise a fair coin between
/// compositing both foregrounds over the background (fg1 in front) and using
/// the first foreground clip as is.
pub fn assemble_clip<R: Rng + ?Sized>(
    bg: &[ImageRgb],
    fg1: ForegroundClip,
    fg2: &ForegroundClip,
    spec: &MotionSpec,
    rng: &mut R,
) -> Result<TrainingClip> {
    let n = fg1.len();
    for (what, len) in [("background clip", bg.len()), ("second foreground clip", fg2.len())] {
        if len != n {
            return Err(Error::Length { what, want: n, got: len });
        }
    }
    if n == 0 {
        return Err(invalid("clip has no frames"));
    }
    let reference = &fg1.frames[0];
    for i in 0..n {
        ensure_same_dims(reference, &bg[i], "background frame")?;
        ensure_same_dims(reference, &fg1.frames[i], "foreground frame")?;
        ensure_same_dims(reference, &fg2.frames[i], "second foreground frame")?;
    }
    let (h, w) = reference.dims();

    let branch = if rng.gen::<f64>() < BACKGROUND_ONLY_PROBABILITY {
        Branch::BackgroundOnly
    } else if rng.gen_bool(COMPOSITE_PROBABILITY) {
        Branch::Composited
    } else {
        Branch::ForegroundOnly
    };
    let quality = rng.gen_range(JPEG_QUALITY_MIN..=JPEG_QUALITY_MAX);

    let (frames, gt_alphas, gt_foregrounds) = match branch {
        Branch::BackgroundOnly => (
            bg.to_vec(),
            vec![Plane::filled(h, w, 0.0); n],
            vec![Plane::filled(h, w, [0.0; 3]); n],
        ),
        Branch::ForegroundOnly => (fg1.frames.clone(), fg1.alphas.clone(), fg1.frames.clone()),
        Branch::Composited => {
            let mut frames = Vec::with_capacity(n);
            let mut alphas = Vec::with_capacity(n);
            let mut fgs = Vec::with_capacity(n);
            for i in 0..n {
                let (f1, a1) = (&fg1.frames[i], &fg1.alphas[i]);
                let (f2, a2) = (&fg2.frames[i], &fg2.alphas[i]);
                let frame = Plane::from_fn(h, w, |x, y| {
                    let back = over_pixel(f2.get(x, y), a2.get(x, y), bg[i].get(x, y));
                    over_pixel(f1.get(x, y), a1.get(x, y), back)
                });
                let alpha = a1.zip_map(a2, "alpha", |p, q| (p + (1.0 - p) * q).clamp(0.0, 1.0))?;
                let fg = Plane::from_fn(h, w, |x, y| over_pixel(f1.get(x, y), a1.get(x, y), f2.get(x, y)));
                frames.push(frame);
                alphas.push(alpha);
                fgs.push(fg);
            }
            (frames, alphas, fgs)
        }
    };
    let frames = frames
        .iter()
        .map(|f| jpeg_degrade(f, quality))
        .collect::<Result<Vec<_>>>()?;

    let manifest = ClipManifest {
        seed: 0,
        branch,
        foreground_ids: Vec::new(),
        background_id: String::new(),
        background_start: 0,
        augmentation: AugmentationRecord {
            foregrounds: Vec::new(),
            background: Augmentation::identity(h, w),
        },
        exit_sides: vec![fg1.exit_side, fg2.exit_side],
        second_foreground_shift: None,
        jpeg_quality: quality,
        frames: n,
        width: w,
        height: h,
        motion: spec.clone(),
    };
    Ok(TrainingClip {
        frames,
        gt_alphas,
        gt_foregrounds,
        motion: fg1,
        manifest,
    })
}
