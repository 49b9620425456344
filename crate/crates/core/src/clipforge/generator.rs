use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{assemble_clip, augment_background, augment_foreground, AugmentationRecord, TrainingClip};
use crate::error::{invalid, Result};
use crate::fakemotion::{draw_initial_shift, render_foreground_clip, MotionSpec};
use crate::imgcore::{ensure_same_dims, resize_bilinear, GrayMap, ImageRgb, Pixel, Plane, Vec2};

#[derive(Clone, Debug)]
pub struct ForegroundAsset {
    pub id: String,
    pub image: ImageRgb,
    pub alpha: GrayMap,
}

#[derive(Clone, Debug)]
pub struct BackgroundAsset {
    pub id: String,
    pub frames: Vec<ImageRgb>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub height: usize,
    pub width: usize,
    pub motion: MotionSpec,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            height: 520,
            width: 520,
            motion: MotionSpec::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn frames(&self) -> usize {
        self.motion.frames
    }
}

/// Seeded clip generator over a fixed asset library.
pub struct ClipGenerator<'a> {
    foregrounds: &'a [ForegroundAsset],
    backgrounds: Vec<&'a BackgroundAsset>,
    config: GeneratorConfig,
}

fn fit<P: Pixel>(src: &Plane<P>, h: usize, w: usize) -> Result<Plane<P>> {
    if src.dims() == (h, w) {
        Ok(src.clone())
    } else {
        resize_bilinear(src, h, w)
    }
}

impl<'a> ClipGenerator<'a> {
    /// Backgrounds shorter than the clip length are skipped.
    pub fn new(
        foregrounds: &'a [ForegroundAsset],
        backgrounds: &'a [BackgroundAsset],
        config: GeneratorConfig,
    ) -> Result<Self> {
        config.motion.validate()?;
        if foregrounds.is_empty() {
            return Err(invalid("no foreground assets"));
        }
        for fg in foregrounds {
            ensure_same_dims(&fg.image, &fg.alpha, "foreground alpha")?;
        }
        let n = config.frames();
        let backgrounds: Vec<_> = backgrounds.iter().filter(|b| b.frames.len() >= n).collect();
        if backgrounds.is_empty() {
            return Err(invalid(format!("no background clip with at least {n} frames")));
        }
        Ok(ClipGenerator {
            foregrounds,
            backgrounds,
            config,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    /// Builds the clip for `seed`. The same seed and assets always give the same clip.
    pub fn generate(&self, seed: u64) -> Result<TrainingClip> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, w) = (self.config.height, self.config.width);
        let n = self.config.frames();
        let spec = &self.config.motion;

        let bg = self.backgrounds[rng.gen_range(0..self.backgrounds.len())];
        let start = rng.gen_range(0..=bg.frames.len() - n);
        let fg_a = &self.foregrounds[rng.gen_range(0..self.foregrounds.len())];
        let fg_b = &self.foregrounds[rng.gen_range(0..self.foregrounds.len())];

        let bg_frames = bg.frames[start..start + n]
            .iter()
            .map(|f| fit(f, h, w))
            .collect::<Result<Vec<_>>>()?;
        let (bg_frames, bg_aug) = augment_background(&bg_frames, &mut rng)?;
        let (img1, alpha1, aug1) = augment_foreground(&fit(&fg_a.image, h, w)?, &fit(&fg_a.alpha, h, w)?, &mut rng)?;
        let (img2, alpha2, aug2) = augment_foreground(&fit(&fg_b.image, h, w)?, &fit(&fg_b.alpha, h, w)?, &mut rng)?;

        let clip1 = render_foreground_clip(&img1, &alpha1, spec, &mut rng, Vec2::ZERO)?;
        let (shift_dir, shift) = draw_initial_shift(h, w, &mut rng);
        let clip2 = render_foreground_clip(&img2, &alpha2, spec, &mut rng, shift)?;

        let mut clip = assemble_clip(&bg_frames, clip1, &clip2, spec, &mut rng)?;
        let m = &mut clip.manifest;
        m.seed = seed;
        m.foreground_ids = vec![fg_a.id.clone(), fg_b.id.clone()];
        m.background_id = bg.id.clone();
        m.background_start = start;
        m.augmentation = AugmentationRecord {
            foregrounds: vec![aug1, aug2],
            background: bg_aug,
        };
        m.second_foreground_shift = Some(shift_dir);
        Ok(clip)
    }

    /// Rebuilds a clip from its manifest and checks that it matches the record.
    pub fn regenerate(&self, manifest: &super::ClipManifest) -> Result<TrainingClip> {
        if manifest.frames != self.config.frames()
            || manifest.height != self.config.height
            || manifest.width != self.config.width
            || manifest.motion != self.config.motion
        {
            return Err(invalid("manifest was produced with a different generator configuration"));
        }
        let clip = self.generate(manifest.seed)?;
        if &clip.manifest != manifest {
            return Err(invalid(format!(
                "seed {} no longer reproduces its manifest; asset library changed",
                manifest.seed
            )));
        }
        Ok(clip)
    }
}
