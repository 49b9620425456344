//! Geometric and photometric augmentation of foregrounds and backgrounds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::imgcore::{ensure_same_dims, resize_bilinear, sample_bilinear, GrayMap, ImageRgb, Pixel, Plane};

pub const FOREGROUND_MAX_ANGLE_DEG: f64 = 15.0;
pub const FOREGROUND_MIN_AREA: f64 = 0.2;
pub const BACKGROUND_MIN_AREA: f64 = 0.08;
pub const BRIGHTNESS_RANGE: f64 = 0.2;
pub const CONTRAST_MIN: f64 = 0.8;
pub const CONTRAST_MAX: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// One sampled augmentation, replayable on any raster of the same size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Augmentation {
    /// Counter-clockwise rotation about the image center, degrees.
    pub angle_deg: f64,
    pub crop: CropRect,
    pub flip: bool,
    /// Added to every channel.
    pub brightness: f64,
    /// Scale about mid-gray.
    pub contrast: f64,
}

impl Augmentation {
    pub fn identity(height: usize, width: usize) -> Self {
        Augmentation {
            angle_deg: 0.0,
            crop: CropRect {
                x: 0,
                y: 0,
                width,
                height,
            },
            flip: false,
            brightness: 0.0,
            contrast: 1.0,
        }
    }

    /// Draws angle (when `max_angle_deg > 0`), crop area, crop position, flip,
    /// brightness and contrast, in that order.
    pub fn sample<R: Rng + ?Sized>(
        rng: &mut R,
        height: usize,
        width: usize,
        max_angle_deg: f64,
        min_area: f64,
    ) -> Self {
        let angle_deg = if max_angle_deg > 0.0 {
            rng.gen_range(-max_angle_deg..=max_angle_deg)
        } else {
            0.0
        };
        let area: f64 = rng.gen_range(min_area..=1.0);
        let side = area.sqrt();
        let cw = ((side * width as f64).round() as usize).clamp(1, width);
        let ch = ((side * height as f64).round() as usize).clamp(1, height);
        let x = rng.gen_range(0..=width - cw);
        let y = rng.gen_range(0..=height - ch);
        let flip = rng.gen_bool(0.5);
        let brightness = rng.gen_range(-BRIGHTNESS_RANGE..=BRIGHTNESS_RANGE);
        let contrast = rng.gen_range(CONTRAST_MIN..=CONTRAST_MAX);
        Augmentation {
            angle_deg,
            crop: CropRect {
                x,
                y,
                width: cw,
                height: ch,
            },
            flip,
            brightness,
            contrast,
        }
    }

    /// Rotation (border replicated), crop resized back to full size, then flip.
    pub fn apply_geometry<P: Pixel>(&self, src: &Plane<P>) -> Result<Plane<P>> {
        let (h, w) = src.dims();
        let rotated = if self.angle_deg != 0.0 {
            rotate(src, self.angle_deg)
        } else {
            src.clone()
        };
        let c = self.crop;
        let cropped = if (c.x, c.y, c.width, c.height) != (0, 0, w, h) {
            resize_bilinear(&rotated.crop(c.x, c.y, c.width, c.height)?, h, w)?
        } else {
            rotated
        };
        Ok(if self.flip {
            cropped.flip_horizontal()
        } else {
            cropped
        })
    }

    pub fn apply_color(&self, img: &ImageRgb) -> ImageRgb {
        if self.brightness == 0.0 && self.contrast == 1.0 {
            return img.clone();
        }
        img.map(|p| p.map(|v| (self.contrast * (v - 0.5) + 0.5 + self.brightness).clamp(0.0, 1.0)))
    }
}

fn rotate<P: Pixel>(src: &Plane<P>, angle_deg: f64) -> Plane<P> {
    let (h, w) = src.dims();
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    Plane::from_fn(h, w, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        // Inverse rotation; rows grow downwards, so positive angles turn content counter-clockwise.
        let sx = cx + cos * dx - sin * dy;
        let sy = cy + sin * dx + cos * dy;
        sample_bilinear(src, sx, sy)
    })
}

/// Rotation, crop, flip and brightness/contrast on a portrait; alpha gets the
/// same geometry and no color change.
pub fn augment_foreground<R: Rng + ?Sized>(
    img: &ImageRgb,
    alpha: &GrayMap,
    rng: &mut R,
) -> Result<(ImageRgb, GrayMap, Augmentation)> {
    ensure_same_dims(img, alpha, "foreground alpha")?;
    let (h, w) = img.dims();
    let aug = Augmentation::sample(rng, h, w, FOREGROUND_MAX_ANGLE_DEG, FOREGROUND_MIN_AREA);
    let out = aug.apply_color(&aug.apply_geometry(img)?);
    let a = aug.apply_geometry(alpha)?;
    Ok((out, a, aug))
}

/// Crop, flip and brightness/contrast, sampled once and applied to every frame.
pub fn augment_background<R: Rng + ?Sized>(
    clip: &[ImageRgb],
    rng: &mut R,
) -> Result<(Vec<ImageRgb>, Augmentation)> {
    let Some(first) = clip.first() else {
        return Err(invalid("background clip is empty"));
    };
    let (h, w) = first.dims();
    let aug = Augmentation::sample(rng, h, w, 0.0, BACKGROUND_MIN_AREA);
    let frames = clip
        .iter()
        .map(|f| {
            ensure_same_dims(first, f, "background frame")?;
            Ok(aug.apply_color(&aug.apply_geometry(f)?))
        })
        .collect::<Result<_>>()?;
    Ok((frames, aug))
}
