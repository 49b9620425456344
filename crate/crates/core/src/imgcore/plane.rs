use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A pixel type that can be linearly interpolated.
pub trait Pixel: Copy + Send + Sync + 'static {
    /// Interpolates between `self` (t = 0) and `other` (t = 1).
    fn lerp(self, other: Self, t: f64) -> Self;
}

#[inline]
fn lerp_scalar(a: f64, b: f64, t: f64) -> f64 {
    // Clamping to the endpoint interval keeps interpolation convex under rounding.
    let v = a * (1.0 - t) + b * t;
    if a <= b {
        v.clamp(a, b)
    } else {
        v.clamp(b, a)
    }
}

impl Pixel for f64 {
    #[inline]
    fn lerp(self, other: Self, t: f64) -> Self {
        lerp_scalar(self, other, t)
    }
}

impl<const C: usize> Pixel for [f64; C] {
    #[inline]
    fn lerp(self, other: Self, t: f64) -> Self {
        let mut out = self;
        for (o, b) in out.iter_mut().zip(other) {
            *o = lerp_scalar(*o, b, t);
        }
        out
    }
}

impl Pixel for Vec2 {
    #[inline]
    fn lerp(self, other: Self, t: f64) -> Self {
        Vec2::new(lerp_scalar(self.x, other.x, t), lerp_scalar(self.y, other.y, t))
    }
}

/// A displacement in pixels: `x` along columns, `y` along rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Linear RGB triple with channels in [0, 1].
pub type Rgb = [f64; 3];

/// Dense row-major raster. `x` is the column, `y` the row, origin top-left.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<P> {
    height: usize,
    width: usize,
    data: Vec<P>,
}

/// Color frame, channels in [0, 1].
pub type ImageRgb = Plane<Rgb>;
/// Single-channel map in [0, 1]: alpha mattes, person probabilities, confidences.
pub type GrayMap = Plane<f64>;
/// Backward-sampling flow: `out(x, y) = in(x + dx, y + dy)`.
pub type FlowField = Plane<Vec2>;
/// Binary mask of pixels whose flow correspondence lands inside the source.
pub type ValidityMask = Plane<bool>;

impl<P: Copy> Plane<P> {
    pub fn new(height: usize, width: usize, data: Vec<P>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid(format!("raster must be non-empty, got {height}x{width}")));
        }
        if data.len() != height * width {
            return Err(Error::Length {
                what: "raster data",
                want: height * width,
                got: data.len(),
            });
        }
        Ok(Plane { height, width, data })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(height: usize, width: usize, value: P) -> Self {
        assert!(height > 0 && width > 0, "raster must be non-empty");
        Plane {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    /// Builds a raster from `f(x, y)`.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> P) -> Self {
        assert!(height > 0 && width > 0, "raster must be non-empty");
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[P] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<P> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[P] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<Q: Copy>(&self, f: impl FnMut(&P) -> Q) -> Plane<Q> {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Pixel-wise combination of two equally sized rasters.
    pub fn zip_map<Q: Copy, R: Copy>(
        &self,
        other: &Plane<Q>,
        what: &'static str,
        mut f: impl FnMut(P, Q) -> R,
    ) -> Result<Plane<R>> {
        ensure_same_dims(self, other, what)?;
        Ok(Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Mirrors the raster left to right.
    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            data.extend(self.row(y).iter().rev());
        }
        Plane {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// Copies the `width`×`height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(invalid(format!(
                "crop {width}x{height}+{x0}+{y0} outside {}x{} raster",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            data.extend_from_slice(&self.row(y)[x0..x0 + width]);
        }
        Ok(Plane {
            height,
            width,
            data,
        })
    }
}

impl ImageRgb {
    /// True when every channel lies in [0, 1].
    pub fn is_unit_range(&self) -> bool {
        self.data.iter().flatten().all(|v| (0.0..=1.0).contains(v))
    }
}

impl GrayMap {
    /// True when every value lies in [0, 1].
    pub fn is_unit_range(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

impl FlowField {
    pub fn zeros(height: usize, width: usize) -> Self {
        Plane::filled(height, width, Vec2::ZERO)
    }

    pub fn constant(height: usize, width: usize, v: Vec2) -> Self {
        Plane::filled(height, width, v)
    }

    /// Splits the field into its `dx` and `dy` component planes.
    pub fn components(&self) -> (Plane<f64>, Plane<f64>) {
        (self.map(|v| v.x), self.map(|v| v.y))
    }

    pub fn from_components(dx: &Plane<f64>, dy: &Plane<f64>) -> Result<Self> {
        dx.zip_map(dy, "flow components", Vec2::new)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.x.is_finite() && v.y.is_finite())
    }
}

pub(crate) fn ensure_same_dims<P, Q>(a: &Plane<P>, b: &Plane<Q>, what: &'static str) -> Result<()> {
    if a.height != b.height || a.width != b.width {
        return Err(Error::Dimensions {
            what,
            want_h: a.height,
            want_w: a.width,
            got_h: b.height,
            got_w: b.width,
        });
    }
    Ok(())
}
