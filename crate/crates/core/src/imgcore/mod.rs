//! Raster types, bilinear resampling, backward warping and alpha compositing.

mod composite;
mod plane;
mod sample;

pub use composite::{composite_over, luma};
pub(crate) use composite::over_pixel;
pub(crate) use plane::ensure_same_dims;
pub use plane::{FlowField, GrayMap, ImageRgb, Pixel, Plane, Rgb, ValidityMask, Vec2};
pub(crate) use sample::axis_map;
pub use sample::{half_pixel_coord, resize_bilinear, sample_bilinear, validity_mask, warp_backward};
