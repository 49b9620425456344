//! Toolkit for person video matting data and evaluation.
//!
//! - [`fakemotion`] animates still portraits into short clips with exact flows.
//! - [`clipforge`] composites those clips over background video into training clips.
//! - [`blockflow`] estimates block motion and forward/backward consistency.
//! - [`probsmooth`] temporally smooths person-probability maps and builds trimaps.
//! - [`matteval`] provides the training losses and temporal matte metrics.
//!
//! All rasters are [`imgcore::Plane`]s of `f64` values; flows use the
//! backward-sampling convention `out(x, y) = in(x + dx, y + dy)`.

pub mod blockflow;
pub mod clipforge;
pub mod error;
pub mod fakemotion;
pub mod imgcore;
pub mod io;
pub mod matteval;
pub mod probsmooth;
pub mod seed;

pub use error::{Error, Result};
pub use imgcore::{FlowField, GrayMap, ImageRgb, Plane, Rgb, ValidityMask, Vec2};
