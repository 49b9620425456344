//! Fake motion: random multi-scale flow fields, exit-and-return shifts and
//! foreground clip rendering from a single still portrait.
//!
//! Random draws come from the caller's generator in a fixed order:
//! every grid of the total flow (coarsest first, cells row-major, `dx` then
//! `dy` per cell, standard normal via `rand_distr::Normal`), then the
//! exit-shift coin and, when it lands, the side index.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::imgcore::{
    axis_map, ensure_same_dims, half_pixel_coord, sample_bilinear, validity_mask, warp_backward, FlowField, GrayMap, ImageRgb, Plane,
    ValidityMask, Vec2,
};

/// Resolution of one random motion grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridSize {
    /// A single vector for the whole frame.
    WholeFrame,
    /// `⌊H/d⌋ × ⌊W/d⌋` cells.
    Divisor(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionScale {
    pub grid: GridSize,
    /// Standard deviation of each flow component, in pixels.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    /// Clip length N.
    pub frames: usize,
    pub scales: Vec<MotionScale>,
    pub exit_shift_probability: f64,
    /// Alpha above this value counts as opaque when checking frame sides.
    pub opacity_threshold: f64,
}

impl Default for MotionSpec {
    fn default() -> Self {
        MotionSpec {
            frames: 6,
            scales: vec![
                MotionScale {
                    grid: GridSize::WholeFrame,
                    sigma: 32.0,
                },
                MotionScale {
                    grid: GridSize::Divisor(128),
                    sigma: 16.0,
                },
                MotionScale {
                    grid: GridSize::Divisor(32),
                    sigma: 4.0,
                },
            ],
            exit_shift_probability: 1.0 / 3.0,
            opacity_threshold: 0.05,
        }
    }
}

impl MotionSpec {
    pub fn with_frames(frames: usize) -> Self {
        MotionSpec {
            frames,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(invalid(format!("clip length must be at least 2, got {}", self.frames)));
        }
        for s in &self.scales {
            if s.sigma.is_nan() || s.sigma <= 0.0 {
                return Err(invalid(format!("motion sigma must be positive, got {}", s.sigma)));
            }
            if s.grid == GridSize::Divisor(0) {
                return Err(invalid("grid divisor must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.exit_shift_probability) {
            return Err(invalid("exit shift probability must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Random coarse flow grids, before upscaling to the frame size.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionGrids {
    height: usize,
    width: usize,
    grids: Vec<FlowField>,
}

impl MotionGrids {
    /// Wraps already drawn grids destined for a `height`×`width` frame.
    pub fn from_grids(height: usize, width: usize, grids: Vec<FlowField>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid("frame must be non-empty"));
        }
        Ok(MotionGrids { height, width, grids })
    }

    pub fn grids(&self) -> &[FlowField] {
        &self.grids
    }

    /// Upscales every grid to the frame size and sums them.
    pub fn render(&self) -> FlowField {
        let xs: Vec<Vec<f64>> = self.grids.iter().map(|g| axis_map(g.width(), self.width)).collect();
        let ys: Vec<Vec<f64>> = self.grids.iter().map(|g| axis_map(g.height(), self.height)).collect();
        Plane::from_fn(self.height, self.width, |x, y| {
            self.grids
                .iter()
                .enumerate()
                .fold(Vec2::ZERO, |acc, (k, g)| acc + sample_bilinear(g, xs[k][x], ys[k][y]))
        })
    }

    /// The rendered total flow at one pixel, without materializing the field.
    pub fn at(&self, x: usize, y: usize) -> Vec2 {
        self.grids.iter().fold(Vec2::ZERO, |acc, g| {
            let sx = half_pixel_coord(x, g.width(), self.width);
            let sy = half_pixel_coord(y, g.height(), self.height);
            acc + sample_bilinear(g, sx, sy)
        })
    }
}

fn grid_dims(grid: GridSize, height: usize, width: usize) -> (usize, usize) {
    match grid {
        GridSize::WholeFrame => (1, 1),
        GridSize::Divisor(d) => (height / d, width / d),
    }
}

/// Draws the coarse flow grids for a `height`×`width` frame.
pub fn draw_motion_grids<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    spec: &MotionSpec,
    rng: &mut R,
) -> Result<MotionGrids> {
    spec.validate()?;
    let mut grids = Vec::with_capacity(spec.scales.len());
    for scale in &spec.scales {
        let (gh, gw) = grid_dims(scale.grid, height, width);
        if gh == 0 || gw == 0 {
            return Err(invalid(format!(
                "frame {height}x{width} too small for motion grid {:?}",
                scale.grid
            )));
        }
        let normal = Normal::new(0.0, scale.sigma).map_err(|e| invalid(e.to_string()))?;
        let data = (0..gh * gw)
            .map(|_| {
                let x = normal.sample(rng);
                let y = normal.sample(rng);
                Vec2::new(x, y)
            })
            .collect();
        grids.push(Plane::new(gh, gw, data)?);
    }
    MotionGrids::from_grids(height, width, grids)
}

/// Total displacement over the clip: the sum of all upscaled motion grids.
pub fn synth_total_flow<R: Rng + ?Sized>(
    height: usize,
    width: usize,
    spec: &MotionSpec,
    rng: &mut R,
) -> Result<FlowField> {
    Ok(draw_motion_grids(height, width, spec, rng)?.render())
}

/// Flow of frame `index` (0-based; frame 0 is the unwarped source): `index/frames · total`.
pub fn cumulative_flow(total: &FlowField, index: usize, frames: usize) -> Result<FlowField> {
    if index >= frames {
        return Err(invalid(format!("frame index {index} outside clip of {frames} frames")));
    }
    let factor = index as f64 / frames as f64;
    Ok(total.map(|&v| v * factor))
}

/// Direction in which content moves across the frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Left, Direction::Right, Direction::Up, Direction::Down];

    /// Backward-sampling flow that moves content half a frame in this direction.
    pub fn half_frame_flow(self, height: usize, width: usize) -> Vec2 {
        let hx = width as f64 / 2.0;
        let hy = height as f64 / 2.0;
        match self {
            Direction::Left => Vec2::new(hx, 0.0),
            Direction::Right => Vec2::new(-hx, 0.0),
            Direction::Up => Vec2::new(0.0, hy),
            Direction::Down => Vec2::new(0.0, -hy),
        }
    }
}

fn side_is_opaque(alpha: &GrayMap, side: Direction, threshold: f64) -> bool {
    let (h, w) = alpha.dims();
    match side {
        Direction::Left => (0..h).any(|y| alpha.get(0, y) > threshold),
        Direction::Right => (0..h).any(|y| alpha.get(w - 1, y) > threshold),
        Direction::Up => alpha.row(0).iter().any(|&a| a > threshold),
        Direction::Down => alpha.row(h - 1).iter().any(|&a| a > threshold),
    }
}

fn opposite(d: Direction) -> Direction {
    match d {
        Direction::Left => Direction::Right,
        Direction::Right => Direction::Left,
        Direction::Up => Direction::Down,
        Direction::Down => Direction::Up,
    }
}

/// Directions the person may leave through: the trailing frame side must be clear
/// of opaque pixels, otherwise border replication would smear them in.
pub fn admissible_exit_sides(alpha: &GrayMap, threshold: f64) -> Vec<Direction> {
    Direction::ALL
        .into_iter()
        .filter(|&d| !side_is_opaque(alpha, opposite(d), threshold))
        .collect()
}

/// Triangular schedule: 0 at both ends, 1 at mid clip.
pub fn triangular(t: f64) -> f64 {
    if t <= 0.5 {
        2.0 * t
    } else {
        2.0 * (1.0 - t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExitShift {
    pub side: Option<Direction>,
    /// Per-frame flow offsets.
    pub shifts: Vec<Vec2>,
}

/// Per-frame shifts that move the person halfway out of the frame and back,
/// applied with probability `spec.exit_shift_probability`.
pub fn exit_return_shift<R: Rng + ?Sized>(
    alpha: &GrayMap,
    spec: &MotionSpec,
    rng: &mut R,
) -> Result<ExitShift> {
    spec.validate()?;
    let n = spec.frames;
    let none = ExitShift {
        side: None,
        shifts: vec![Vec2::ZERO; n],
    };
    if !rng.gen_bool(spec.exit_shift_probability) {
        return Ok(none);
    }
    let sides = admissible_exit_sides(alpha, spec.opacity_threshold);
    if sides.is_empty() {
        return Ok(none);
    }
    let side = sides[rng.gen_range(0..sides.len())];
    Ok(ExitShift {
        side: Some(side),
        shifts: exit_schedule(side, alpha.height(), alpha.width(), n),
    })
}

/// The shift sequence for a given side over `frames` frames.
pub fn exit_schedule(side: Direction, height: usize, width: usize, frames: usize) -> Vec<Vec2> {
    let peak = side.half_frame_flow(height, width);
    (0..frames)
        .map(|i| {
            let t = if frames > 1 { i as f64 / (frames - 1) as f64 } else { 0.0 };
            peak * triangular(t)
        })
        .collect()
}

/// Uniformly chosen half-frame offset used to separate a second foreground.
pub fn draw_initial_shift<R: Rng + ?Sized>(height: usize, width: usize, rng: &mut R) -> (Direction, Vec2) {
    let d = Direction::ALL[rng.gen_range(0..4)];
    (d, d.half_frame_flow(height, width))
}

/// A portrait animated over N frames together with its exact flows.
#[derive(Clone, Debug, PartialEq)]
pub struct ForegroundClip {
    pub frames: Vec<ImageRgb>,
    pub alphas: Vec<GrayMap>,
    /// Flow from each frame back into the source portrait.
    pub cumulative_flows: Vec<FlowField>,
    pub total_flow: FlowField,
    pub exit_side: Option<Direction>,
    pub initial_shift: Vec2,
}

impl ForegroundClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.total_flow.dims()
    }
}

/// Animates `fg`/`alpha` into an N-frame clip. Every frame is warped once from
/// the source by its own flow.
pub fn render_foreground_clip<R: Rng + ?Sized>(
    fg: &ImageRgb,
    alpha: &GrayMap,
    spec: &MotionSpec,
    rng: &mut R,
    initial_shift: Vec2,
) -> Result<ForegroundClip> {
    ensure_same_dims(fg, alpha, "foreground alpha")?;
    let (h, w) = fg.dims();
    let n = spec.frames;
    let total_flow = synth_total_flow(h, w, spec, rng)?;
    let exit = exit_return_shift(alpha, spec, rng)?;

    let mut frames = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);
    let mut cumulative_flows = Vec::with_capacity(n);
    for (i, &shift) in exit.shifts.iter().enumerate() {
        let offset = shift + initial_shift;
        let flow = cumulative_flow(&total_flow, i, n)?.map(|&v| v + offset);
        frames.push(warp_backward(fg, &flow)?);
        alphas.push(warp_backward(alpha, &flow)?);
        cumulative_flows.push(flow);
    }
    Ok(ForegroundClip {
        frames,
        alphas,
        cumulative_flows,
        total_flow,
        exit_side: exit.side,
        initial_shift,
    })
}

/// Backward flow from frame `to` into frame `from` (0-based, `from < to`),
/// approximated as `c_to − c_from`, with its validity mask.
pub fn pairwise_flow(clip: &ForegroundClip, from: usize, to: usize) -> Result<(FlowField, ValidityMask)> {
    let n = clip.len();
    if from >= to || to >= n {
        return Err(invalid(format!(
            "pairwise flow needs from < to < {n}, got from={from} to={to}"
        )));
    }
    let flow = clip.cumulative_flows[to].zip_map(&clip.cumulative_flows[from], "cumulative flow", |a, b| a - b)?;
    let (h, w) = clip.dims();
    let mask = validity_mask(&flow, h, w);
    Ok((flow, mask))
}
