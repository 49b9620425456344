//! File interchange: 8-bit RGB frames, 16-bit gray maps, Middlebury `.flo` flows
//! and 8-bit masks/trimaps.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, ImageBuffer, Luma, RgbImage};

use crate::error::{Error, Result};
use crate::imgcore::{FlowField, GrayMap, ImageRgb, Plane, ValidityMask, Vec2};
use crate::probsmooth::Trimap;

/// Magic number opening every Middlebury flow file.
pub const FLO_MAGIC: f32 = 202021.25;
const FLO_HEADER: usize = 12;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
pub fn quantize_u16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

pub fn rgb_to_image(img: &ImageRgb) -> RgbImage {
    let raw = img.data().iter().flat_map(|p| p.map(quantize_u8)).collect();
    RgbImage::from_raw(img.width() as u32, img.height() as u32, raw).expect("buffer sized from raster")
}

pub fn rgb_from_image(img: &RgbImage) -> ImageRgb {
    let data = img
        .pixels()
        .map(|p| p.0.map(|c| c as f64 / 255.0))
        .collect();
    Plane::new(img.height() as usize, img.width() as usize, data).expect("decoded image is non-empty")
}

/// Reads any supported color image as linear [0, 1] RGB.
pub fn read_rgb(path: &Path) -> Result<ImageRgb> {
    let img = image::open(path).map_err(image_err(path))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: 0,
            reason: "empty image".into(),
        });
    }
    Ok(rgb_from_image(&img.to_rgb8()))
}

pub fn write_rgb(path: &Path, img: &ImageRgb) -> Result<()> {
    rgb_to_image(img).save(path).map_err(image_err(path))
}

/// Reads a gray map; 8-bit files are widened so that 255 maps to 1.
pub fn read_gray(path: &Path) -> Result<GrayMap> {
    let img = image::open(path).map_err(image_err(path))?.to_luma16();
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: 0,
            reason: "empty image".into(),
        });
    }
    let data = img.pixels().map(|p| p.0[0] as f64 / 65535.0).collect();
    Plane::new(img.height() as usize, img.width() as usize, data)
}

/// Writes a 16-bit gray PNG; value v is stored as round(v · 65535).
pub fn write_gray16(path: &Path, map: &GrayMap) -> Result<()> {
    let raw: Vec<u16> = map.data().iter().map(|&v| quantize_u16(v)).collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, raw).expect("buffer sized from raster");
    img.save(path).map_err(image_err(path))
}

pub fn write_mask(path: &Path, mask: &ValidityMask) -> Result<()> {
    let raw = mask.data().iter().map(|&v| if v { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, raw).expect("buffer sized from raster");
    img.save(path).map_err(image_err(path))
}

pub fn read_mask(path: &Path) -> Result<ValidityMask> {
    Ok(read_gray(path)?.map(|&v| v >= 0.5))
}

pub fn write_trimap(path: &Path, trimap: &Trimap) -> Result<()> {
    let raw = trimap.data().iter().map(|&l| l as u8).collect();
    let img =
        GrayImage::from_raw(trimap.width() as u32, trimap.height() as u32, raw).expect("buffer sized from raster");
    img.save(path).map_err(image_err(path))
}

/// Serializes a flow field in Middlebury format.
pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let mut buf = Vec::with_capacity(FLO_HEADER + flow.len() * 8);
    buf.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    buf.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    buf.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for v in flow.data() {
        buf.extend_from_slice(&(v.x as f32).to_le_bytes());
        buf.extend_from_slice(&(v.y as f32).to_le_bytes());
    }
    buf
}

/// Parses a Middlebury flow buffer; `path` only labels errors.
pub fn decode_flo(bytes: &[u8], path: &Path) -> Result<FlowField> {
    let fail = |offset: usize, reason: String| Error::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        reason,
    };
    let word = |at: usize| -> [u8; 4] { bytes[at..at + 4].try_into().expect("4-byte slice") };
    if bytes.len() < FLO_HEADER {
        return Err(fail(bytes.len(), format!("header needs {FLO_HEADER} bytes, file has {}", bytes.len())));
    }
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(fail(0, format!("bad magic {magic}, expected {FLO_MAGIC}")));
    }
    let width = i32::from_le_bytes(word(4));
    let height = i32::from_le_bytes(word(8));
    if width <= 0 {
        return Err(fail(4, format!("invalid width {width}")));
    }
    if height <= 0 {
        return Err(fail(8, format!("invalid height {height}")));
    }
    let (w, h) = (width as usize, height as usize);
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(FLO_HEADER))
        .ok_or_else(|| fail(4, format!("dimensions {w}x{h} overflow")))?;
    if bytes.len() < expected {
        return Err(fail(bytes.len(), format!("truncated: expected {expected} bytes")));
    }
    if bytes.len() > expected {
        return Err(fail(expected, format!("{} trailing bytes", bytes.len() - expected)));
    }
    let mut data = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let at = FLO_HEADER + i * 8;
        let dx = f32::from_le_bytes(word(at));
        let dy = f32::from_le_bytes(word(at + 4));
        if !dx.is_finite() || !dy.is_finite() {
            return Err(fail(at, "non-finite flow value".into()));
        }
        data.push(Vec2::new(dx as f64, dy as f64));
    }
    Plane::new(h, w, data)
}

pub fn write_flo(path: &Path, flow: &FlowField) -> Result<()> {
    fs::write(path, encode_flo(flow)).map_err(io_err(path))
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_flo(&bytes, path)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        offset: byte_offset(&text, e.line(), e.column()) as u64,
        reason: e.to_string(),
    })
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    start + column.saturating_sub(1)
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Files in `dir` with one of `extensions`, sorted by name.
pub fn list_files(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        if path.is_file() && extensions.contains(&ext.as_str()) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp", "tif", "tiff"];
