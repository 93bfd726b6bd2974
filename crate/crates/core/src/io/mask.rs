use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{label_components, PixelGrid};

/// How pixel values of a mask image are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Nonzero is foreground; objects come from connected components.
    #[default]
    Binary,
    /// Every distinct nonzero value is one object.
    Label,
}

impl FromStr for MaskMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Self::Binary),
            "label" => Ok(Self::Label),
            other => Err(Error::InvalidArgument(format!(
                "unknown mask mode {other:?}; expected binary or label"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMask {
    pub grid: PixelGrid,
    /// `(value in file, dense label)` for label mode; empty for binary mode.
    pub mapping: Vec<(u32, u32)>,
}

fn image_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_single_channel(path: &Path) -> Result<(usize, usize, Vec<u32>)> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| image_err(path, e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = match img {
        DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma16(b) => b.into_raw().into_iter().map(u32::from).collect(),
        other => {
            return Err(image_err(
                path,
                format!(
                    "expected a single-channel 8- or 16-bit mask, found {:?}",
                    other.color()
                ),
            ))
        }
    };
    Ok((w, h, values))
}

/// Maps distinct nonzero values to `1..=N` in ascending value order.
pub fn densify(values: &mut [u32]) -> Vec<(u32, u32)> {
    let mut distinct: BTreeMap<u32, u32> = values.iter().filter(|&&v| v != 0).map(|&v| (v, 0)).collect();
    for (i, dense) in distinct.values_mut().enumerate() {
        *dense = i as u32 + 1;
    }
    for v in values.iter_mut().filter(|v| **v != 0) {
        *v = distinct[v];
    }
    distinct.into_iter().collect()
}

pub fn load_mask(path: &Path, mpp: f64, mode: MaskMode) -> Result<LoadedMask> {
    let (w, h, mut values) = read_single_channel(path)?;
    match mode {
        MaskMode::Binary => {
            for v in &mut values {
                *v = u32::from(*v != 0);
            }
            let binary = PixelGrid::new(w, h, mpp, values)?;
            Ok(LoadedMask {
                grid: label_components(&binary),
                mapping: Vec::new(),
            })
        }
        MaskMode::Label => {
            let mapping = densify(&mut values);
            Ok(LoadedMask {
                grid: PixelGrid::new(w, h, mpp, values)?,
                mapping,
            })
        }
    }
}

/// Writes an 8-bit mask with foreground stored as 255.
pub fn save_binary_mask(path: &Path, grid: &PixelGrid) -> Result<()> {
    let data: Vec<u8> = grid.labels().iter().map(|&l| if l != 0 { 255 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(grid.width() as u32, grid.height() as u32, data).expect("buffer size matches grid");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e.to_string()))
}

/// Writes a 16-bit label mask.
pub fn save_label_mask(path: &Path, grid: &PixelGrid) -> Result<()> {
    if grid.max_label() > u32::from(u16::MAX) {
        return Err(image_err(
            path,
            format!("label {} does not fit a 16-bit mask", grid.max_label()),
        ));
    }
    let data: Vec<u16> = grid.labels().iter().map(|&l| l as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(grid.width() as u32, grid.height() as u32, data).expect("buffer size matches grid");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e.to_string()))
}

pub const OVERLAY_COLOR: [u8; 3] = [0, 255, 0];

/// Pixels of an object with a 4-neighbor outside that object.
pub fn boundary_pixels(grid: &PixelGrid) -> Vec<(usize, usize)> {
    let (w, h) = grid.dims();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = grid.get(x, y);
            if l == 0 {
                continue;
            }
            let edge = x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || grid.get(x - 1, y) != l
                || grid.get(x + 1, y) != l
                || grid.get(x, y - 1) != l
                || grid.get(x, y + 1) != l;
            if edge {
                out.push((x, y));
            }
        }
    }
    out
}

/// Draws object boundaries over a source image in [`OVERLAY_COLOR`].
pub fn render_overlay(source: &Path, mask: &PixelGrid) -> Result<RgbImage> {
    let img = ImageReader::open(source)
        .map_err(|e| Error::io(source, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(source, e))?
        .decode()
        .map_err(|e| image_err(source, e.to_string()))?;
    let mut rgb = img.to_rgb8();
    let dims = (rgb.width() as usize, rgb.height() as usize);
    if dims != mask.dims() {
        return Err(Error::DimensionMismatch {
            left: mask.dims(),
            right: dims,
        });
    }
    for (x, y) in boundary_pixels(mask) {
        rgb.put_pixel(x as u32, y as u32, Rgb(OVERLAY_COLOR));
    }
    Ok(rgb)
}

pub fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| image_err(path, e.to_string()))
}
