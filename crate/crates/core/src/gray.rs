//! 8-bit grayscale rasters, luma conversion and rectangle cropping.

use image::DynamicImage;
use thiserror::Error;

use crate::geometry::FaceRect;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image has zero width or height")]
    EmptyImage,
    #[error("rectangle does not intersect the image")]
    EmptyCrop,
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage);
        }
        assert_eq!(pixels.len(), width * height, "pixel buffer does not match dimensions");
        Ok(GrayImage { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self, ImageError> {
        let pixels = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Copies the half-open window `[x0, x1) × [y0, y1)`.
    pub fn window(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<GrayImage, ImageError> {
        if x1 <= x0 || y1 <= y0 {
            return Err(ImageError::EmptyCrop);
        }
        let pixels = (y0..y1)
            .flat_map(|y| self.pixels[y * self.width + x0..y * self.width + x1].iter().copied())
            .collect();
        GrayImage::new(x1 - x0, y1 - y0, pixels)
    }
}

/// `round(0.299 R + 0.587 G + 0.114 B)` per pixel; grayscale inputs pass
/// through unchanged.
pub fn to_grayscale(image: &DynamicImage) -> Result<GrayImage, ImageError> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    if w == 0 || h == 0 {
        return Err(ImageError::EmptyImage);
    }
    let pixels = match image {
        DynamicImage::ImageLuma8(g) => g.as_raw().clone(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0]).collect(),
        other => other.to_rgb8().pixels().map(|p| luma(p.0)).collect(),
    };
    GrayImage::new(w, h, pixels)
}

pub fn luma([r, g, b]: [u8; 3]) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

pub(crate) fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Integer pixel bounds `(x0, y0, x1, y1)` of `rect` after round-half-up of
/// each edge, clipped to a `width × height` frame. `None` when empty.
pub fn pixel_bounds(rect: &FaceRect, width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
    let clip = |v: f64, max: usize| round_half_up(v).clamp(0.0, max as f64) as usize;
    let (x0, x1) = (clip(rect.left, width), clip(rect.right(), width));
    let (y0, y1) = (clip(rect.top, height), clip(rect.bottom(), height));
    (x1 > x0 && y1 > y0).then_some((x0, y0, x1, y1))
}

/// Crops `rect` from the image, clipped to the image bounds.
pub fn crop_rect(image: &GrayImage, rect: &FaceRect) -> Result<GrayImage, ImageError> {
    let (x0, y0, x1, y1) = pixel_bounds(rect, image.width, image.height).ok_or(ImageError::EmptyCrop)?;
    image.window(x0, y0, x1, y1)
}
