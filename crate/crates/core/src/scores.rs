//! Raw salience scores of one facial rectangle: area, position and sharpness.

use crate::canny::{canny_edges_with_sigma, CannyError, DEFAULT_SIGMA};
use crate::geometry::FaceRect;
use crate::gray::{crop_rect, GrayImage};

/// Un-normalized scores of one person plus the gaze gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawScores {
    pub area: f64,
    pub sharpness: f64,
    pub position: f64,
    pub gaze: u8,
    /// Set when the rectangle lies entirely outside the image.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sharpness {
    pub value: f64,
    pub degenerate: bool,
}

/// W².
pub fn area_score(rect: &FaceRect) -> f64 {
    rect.width * rect.width
}

/// Half the image diagonal minus the distance from the rectangle centre to
/// the image centre, clamped at 0.
pub fn position_score(rect: &FaceRect, image_w: f64, image_h: f64) -> f64 {
    let half_diagonal = image_w.hypot(image_h) / 2.0;
    let d = (rect.center.0 - image_w / 2.0).hypot(rect.center.1 - image_h / 2.0);
    (half_diagonal - d).max(0.0)
}

/// Mean of the Canny edge map of `crop`: 255 × fraction of edge pixels.
pub fn sharpness_score(crop: &GrayImage, low: f64, high: f64) -> Result<f64, CannyError> {
    sharpness_score_with_sigma(crop, low, high, DEFAULT_SIGMA)
}

pub fn sharpness_score_with_sigma(crop: &GrayImage, low: f64, high: f64, sigma: f64) -> Result<f64, CannyError> {
    Ok(canny_edges_with_sigma(crop, low, high, sigma)?.mean())
}

/// Sharpness of the face region; a rectangle with no pixels inside the image
/// scores 0 and is flagged degenerate.
pub fn face_sharpness(
    image: &GrayImage,
    rect: &FaceRect,
    low: f64,
    high: f64,
    sigma: f64,
) -> Result<Sharpness, CannyError> {
    match crop_rect(image, rect) {
        Ok(crop) => Ok(Sharpness { value: sharpness_score_with_sigma(&crop, low, high, sigma)?, degenerate: false }),
        Err(_) => Ok(Sharpness { value: 0.0, degenerate: true }),
    }
}
