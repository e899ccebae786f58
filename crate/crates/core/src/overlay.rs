//! Facial rectangle overlays: green for main characters, red for the rest.

use image::{Rgb, RgbImage};

use crate::geometry::FaceRect;
use crate::gray::round_half_up;
use crate::output::ResultDoc;

pub const MAIN_COLOR: Rgb<u8> = Rgb([0, 255, 0]);
pub const SIDE_COLOR: Rgb<u8> = Rgb([255, 0, 0]);
pub const LINE_WIDTH: i64 = 3;

/// Draws the outline of `rect` (edges rounded half-up) `LINE_WIDTH` pixels
/// thick, inside the rectangle, clipped to the image.
pub fn draw_rect(image: &mut RgbImage, rect: &FaceRect, color: Rgb<u8>) {
    let edge = |v: f64| round_half_up(v) as i64;
    let (x0, y0, x1, y1) = (edge(rect.left), edge(rect.top), edge(rect.right()), edge(rect.bottom()));
    let (w, h) = (i64::from(image.width()), i64::from(image.height()));
    for y in y0.max(0)..y1.min(h) {
        for x in x0.max(0)..x1.min(w) {
            let border = x < x0 + LINE_WIDTH || x >= x1 - LINE_WIDTH || y < y0 + LINE_WIDTH || y >= y1 - LINE_WIDTH;
            if border {
                image.put_pixel(x as u32, y as u32, color);
            }
        }
    }
}

/// Draws every person with a rectangle; mains are drawn last so they stay
/// visible where rectangles overlap.
pub fn draw_result(image: &mut RgbImage, result: &ResultDoc) {
    let mut persons: Vec<_> = result.persons.iter().filter_map(|p| p.face_rect().map(|r| (p.is_main, r))).collect();
    persons.sort_by_key(|(main, _)| *main);
    for (main, rect) in persons {
        draw_rect(image, &rect, if main { MAIN_COLOR } else { SIDE_COLOR });
    }
}
