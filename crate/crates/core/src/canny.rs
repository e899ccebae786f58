//! Canny edge detection.
//!
//! Gaussian smoothing (5×5, separable), 3×3 Sobel gradients, non-maximum
//! suppression along the gradient direction quantized to four bins, double
//! thresholding and 8-connected hysteresis. Borders use edge replication.
//! Gradient magnitudes are on the unnormalized Sobel scale, so a full
//! 0→255 step has magnitude 1020.

use thiserror::Error;

use crate::gray::GrayImage;

pub const DEFAULT_SIGMA: f64 = 1.4;
const KERNEL_RADIUS: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum CannyError {
    #[error("canny thresholds must satisfy 0 <= low < high <= 255 (got low {low}, high {high})")]
    Thresholds { low: f64, high: f64 },
    #[error("gaussian sigma must be positive (got {0})")]
    Sigma(f64),
}

/// Binary edge map; every pixel is 0 or 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl EdgeMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x] == 255
    }

    pub fn edge_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 255).count()
    }

    /// Mean pixel value, i.e. 255 × edge fraction.
    pub fn mean(&self) -> f64 {
        255.0 * self.edge_count() as f64 / self.pixels.len() as f64
    }
}

/// Float plane with clamped (edge-replicated) reads.
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }
}

fn gaussian_kernel(sigma: f64) -> [f64; 2 * KERNEL_RADIUS + 1] {
    let mut k = [0.0; 2 * KERNEL_RADIUS + 1];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - KERNEL_RADIUS as f64;
        *v = (-(d * d) / (2.0 * sigma * sigma)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn blur(image: &GrayImage, sigma: f64) -> Plane {
    let (w, h) = (image.width(), image.height());
    let kernel = gaussian_kernel(sigma);
    let src = Plane { width: w, height: h, data: image.pixels().iter().map(|&p| f64::from(p)).collect() };
    let r = KERNEL_RADIUS as isize;
    let mut horiz = Plane { width: w, height: h, data: vec![0.0; w * h] };
    for y in 0..h {
        for x in 0..w {
            horiz.data[y * w + x] = (-r..=r)
                .map(|d| kernel[(d + r) as usize] * src.at(x as isize + d, y as isize))
                .sum();
        }
    }
    let mut out = Plane { width: w, height: h, data: vec![0.0; w * h] };
    for y in 0..h {
        for x in 0..w {
            out.data[y * w + x] = (-r..=r)
                .map(|d| kernel[(d + r) as usize] * horiz.at(x as isize, y as isize + d))
                .sum();
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Direction {
    Horizontal,
    Diagonal,
    Vertical,
    AntiDiagonal,
}

impl Direction {
    /// Quantizes the gradient angle (y downward) to one of four bins.
    fn of(gx: f64, gy: f64) -> Direction {
        let mut angle = gy.atan2(gx).to_degrees();
        if angle < 0.0 {
            angle += 180.0;
        }
        if !(22.5..157.5).contains(&angle) {
            Direction::Horizontal
        } else if angle < 67.5 {
            Direction::Diagonal
        } else if angle < 112.5 {
            Direction::Vertical
        } else {
            Direction::AntiDiagonal
        }
    }

    /// Neighbor offsets behind and ahead along the gradient.
    fn neighbors(self) -> ((isize, isize), (isize, isize)) {
        match self {
            Direction::Horizontal => ((-1, 0), (1, 0)),
            Direction::Diagonal => ((-1, -1), (1, 1)),
            Direction::Vertical => ((0, -1), (0, 1)),
            Direction::AntiDiagonal => ((1, -1), (-1, 1)),
        }
    }
}

/// Runs Canny with the default 5×5, σ = 1.4 smoothing.
pub fn canny_edges(crop: &GrayImage, low: f64, high: f64) -> Result<EdgeMap, CannyError> {
    canny_edges_with_sigma(crop, low, high, DEFAULT_SIGMA)
}

pub fn validate_thresholds(low: f64, high: f64) -> Result<(), CannyError> {
    if !(0.0 <= low && low < high && high <= 255.0) {
        return Err(CannyError::Thresholds { low, high });
    }
    Ok(())
}

pub fn canny_edges_with_sigma(crop: &GrayImage, low: f64, high: f64, sigma: f64) -> Result<EdgeMap, CannyError> {
    validate_thresholds(low, high)?;
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(CannyError::Sigma(sigma));
    }
    let (w, h) = (crop.width(), crop.height());
    let smooth = blur(crop, sigma);

    let mut magnitude = vec![0.0; w * h];
    let mut direction = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| smooth.at(x + dx, y + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            magnitude[y as usize * w + x as usize] = gx.hypot(gy);
            direction.push(Direction::of(gx, gy));
        }
    }

    // Non-maximum suppression; strictly greater than the neighbor behind and
    // at least the neighbor ahead, so plateaus thin to one pixel.
    let mag_at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            magnitude[y as usize * w + x as usize]
        }
    };
    let mut thin = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let m = magnitude[y * w + x];
            if m == 0.0 {
                continue;
            }
            let ((bx, by), (ax, ay)) = direction[y * w + x].neighbors();
            let (xi, yi) = (x as isize, y as isize);
            if m > mag_at(xi + bx, yi + by) && m >= mag_at(xi + ax, yi + ay) {
                thin[y * w + x] = m;
            }
        }
    }

    let mut pixels = vec![0u8; w * h];
    let mut stack: Vec<usize> = Vec::new();
    for (i, &m) in thin.iter().enumerate() {
        if m > high && pixels[i] == 0 {
            pixels[i] = 255;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (jx, jy) = ((j % w) as isize, (j / w) as isize);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (jx + dx, jy + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let n = ny as usize * w + nx as usize;
                        if pixels[n] == 0 && thin[n] > low {
                            pixels[n] = 255;
                            stack.push(n);
                        }
                    }
                }
            }
        }
    }
    Ok(EdgeMap { width: w, height: h, pixels })
}
