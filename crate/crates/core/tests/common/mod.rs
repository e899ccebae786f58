//! Synthetic fixtures shared by the integration tests.

#![allow(dead_code)]

pub mod oracle;

use mcs::canny::EdgeMap;
use mcs::GrayImage;

/// Reads a binary (P5) PGM file.
pub fn read_pgm(path: &std::path::Path) -> GrayImage {
    let bytes = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if bytes[pos] == b'#' {
            while bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(String::from_utf8(bytes[start..pos].to_vec()).unwrap());
    }
    assert_eq!(fields[0], "P5");
    let (w, h): (usize, usize) = (fields[1].parse().unwrap(), fields[2].parse().unwrap());
    let data = bytes[pos + 1..pos + 1 + w * h].to_vec();
    GrayImage::new(w, h, data).unwrap()
}

pub fn canny_fixture_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/canny")
}

pub const CANNY_FIXTURES: [&str; 10] = [
    "step",
    "hstep",
    "diag",
    "disk",
    "disk_blurred",
    "disk_dim",
    "rect",
    "texture",
    "texture_blurred",
    "constant",
];

/// Fixture image and the edge pixels of the reference implementation.
pub fn canny_fixture(name: &str) -> (GrayImage, Vec<(usize, usize)>) {
    let dir = canny_fixture_dir();
    let img = read_pgm(&dir.join(format!("{name}.pgm")));
    let reference = read_pgm(&dir.join(format!("{name}.ref.pgm")));
    let edges = (0..reference.height())
        .flat_map(|y| (0..reference.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| reference.get(x, y) == 255)
        .collect();
    (img, edges)
}

pub fn edges_of(map: &EdgeMap) -> Vec<(usize, usize)> {
    (0..map.height()).flat_map(|y| (0..map.width()).map(move |x| (x, y))).filter(|&(x, y)| map.is_edge(x, y)).collect()
}

/// Points of `a` with no point of `b` within Chebyshev distance 1.
pub fn outside_dilation(a: &[(usize, usize)], b: &[(usize, usize)]) -> usize {
    let set: std::collections::HashSet<(usize, usize)> = b.iter().copied().collect();
    a.iter()
        .filter(|&&(x, y)| {
            !(-1isize..=1).any(|dy| {
                (-1isize..=1).any(|dx| {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    nx >= 0 && ny >= 0 && set.contains(&(nx as usize, ny as usize))
                })
            })
        })
        .count()
}

/// Deterministic pseudo-random generator for fixture textures.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u32(&mut self) -> u32 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 33) as u32
    }
}

pub fn step(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |x, _| if x < w / 2 { 0 } else { 255 }).unwrap()
}

pub fn horizontal_step(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, y| if y < h / 2 { 20 } else { 230 }).unwrap()
}

pub fn diagonal_step(n: usize) -> GrayImage {
    GrayImage::from_fn(n, n, |x, y| if x > y { 255 } else { 0 }).unwrap()
}

pub fn disk(n: usize, r: f64, inside: u8, outside: u8) -> GrayImage {
    let c = n as f64 / 2.0;
    GrayImage::from_fn(n, n, |x, y| {
        if (x as f64 + 0.5 - c).hypot(y as f64 + 0.5 - c) <= r { inside } else { outside }
    })
    .unwrap()
}

pub fn constant(w: usize, h: usize, v: u8) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| v).unwrap()
}

pub fn rectangle(n: usize) -> GrayImage {
    GrayImage::from_fn(n, n, |x, y| if (10..30).contains(&x) && (8..26).contains(&y) { 240 } else { 10 }).unwrap()
}

/// Blocky random texture standing in for a detailed, in-focus face.
pub fn texture(w: usize, h: usize, block: usize, seed: u64) -> GrayImage {
    let mut rng = Lcg(seed);
    let bw = w.div_ceil(block);
    let cells: Vec<u8> = (0..bw * h.div_ceil(block)).map(|_| if rng.next_u32().is_multiple_of(2) { 25 } else { 230 }).collect();
    GrayImage::from_fn(w, h, |x, y| cells[(y / block) * bw + x / block]).unwrap()
}

/// Separable Gaussian blur (radius 3σ, clamped borders), rounded to 8 bits.
pub fn blurred(img: &GrayImage, sigma: f64) -> GrayImage {
    let r = (3.0 * sigma).ceil() as isize;
    let k: Vec<f64> = (-r..=r).map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = k.iter().sum();
    let (w, h) = (img.width() as isize, img.height() as isize);
    let pass = |src: &dyn Fn(isize, isize) -> f64, horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                out[(y * w + x) as usize] = (-r..=r)
                    .map(|d| {
                        let (sx, sy) = if horizontal { (x + d, y) } else { (x, y + d) };
                        k[(d + r) as usize] * src(sx.clamp(0, w - 1), sy.clamp(0, h - 1))
                    })
                    .sum::<f64>()
                    / sum;
            }
        }
        out
    };
    let first = pass(&|x, y| f64::from(img.get(x as usize, y as usize)), true);
    let second = pass(&|x, y| first[(y * w + x) as usize], false);
    GrayImage::new(img.width(), img.height(), second.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect()).unwrap()
}

/// A synthetic face: centre, width, texture seed and contrast style.
#[derive(Clone, Copy, Debug)]
pub struct Face {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub seed: u64,
    pub style: FaceStyle,
    pub confidence: f64,
    pub pose: HeadPose,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceStyle {
    /// Blocky high-contrast texture.
    Sharp,
    /// The same texture, Gaussian blurred.
    Soft,
    /// Nothing drawn; the crop shows the smooth background.
    Flat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeadPose {
    Frontal,
    /// Only the ears are detected.
    Away,
    /// Ears spread far beyond the eyes, as when two skeletons are merged.
    MergedEars,
    /// Eye keypoints swapped.
    SwappedEyes,
}

impl Face {
    pub fn new(cx: f64, cy: f64, width: f64, seed: u64) -> Self {
        Face { cx, cy, width, seed, style: FaceStyle::Sharp, confidence: 0.9, pose: HeadPose::Frontal }
    }

    pub fn style(mut self, style: FaceStyle) -> Self {
        self.style = style;
        self
    }

    pub fn confidence(mut self, c: f64) -> Self {
        self.confidence = c;
        self
    }

    pub fn pose(mut self, pose: HeadPose) -> Self {
        self.pose = pose;
        self
    }

    /// Head keypoints whose facial rectangle is centred on (cx, cy) with the
    /// given width: ears at the extremes, eyes and nose inside.
    pub fn skeleton(&self) -> mcs::Skeleton {
        use mcs::pose::{LEFT_EAR, LEFT_EYE, NOSE, RIGHT_EAR, RIGHT_EYE};
        let (cx, cy, w, c) = (self.cx, self.cy, self.width, self.confidence);
        let kp = |x: f64, y: f64| mcs::Keypoint::new(x, y, c);
        let mut points = vec![
            (RIGHT_EAR, kp(cx - w / 2.0, cy)),
            (LEFT_EAR, kp(cx + w / 2.0, cy)),
            (RIGHT_EYE, kp(cx - w / 4.0, cy - w / 10.0)),
            (LEFT_EYE, kp(cx + w / 4.0, cy - w / 10.0)),
            (NOSE, kp(cx, cy + w / 20.0)),
            // shoulders and neck, never used for scoring
            (1, kp(cx, cy + w)),
            (2, kp(cx - w, cy + w)),
            (5, kp(cx + w, cy + w)),
        ];
        match self.pose {
            HeadPose::Frontal => {}
            HeadPose::Away => points.retain(|(i, _)| ![RIGHT_EYE, LEFT_EYE, NOSE].contains(i)),
            HeadPose::MergedEars => {
                // eye span w/2 · 0.02; ear span w → ratio 100
                points[2].1 = kp(cx - w / 200.0, cy - w / 10.0);
                points[3].1 = kp(cx + w / 200.0, cy - w / 10.0);
            }
            HeadPose::SwappedEyes => {
                let (a, b) = (points[2].1, points[3].1);
                points[2].1 = b;
                points[3].1 = a;
            }
        }
        mcs::Skeleton::from_points(&points)
    }

    fn bounds(&self) -> (i64, i64, i64, i64) {
        let l = (self.cx - self.width / 2.0).round() as i64;
        let t = (self.cy - self.width / 2.0).round() as i64;
        (l, t, l + self.width.round() as i64, t + self.width.round() as i64)
    }
}

/// A grayscale photograph with a smooth background and textured faces.
#[derive(Clone, Debug)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub faces: Vec<Face>,
}

impl Scene {
    pub fn new(width: usize, height: usize, faces: Vec<Face>) -> Self {
        Scene { width, height, faces }
    }

    pub fn render(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        let mut px: Vec<u8> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (90.0 + 60.0 * (x as f64 / w as f64) + 30.0 * (y as f64 / h as f64)) as u8))
            .collect();
        for face in &self.faces {
            if face.style == FaceStyle::Flat {
                continue;
            }
            let (l, t, r, b) = face.bounds();
            let (fw, fh) = ((r - l) as usize, (b - t) as usize);
            let mut tex = texture(fw, fh, (fw / 8).max(2), face.seed);
            if face.style == FaceStyle::Soft {
                tex = blurred(&tex, fw as f64 / 12.0);
            }
            for y in 0..fh {
                for x in 0..fw {
                    let (ix, iy) = (l + x as i64, t + y as i64);
                    if ix >= 0 && iy >= 0 && (ix as usize) < w && (iy as usize) < h {
                        px[iy as usize * w + ix as usize] = tex.get(x, y);
                    }
                }
            }
        }
        GrayImage::new(w, h, px).unwrap()
    }

    pub fn pose_file(&self, id: &str) -> mcs::PoseFile {
        mcs::PoseFile { source_image_id: id.into(), people: self.faces.iter().map(Face::skeleton).collect() }
    }

    /// RGB PNG with R = G = B.
    pub fn write_png(&self, path: &std::path::Path) {
        let g = self.render();
        let rgb = image::RgbImage::from_fn(g.width() as u32, g.height() as u32, |x, y| {
            let v = g.get(x as usize, y as usize);
            image::Rgb([v, v, v])
        });
        rgb.save_with_format(path, image::ImageFormat::Png).unwrap();
    }

    /// Writes `<dir>/<id>.png` and `<pose_dir>/<id>.keypoints.json`.
    pub fn write(&self, dir: &std::path::Path, pose_dir: &std::path::Path, id: &str) -> std::path::PathBuf {
        let img = dir.join(format!("{id}.png"));
        self.write_png(&img);
        std::fs::write(pose_dir.join(format!("{id}.keypoints.json")), self.pose_file(id).to_json()).unwrap();
        img
    }
}

/// The six curated end-to-end scenes.
pub fn regression_scenes() -> Vec<(&'static str, Scene)> {
    vec![
        (
            "lead_and_bystander",
            Scene::new(640, 480, vec![Face::new(320.0, 220.0, 120.0, 1), Face::new(60.0, 50.0, 30.0, 2)]),
        ),
        (
            "symmetric_pair",
            Scene::new(640, 480, vec![Face::new(200.0, 240.0, 90.0, 3), Face::new(440.0, 240.0, 90.0, 3)]),
        ),
        ("back_facing", Scene::new(640, 480, vec![Face::new(320.0, 240.0, 100.0, 4).pose(HeadPose::Away)])),
        (
            "merged_skeleton",
            Scene::new(
                640,
                480,
                vec![
                    Face::new(320.0, 240.0, 300.0, 5).pose(HeadPose::MergedEars),
                    Face::new(200.0, 300.0, 80.0, 6),
                    Face::new(450.0, 300.0, 70.0, 7),
                ],
            ),
        ),
        (
            "low_confidence",
            Scene::new(640, 480, vec![Face::new(320.0, 240.0, 140.0, 8).confidence(0.3), Face::new(150.0, 200.0, 60.0, 9)]),
        ),
        (
            "crowd",
            Scene::new(
                640,
                480,
                vec![
                    Face::new(320.0, 240.0, 100.0, 10),
                    Face::new(180.0, 250.0, 96.0, 11),
                    Face::new(470.0, 230.0, 60.0, 12).style(FaceStyle::Soft),
                    Face::new(80.0, 400.0, 50.0, 13),
                    Face::new(560.0, 80.0, 40.0, 14).style(FaceStyle::Flat),
                ],
            ),
        ),
    ]
}
