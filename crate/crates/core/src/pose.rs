//! Skeleton data model and the pose keypoint file format.
//!
//! A pose file is a JSON document with a `people` array; each person carries a
//! flat `pose_keypoints_2d` array of 75 numbers, `(x, y, confidence)` for the
//! 25 body keypoints in order. Missing keypoints are three zeros.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of keypoints in the body layout.
pub const KEYPOINT_COUNT: usize = 25;
/// Length of the flat keypoint array of one person.
pub const FLAT_LEN: usize = KEYPOINT_COUNT * 3;

pub const NOSE: usize = 0;
/// Subject's right eye (viewer's left in a frontal photo).
pub const RIGHT_EYE: usize = 15;
/// Subject's left eye.
pub const LEFT_EYE: usize = 16;
pub const RIGHT_EAR: usize = 17;
pub const LEFT_EAR: usize = 18;

/// Head keypoints in left-to-right order as seen in a frontal photo.
pub const HEAD_KEYPOINTS: [usize; 5] = [RIGHT_EAR, RIGHT_EYE, NOSE, LEFT_EYE, LEFT_EAR];

#[derive(Debug, Error)]
pub enum PoseError {
    #[error("malformed pose document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("person {person}: {message}")]
    Schema { person: usize, message: String },
    #[error("no detected head keypoints")]
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Keypoint { x, y, confidence }
    }

    /// Zero confidence is the producer's marker for a missing keypoint.
    pub fn is_detected(&self) -> bool {
        self.confidence > 0.0
    }

    pub fn distance(&self, other: &Keypoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One detected person: exactly 25 keypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    keypoints: [Keypoint; KEYPOINT_COUNT],
}

impl Default for Skeleton {
    fn default() -> Self {
        Skeleton { keypoints: [Keypoint::default(); KEYPOINT_COUNT] }
    }
}

impl Skeleton {
    pub fn new(keypoints: [Keypoint; KEYPOINT_COUNT]) -> Self {
        Skeleton { keypoints }
    }

    /// Builds a skeleton with only the given keypoints set; all others are
    /// undetected.
    pub fn from_points(points: &[(usize, Keypoint)]) -> Self {
        let mut s = Skeleton::default();
        for &(i, kp) in points {
            s.keypoints[i] = kp;
        }
        s
    }

    pub fn from_flat(flat: &[f64]) -> Option<Self> {
        if flat.len() != FLAT_LEN {
            return None;
        }
        let mut s = Skeleton::default();
        for (kp, c) in s.keypoints.iter_mut().zip(flat.chunks_exact(3)) {
            *kp = Keypoint::new(c[0], c[1], c[2]);
        }
        Some(s)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.keypoints.iter().flat_map(|k| [k.x, k.y, k.confidence]).collect()
    }

    pub fn keypoints(&self) -> &[Keypoint; KEYPOINT_COUNT] {
        &self.keypoints
    }

    pub fn get(&self, index: usize) -> &Keypoint {
        &self.keypoints[index]
    }

    pub fn set(&mut self, index: usize, kp: Keypoint) {
        self.keypoints[index] = kp;
    }

    /// Returns the keypoint only when it was detected.
    pub fn detected(&self, index: usize) -> Option<&Keypoint> {
        Some(&self.keypoints[index]).filter(|k| k.is_detected())
    }

    /// Applies `f` to the coordinates of every detected keypoint.
    pub fn map_coords(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Skeleton {
        let mut out = self.clone();
        for kp in out.keypoints.iter_mut().filter(|k| k.is_detected()) {
            let (x, y) = f(kp.x, kp.y);
            kp.x = x;
            kp.y = y;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoseFile {
    pub source_image_id: String,
    pub people: Vec<Skeleton>,
}

#[derive(Deserialize)]
struct RawPoseFile {
    people: Vec<RawPerson>,
}

#[derive(Deserialize)]
struct RawPerson {
    pose_keypoints_2d: Vec<f64>,
}

#[derive(Serialize)]
struct RawPoseFileOut<'a> {
    people: Vec<RawPersonOut<'a>>,
}

#[derive(Serialize)]
struct RawPersonOut<'a> {
    pose_keypoints_2d: &'a [f64],
}

/// Parses a pose keypoint document. Unknown keys are ignored.
pub fn parse_pose_file(bytes: &[u8], source_image_id: &str) -> Result<PoseFile, PoseError> {
    let raw: RawPoseFile = serde_json::from_slice(bytes)?;
    let people = raw
        .people
        .into_iter()
        .enumerate()
        .map(|(person, p)| {
            let flat = p.pose_keypoints_2d;
            let skeleton = Skeleton::from_flat(&flat).ok_or_else(|| PoseError::Schema {
                person,
                message: format!("expected {FLAT_LEN} keypoint values, found {}", flat.len()),
            })?;
            if let Some((k, kp)) = skeleton
                .keypoints()
                .iter()
                .enumerate()
                .find(|(_, kp)| !(0.0..=1.0).contains(&kp.confidence))
            {
                return Err(PoseError::Schema {
                    person,
                    message: format!("keypoint {k} confidence {} outside [0, 1]", kp.confidence),
                });
            }
            Ok(skeleton)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PoseFile { source_image_id: source_image_id.to_string(), people })
}

impl PoseFile {
    /// Serializes back to the pose file format.
    pub fn to_json(&self) -> String {
        let flats: Vec<Vec<f64>> = self.people.iter().map(Skeleton::to_flat).collect();
        let doc = RawPoseFileOut {
            people: flats.iter().map(|f| RawPersonOut { pose_keypoints_2d: f }).collect(),
        };
        serde_json::to_string(&doc).expect("pose file serialization")
    }
}

/// Detected head keypoints with their body-layout indices.
pub fn head_keypoints(s: &Skeleton) -> Vec<(usize, Keypoint)> {
    HEAD_KEYPOINTS
        .iter()
        .filter_map(|&i| s.detected(i).map(|kp| (i, *kp)))
        .collect()
}

/// Mean confidence over the detected head keypoints only.
pub fn head_confidence(s: &Skeleton) -> Result<f64, PoseError> {
    let head = head_keypoints(s);
    if head.is_empty() {
        return Err(PoseError::Undefined);
    }
    Ok(head.iter().map(|(_, k)| k.confidence).sum::<f64>() / head.len() as f64)
}
