//! Facial rectangles, skeleton anomaly filters and the gaze gate.

use serde::{Deserialize, Serialize};

use crate::pose::{
    head_confidence, head_keypoints, Keypoint, Skeleton, LEFT_EAR, LEFT_EYE, NOSE, RIGHT_EAR,
    RIGHT_EYE,
};

/// Square facial rectangle in pixel coordinates (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceRect {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub center: (f64, f64),
}

impl FaceRect {
    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    /// `[left, top, width, height]`.
    pub fn ltwh(&self) -> [f64; 4] {
        [self.left, self.top, self.width, self.height]
    }

    pub fn from_ltwh([left, top, width, height]: [f64; 4]) -> Self {
        FaceRect { left, top, width, height, center: (left + width / 2.0, top + height / 2.0) }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn iou(&self, other: &FaceRect) -> f64 {
        let w = (self.right().min(other.right()) - self.left.max(other.left)).max(0.0);
        let h = (self.bottom().min(other.bottom()) - self.top.max(other.top)).max(0.0);
        let inter = w * h;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    TooFewHeadKeypoints,
    ZeroWidth,
    EyeOrderAnomaly,
    EarSpanAnomaly,
}

/// Why a retained person has a zero gaze gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateReason {
    FacingAway,
    LowConfidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryVerdict {
    pub rect: Option<FaceRect>,
    pub gaze_gate: u8,
    pub discarded: bool,
    pub discard_reason: Option<DiscardReason>,
    pub gate_reason: Option<GateReason>,
}

impl GeometryVerdict {
    fn discard(reason: DiscardReason) -> Self {
        GeometryVerdict {
            rect: None,
            gaze_gate: 0,
            discarded: true,
            discard_reason: Some(reason),
            gate_reason: None,
        }
    }
}

/// Builds the facial rectangle from the leftmost and rightmost detected head
/// keypoints. Ties on x keep the earlier keypoint in ear-eye-nose-eye-ear order.
pub fn facial_rectangle(head: &[(usize, Keypoint)]) -> Result<FaceRect, DiscardReason> {
    if head.len() < 2 {
        return Err(DiscardReason::TooFewHeadKeypoints);
    }
    let mut leftmost = head[0].1;
    let mut rightmost = head[0].1;
    for (_, kp) in &head[1..] {
        if kp.x < leftmost.x {
            leftmost = *kp;
        }
        if kp.x > rightmost.x {
            rightmost = *kp;
        }
    }
    let width = rightmost.x - leftmost.x;
    if width <= 0.0 {
        return Err(DiscardReason::ZeroWidth);
    }
    let mid_y = (leftmost.y + rightmost.y) / 2.0;
    Ok(FaceRect {
        left: leftmost.x,
        top: mid_y - width / 2.0,
        width,
        height: width,
        center: (leftmost.x + width / 2.0, mid_y),
    })
}

/// Rejects skeletons that merge body parts of different people: swapped eyes,
/// or an ear span more than `ear_eye_ratio` times the eye span.
pub fn anomaly_filter(s: &Skeleton, ear_eye_ratio: f64) -> Result<(), DiscardReason> {
    let (Some(right_eye), Some(left_eye)) = (s.detected(RIGHT_EYE), s.detected(LEFT_EYE)) else {
        return Ok(());
    };
    if right_eye.x > left_eye.x {
        return Err(DiscardReason::EyeOrderAnomaly);
    }
    if let (Some(right_ear), Some(left_ear)) = (s.detected(RIGHT_EAR), s.detected(LEFT_EAR)) {
        let eye_span = right_eye.distance(left_eye);
        let ear_span = right_ear.distance(left_ear);
        // a zero eye span is an infinite ratio
        if eye_span == 0.0 || ear_span > ear_eye_ratio * eye_span {
            return Err(DiscardReason::EarSpanAnomaly);
        }
    }
    Ok(())
}

fn gate_reason(s: &Skeleton, min_conf: f64) -> Option<GateReason> {
    let face_hidden = [RIGHT_EYE, LEFT_EYE, NOSE].iter().all(|&i| s.detected(i).is_none());
    let ear_visible = s.detected(RIGHT_EAR).is_some() || s.detected(LEFT_EAR).is_some();
    if face_hidden && ear_visible {
        return Some(GateReason::FacingAway);
    }
    match head_confidence(s) {
        Ok(c) if c >= min_conf => None,
        _ => Some(GateReason::LowConfidence),
    }
}

/// 0 when the person faces away (ears only) or head confidence is below
/// `min_conf`, otherwise 1.
pub fn gaze_gate(s: &Skeleton, min_conf: f64) -> u8 {
    if gate_reason(s, min_conf).is_some() {
        0
    } else {
        1
    }
}

/// Runs the anomaly filters, the rectangle construction and the gaze gate.
pub fn analyze_person(s: &Skeleton, min_conf: f64, ear_eye_ratio: f64) -> GeometryVerdict {
    if let Err(reason) = anomaly_filter(s, ear_eye_ratio) {
        return GeometryVerdict::discard(reason);
    }
    let rect = match facial_rectangle(&head_keypoints(s)) {
        Ok(r) => r,
        Err(reason) => return GeometryVerdict::discard(reason),
    };
    let gate_reason = gate_reason(s, min_conf);
    GeometryVerdict {
        rect: Some(rect),
        gaze_gate: u8::from(gate_reason.is_none()),
        discarded: false,
        discard_reason: None,
        gate_reason,
    }
}
