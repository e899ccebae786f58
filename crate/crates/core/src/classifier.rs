//! Per-image normalization, weighted combination and main-character selection.

use image::DynamicImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canny::CannyError;
use crate::geometry::{analyze_person, DiscardReason, FaceRect, GateReason};
use crate::gray::{to_grayscale, GrayImage, ImageError};
use crate::pose::PoseFile;
use crate::scores::{area_score, face_sharpness, position_score, RawScores};

/// Weights, thresholds and filter parameters of the scoring pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub w_area: f64,
    pub w_sharp: f64,
    pub w_pos: f64,
    /// Threshold for images with more than two detected people.
    pub threshold_many: f64,
    /// Threshold for images with exactly two detected people.
    pub threshold_two: f64,
    pub min_head_conf: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    pub ear_eye_ratio: f64,
    pub canny_sigma: f64,
    /// Count gated persons as detections when picking the threshold.
    pub count_gated_as_detected: bool,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            w_area: 3.5,
            w_sharp: 3.0,
            w_pos: 1.2,
            threshold_many: 0.92,
            threshold_two: 0.86,
            min_head_conf: 0.45,
            canny_low: 50.0,
            canny_high: 250.0,
            ear_eye_ratio: 50.0,
            canny_sigma: crate::canny::DEFAULT_SIGMA,
            count_gated_as_detected: true,
        }
    }
}

impl ScoringConfig {
    /// Threshold applied for `detected` surviving persons; a lone person is
    /// always main.
    pub fn threshold_for(&self, detected: usize) -> f64 {
        match detected {
            0 | 1 => 0.0,
            2 => self.threshold_two,
            _ => self.threshold_many,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonStatus {
    Scored,
    Discarded,
    Gated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonResult {
    pub person_index: usize,
    pub status: PersonStatus,
    pub rect: Option<FaceRect>,
    pub discard_reason: Option<DiscardReason>,
    pub gate_reason: Option<GateReason>,
    pub raw: Option<RawScores>,
    pub norm_area: f64,
    pub norm_sharp: f64,
    pub norm_pos: f64,
    pub overall: f64,
    pub importance: f64,
    pub is_main: bool,
}

impl PersonResult {
    pub fn discarded(person_index: usize, reason: DiscardReason) -> Self {
        PersonResult {
            person_index,
            status: PersonStatus::Discarded,
            rect: None,
            discard_reason: Some(reason),
            gate_reason: None,
            raw: None,
            norm_area: 0.0,
            norm_sharp: 0.0,
            norm_pos: 0.0,
            overall: 0.0,
            importance: 0.0,
            is_main: false,
        }
    }

    /// A person that survived the geometry checks, with raw scores measured.
    pub fn retained(person_index: usize, rect: FaceRect, raw: RawScores, gate_reason: Option<GateReason>) -> Self {
        PersonResult {
            status: if raw.gaze == 1 { PersonStatus::Scored } else { PersonStatus::Gated },
            rect: Some(rect),
            discard_reason: None,
            gate_reason,
            raw: Some(raw),
            ..PersonResult::discarded(person_index, DiscardReason::TooFewHeadKeypoints)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageResult {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub persons: Vec<PersonResult>,
    pub threshold_used: f64,
    pub all_gated: bool,
}

impl ImageResult {
    pub fn mains(&self) -> impl Iterator<Item = &PersonResult> {
        self.persons.iter().filter(|p| p.is_main)
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Canny(#[from] CannyError),
}

/// Divides each value by the maximum; all zeros when the maximum is 0.
pub fn normalize_per_type(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter().map(|v| v / max).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Weighted sum of the normalized scores, times the gaze gate.
pub fn overall_score(area: f64, sharpness: f64, position: f64, gaze: u8, cfg: &ScoringConfig) -> f64 {
    (cfg.w_area * area + cfg.w_sharp * sharpness + cfg.w_pos * position) * f64::from(gaze)
}

/// Renormalizes overall scores so the top person has importance 1. The flag
/// is set when every score is 0.
pub fn finalize_importance(scores: &[f64]) -> (Vec<f64>, bool) {
    let all_gated = !scores.is_empty() && scores.iter().all(|&s| s <= 0.0);
    (normalize_per_type(scores), all_gated)
}

/// Flags persons whose importance exceeds the threshold for `detected`
/// persons. Only scored persons can be main; the top-ranked one always is,
/// unless the image is all-gated. Returns the flags and the threshold used.
pub fn select_main(
    importances: &[f64],
    statuses: &[PersonStatus],
    detected: usize,
    all_gated: bool,
    cfg: &ScoringConfig,
) -> (Vec<bool>, f64) {
    let threshold = cfg.threshold_for(detected);
    let flags = importances
        .iter()
        .zip(statuses)
        .map(|(&imp, &status)| {
            status == PersonStatus::Scored && !all_gated && (imp > threshold || imp >= 1.0)
        })
        .collect();
    (flags, threshold)
}

/// Normalizes raw scores across the retained persons of one image, combines
/// them and selects the main characters. Discarded persons pass through.
pub fn rank_persons(
    image_id: &str,
    width: usize,
    height: usize,
    mut persons: Vec<PersonResult>,
    cfg: &ScoringConfig,
) -> ImageResult {
    let retained: Vec<usize> = (0..persons.len()).filter(|&i| persons[i].raw.is_some()).collect();
    let raw = |f: fn(&RawScores) -> f64| -> Vec<f64> {
        retained.iter().map(|&i| f(persons[i].raw.as_ref().unwrap())).collect()
    };
    let (areas, sharps, positions) = (
        normalize_per_type(&raw(|r| r.area)),
        normalize_per_type(&raw(|r| r.sharpness)),
        normalize_per_type(&raw(|r| r.position)),
    );
    let mut overall = Vec::with_capacity(retained.len());
    for (k, &i) in retained.iter().enumerate() {
        let p = &mut persons[i];
        let gaze = p.raw.as_ref().unwrap().gaze;
        p.norm_area = areas[k];
        p.norm_sharp = sharps[k];
        p.norm_pos = positions[k];
        p.overall = overall_score(areas[k], sharps[k], positions[k], gaze, cfg);
        overall.push(p.overall);
    }
    let (importance, all_gated) = finalize_importance(&overall);
    let statuses: Vec<PersonStatus> = retained.iter().map(|&i| persons[i].status).collect();
    let detected = if cfg.count_gated_as_detected {
        retained.len()
    } else {
        statuses.iter().filter(|&&s| s == PersonStatus::Scored).count()
    };
    let (flags, threshold_used) = select_main(&importance, &statuses, detected, all_gated, cfg);
    for (k, &i) in retained.iter().enumerate() {
        persons[i].importance = importance[k];
        persons[i].is_main = flags[k];
    }
    ImageResult { image_id: image_id.to_string(), width, height, persons, threshold_used, all_gated }
}

/// Scores every person of `pose` on an already-converted grayscale image.
pub fn classify_gray(image: &GrayImage, pose: &PoseFile, cfg: &ScoringConfig) -> Result<ImageResult, ClassifyError> {
    let (w, h) = (image.width(), image.height());
    let persons = pose
        .people
        .iter()
        .enumerate()
        .map(|(index, skeleton)| {
            let verdict = analyze_person(skeleton, cfg.min_head_conf, cfg.ear_eye_ratio);
            let (Some(rect), None) = (verdict.rect, verdict.discard_reason) else {
                let reason = verdict.discard_reason.unwrap_or(DiscardReason::TooFewHeadKeypoints);
                return Ok(PersonResult::discarded(index, reason));
            };
            let sharp = face_sharpness(image, &rect, cfg.canny_low, cfg.canny_high, cfg.canny_sigma)?;
            let raw = RawScores {
                area: area_score(&rect),
                sharpness: sharp.value,
                position: position_score(&rect, w as f64, h as f64),
                gaze: verdict.gaze_gate,
                degenerate: sharp.degenerate,
            };
            Ok(PersonResult::retained(index, rect, raw, verdict.gate_reason))
        })
        .collect::<Result<Vec<_>, ClassifyError>>()?;
    Ok(rank_persons(&pose.source_image_id, w, h, persons, cfg))
}

/// Runs the whole pipeline on a decoded image and its pose file.
pub fn classify_image(image: &DynamicImage, pose: &PoseFile, cfg: &ScoringConfig) -> Result<ImageResult, ClassifyError> {
    classify_gray(&to_grayscale(image)?, pose, cfg)
}
