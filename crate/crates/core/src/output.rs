//! Per-image result JSON.
//!
//! Every float is written with exactly six decimals so repeated runs produce
//! byte-identical files. The effective config is embedded in each result.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::classifier::{ImageResult, PersonStatus, ScoringConfig};
use crate::geometry::{DiscardReason, FaceRect, GateReason};

/// A float serialized with six fixed decimals.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Fixed6(pub f64);

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        // avoid "-0.000000"
        let v = if self.0 == 0.0 || (self.0.abs() < 5e-7) { 0.0 } else { self.0 };
        let raw = RawValue::from_string(format!("{v:.6}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fixed6 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Fixed6)
    }
}

impl From<f64> for Fixed6 {
    fn from(v: f64) -> Self {
        Fixed6(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub w_area: Fixed6,
    pub w_sharp: Fixed6,
    pub w_pos: Fixed6,
    pub threshold_many: Fixed6,
    pub threshold_two: Fixed6,
    pub min_head_conf: Fixed6,
    pub canny_low: Fixed6,
    pub canny_high: Fixed6,
    pub ear_eye_ratio: Fixed6,
    pub canny_sigma: Fixed6,
    pub count_gated_as_detected: bool,
}

impl From<&ScoringConfig> for ConfigDoc {
    fn from(c: &ScoringConfig) -> Self {
        ConfigDoc {
            w_area: c.w_area.into(),
            w_sharp: c.w_sharp.into(),
            w_pos: c.w_pos.into(),
            threshold_many: c.threshold_many.into(),
            threshold_two: c.threshold_two.into(),
            min_head_conf: c.min_head_conf.into(),
            canny_low: c.canny_low.into(),
            canny_high: c.canny_high.into(),
            ear_eye_ratio: c.ear_eye_ratio.into(),
            canny_sigma: c.canny_sigma.into(),
            count_gated_as_detected: c.count_gated_as_detected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresDoc {
    pub area_raw: Fixed6,
    pub sharp_raw: Fixed6,
    pub pos_raw: Fixed6,
    pub norm_area: Fixed6,
    pub norm_sharp: Fixed6,
    pub norm_pos: Fixed6,
    pub gaze: u8,
    pub overall: Fixed6,
    pub importance: Fixed6,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonDoc {
    pub index: usize,
    pub status: PersonStatus,
    pub discard_reason: Option<DiscardReason>,
    pub gate_reason: Option<GateReason>,
    pub rect: Option<[Fixed6; 4]>,
    pub scores: Option<ScoresDoc>,
    #[serde(default)]
    pub degenerate_crop: bool,
    pub is_main: bool,
}

impl PersonDoc {
    pub fn face_rect(&self) -> Option<FaceRect> {
        self.rect.map(|r| FaceRect::from_ltwh(r.map(|v| v.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub image_id: String,
    pub config: ConfigDoc,
    pub threshold_used: Fixed6,
    pub all_gated: bool,
    pub persons: Vec<PersonDoc>,
}

impl ResultDoc {
    pub fn new(result: &ImageResult, cfg: &ScoringConfig) -> Self {
        let persons = result
            .persons
            .iter()
            .map(|p| PersonDoc {
                index: p.person_index,
                status: p.status,
                discard_reason: p.discard_reason,
                gate_reason: p.gate_reason,
                rect: p.rect.map(|r| r.ltwh().map(Fixed6)),
                scores: p.raw.map(|raw| ScoresDoc {
                    area_raw: raw.area.into(),
                    sharp_raw: raw.sharpness.into(),
                    pos_raw: raw.position.into(),
                    norm_area: p.norm_area.into(),
                    norm_sharp: p.norm_sharp.into(),
                    norm_pos: p.norm_pos.into(),
                    gaze: raw.gaze,
                    overall: p.overall.into(),
                    importance: p.importance.into(),
                }),
                degenerate_crop: p.raw.is_some_and(|r| r.degenerate),
                is_main: p.is_main,
            })
            .collect();
        ResultDoc {
            image_id: result.image_id.clone(),
            config: cfg.into(),
            threshold_used: result.threshold_used.into(),
            all_gated: result.all_gated,
            persons,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serialization");
        s.push('\n');
        s
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}
