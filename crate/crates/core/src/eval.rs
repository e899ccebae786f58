//! Scoring predictions against multi-annotator ground truth.
//!
//! Main characters are the positive class. Ground-truth persons the pose
//! producer never detected count as negative predictions. Annotator column 0
//! is the expert and serves as ground truth for precision/recall/F1; all
//! columns feed the vote-agreement breakdown.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::PersonStatus;
use crate::geometry::FaceRect;
use crate::output::ResultDoc;

pub const DEFAULT_MATCH_IOU: f64 = 0.5;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("malformed annotation document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("annotation schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("annotation corpus has no images")]
    EmptyCorpus,
    #[error("annotator column {column} out of range (annotator_count = {count})")]
    AnnotatorColumn { column: usize, count: usize },
}

fn schema(path: String, message: impl Into<String>) -> EvalError {
    EvalError::Schema { path, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedPerson {
    pub gt_box: FaceRect,
    /// One vote per annotator, expert first.
    pub main_votes: Vec<bool>,
}

impl AnnotatedPerson {
    pub fn expert_main(&self) -> bool {
        self.main_votes[0]
    }

    pub fn vote_count(&self) -> usize {
        self.main_votes.iter().filter(|&&v| v).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub image_id: String,
    pub clear_case: bool,
    pub persons: Vec<AnnotatedPerson>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotations {
    pub annotator_count: usize,
    pub images: Vec<AnnotationSet>,
}

#[derive(Deserialize, Serialize)]
struct RawAnnotations {
    annotator_count: usize,
    images: Vec<RawImage>,
}

#[derive(Deserialize, Serialize)]
struct RawImage {
    id: String,
    clear: bool,
    persons: Vec<RawPerson>,
}

#[derive(Deserialize, Serialize)]
struct RawPerson {
    #[serde(rename = "box")]
    bbox: [f64; 4],
    votes: Vec<bool>,
}

impl Annotations {
    pub fn parse(bytes: &[u8]) -> Result<Self, EvalError> {
        let raw: RawAnnotations = serde_json::from_slice(bytes)?;
        let count = raw.annotator_count;
        if count == 0 {
            return Err(schema("annotator_count".into(), "must be at least 1"));
        }
        let images = raw
            .images
            .into_iter()
            .enumerate()
            .map(|(i, img)| {
                let persons = img
                    .persons
                    .into_iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let path = format!("images[{i}].persons[{j}]");
                        if p.votes.len() != count {
                            return Err(schema(
                                format!("{path}.votes"),
                                format!("expected {count} votes, found {}", p.votes.len()),
                            ));
                        }
                        let [l, t, w, h] = p.bbox;
                        if !(w > 0.0 && h > 0.0) || !p.bbox.iter().all(|v| v.is_finite()) {
                            return Err(schema(format!("{path}.box"), "width and height must be positive"));
                        }
                        Ok(AnnotatedPerson { gt_box: FaceRect::from_ltwh([l, t, w, h]), main_votes: p.votes })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if !persons.iter().any(AnnotatedPerson::expert_main) {
                    return Err(schema(format!("images[{i}]"), "no person marked main by the expert"));
                }
                Ok(AnnotationSet { image_id: img.id, clear_case: img.clear, persons })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        Ok(Annotations { annotator_count: count, images })
    }

    pub fn to_json(&self) -> String {
        let raw = RawAnnotations {
            annotator_count: self.annotator_count,
            images: self
                .images
                .iter()
                .map(|img| RawImage {
                    id: img.image_id.clone(),
                    clear: img.clear_case,
                    persons: img
                        .persons
                        .iter()
                        .map(|p| RawPerson { bbox: p.gt_box.ltwh(), votes: p.main_votes.clone() })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("annotation serialization")
    }
}

/// A predicted person: its facial rectangle and verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub rect: FaceRect,
    pub is_main: bool,
}

/// Predictions with a rectangle (scored or gated persons) from a result file.
pub fn predictions(doc: &ResultDoc) -> Vec<Prediction> {
    doc.persons
        .iter()
        .filter(|p| p.status != PersonStatus::Discarded)
        .filter_map(|p| p.face_rect().map(|rect| Prediction { rect, is_main: p.is_main }))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    /// `(gt index, prediction index, IoU)`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

/// Greedy one-to-one matching by descending IoU; pairs below `min_iou` are
/// never matched. Ties go to the lower gt index, then the lower prediction
/// index.
pub fn match_detections(gt: &[FaceRect], pred: &[FaceRect], min_iou: f64) -> MatchResult {
    let mut candidates: Vec<(usize, usize, f64)> = gt
        .iter()
        .enumerate()
        .flat_map(|(g, gb)| pred.iter().enumerate().map(move |(p, pb)| (g, p, gb.iou(pb))))
        .filter(|&(_, _, iou)| iou >= min_iou && iou > 0.0)
        .collect();
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut gt_used = vec![false; gt.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    for (g, p, iou) in candidates {
        if !gt_used[g] && !pred_used[p] {
            gt_used[g] = true;
            pred_used[p] = true;
            pairs.push((g, p, iou));
        }
    }
    MatchResult {
        pairs,
        unmatched_gt: (0..gt.len()).filter(|&g| !gt_used[g]).collect(),
        unmatched_pred: (0..pred.len()).filter(|&p| !pred_used[p]).collect(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Add for Confusion {
    type Output = Confusion;
    fn add(self, o: Confusion) -> Confusion {
        Confusion { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_, tn: self.tn + o.tn }
    }
}

impl AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        *self = *self + o;
    }
}

impl Confusion {
    pub fn metrics(&self) -> Metrics {
        prf1(self.tp, self.fp, self.fn_)
    }
}

/// Confusion counts of one image. Missed ground-truth persons count as
/// negative predictions; unmatched non-main predictions are ignored.
pub fn confusion_counts(m: &MatchResult, gt_main: &[bool], pred_main: &[bool]) -> Confusion {
    let mut c = Confusion::default();
    let mut tally = |gt: bool, pred: bool| match (gt, pred) {
        (true, true) => c.tp += 1,
        (true, false) => c.fn_ += 1,
        (false, true) => c.fp += 1,
        (false, false) => c.tn += 1,
    };
    for &(g, p, _) in &m.pairs {
        tally(gt_main[g], pred_main[p]);
    }
    for &g in &m.unmatched_gt {
        tally(gt_main[g], false);
    }
    for &p in &m.unmatched_pred {
        if pred_main[p] {
            tally(false, true);
        }
    }
    c
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 with every 0/0 mapped to 0.
pub fn prf1(tp: usize, fp: usize, fn_: usize) -> Metrics {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Metrics { precision, recall, f1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    /// Number of annotators who voted the person main.
    pub votes: usize,
    pub subjects: usize,
    pub predicted_main: usize,
    /// `predicted_main / subjects`; absent for an empty bucket.
    pub ratio: Option<f64>,
}

/// Buckets ground-truth persons by main votes, from `annotator_count` down to
/// 0. `predicted[i][j]` says whether person `j` of image `i` was predicted
/// main.
pub fn agreement_breakdown(annotations: &Annotations, predicted: &[Vec<bool>]) -> Result<Vec<AgreementRow>, EvalError> {
    let a = annotations.annotator_count;
    let mut subjects = vec![0usize; a + 1];
    let mut hits = vec![0usize; a + 1];
    for (i, img) in annotations.images.iter().enumerate() {
        for (j, person) in img.persons.iter().enumerate() {
            if person.main_votes.len() != a {
                return Err(schema(
                    format!("images[{i}].persons[{j}].votes"),
                    format!("expected {a} votes, found {}", person.main_votes.len()),
                ));
            }
            let k = person.vote_count();
            subjects[k] += 1;
            if predicted.get(i).and_then(|row| row.get(j)).copied().unwrap_or(false) {
                hits[k] += 1;
            }
        }
    }
    Ok((0..=a)
        .rev()
        .map(|k| AgreementRow {
            votes: k,
            subjects: subjects[k],
            predicted_main: hits[k],
            ratio: (subjects[k] > 0).then(|| hits[k] as f64 / subjects[k] as f64),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub images: usize,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

impl SubsetScore {
    fn new(images: usize, confusion: Confusion) -> Self {
        SubsetScore { images, confusion, metrics: confusion.metrics() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Row label in the rendered table.
    pub approach: String,
    pub all: SubsetScore,
    pub clear: SubsetScore,
    pub agreement: Vec<AgreementRow>,
    /// Annotated images with no result file.
    pub missing_results: Vec<String>,
}

/// Per-image outcome: confusion and which gt persons were predicted main.
fn score_image(ann: &AnnotationSet, preds: &[Prediction], min_iou: f64) -> (Confusion, Vec<bool>) {
    let gt_boxes: Vec<FaceRect> = ann.persons.iter().map(|p| p.gt_box).collect();
    let pred_boxes: Vec<FaceRect> = preds.iter().map(|p| p.rect).collect();
    let m = match_detections(&gt_boxes, &pred_boxes, min_iou);
    let gt_main: Vec<bool> = ann.persons.iter().map(AnnotatedPerson::expert_main).collect();
    let pred_main: Vec<bool> = preds.iter().map(|p| p.is_main).collect();
    let mut predicted = vec![false; ann.persons.len()];
    for &(g, p, _) in &m.pairs {
        predicted[g] = pred_main[p];
    }
    (confusion_counts(&m, &gt_main, &pred_main), predicted)
}

fn build_report(
    approach: &str,
    annotations: &Annotations,
    per_image: Vec<(Confusion, Vec<bool>)>,
    missing_results: Vec<String>,
) -> Result<EvalReport, EvalError> {
    let mut all = Confusion::default();
    let mut clear = Confusion::default();
    for (img, (c, _)) in annotations.images.iter().zip(&per_image) {
        all += *c;
        if img.clear_case {
            clear += *c;
        }
    }
    let predicted: Vec<Vec<bool>> = per_image.into_iter().map(|(_, p)| p).collect();
    let clear_images = annotations.images.iter().filter(|i| i.clear_case).count();
    Ok(EvalReport {
        approach: approach.to_string(),
        all: SubsetScore::new(annotations.images.len(), all),
        clear: SubsetScore::new(clear_images, clear),
        agreement: agreement_breakdown(annotations, &predicted)?,
        missing_results,
    })
}

/// Evaluates pipeline results (keyed by image id) against the expert
/// annotations. An annotated image without a result counts as all of its
/// persons undetected.
pub fn evaluate_corpus(
    annotations: &Annotations,
    results: &HashMap<String, ResultDoc>,
    min_iou: f64,
) -> Result<EvalReport, EvalError> {
    if annotations.images.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut missing = Vec::new();
    let per_image = annotations
        .images
        .iter()
        .map(|ann| {
            let preds = match results.get(&ann.image_id) {
                Some(doc) => predictions(doc),
                None => {
                    missing.push(ann.image_id.clone());
                    Vec::new()
                }
            };
            score_image(ann, &preds, min_iou)
        })
        .collect();
    build_report("Proposed method", annotations, per_image, missing)
}

/// Scores annotator `column` against the expert column on the same persons.
pub fn evaluate_annotator(annotations: &Annotations, column: usize) -> Result<EvalReport, EvalError> {
    if annotations.images.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    if column >= annotations.annotator_count {
        return Err(EvalError::AnnotatorColumn { column, count: annotations.annotator_count });
    }
    let per_image = annotations
        .images
        .iter()
        .map(|ann| {
            let preds: Vec<Prediction> =
                ann.persons.iter().map(|p| Prediction { rect: p.gt_box, is_main: p.main_votes[column] }).collect();
            let n = ann.persons.len();
            let m = MatchResult { pairs: (0..n).map(|i| (i, i, 1.0)).collect(), ..Default::default() };
            let gt_main: Vec<bool> = ann.persons.iter().map(AnnotatedPerson::expert_main).collect();
            let pred_main: Vec<bool> = preds.iter().map(|p| p.is_main).collect();
            (confusion_counts(&m, &gt_main, &pred_main), pred_main)
        })
        .collect();
    build_report(&format!("Annotator {column}"), annotations, per_image, Vec::new())
}

/// Mean precision/recall/F1 (all, clear) over the non-expert annotators.
pub fn average_annotator_metrics(annotations: &Annotations) -> Result<(Metrics, Metrics), EvalError> {
    let columns = 1..annotations.annotator_count;
    let n = columns.len();
    if n == 0 {
        return Err(EvalError::AnnotatorColumn { column: 1, count: annotations.annotator_count });
    }
    let mut all = Metrics::default();
    let mut clear = Metrics::default();
    for column in columns {
        let r = evaluate_annotator(annotations, column)?;
        for (acc, m) in [(&mut all, r.all.metrics), (&mut clear, r.clear.metrics)] {
            acc.precision += m.precision / n as f64;
            acc.recall += m.recall / n as f64;
            acc.f1 += m.f1 / n as f64;
        }
    }
    Ok((all, clear))
}

/// Precision/recall/F1 table with "all/clear" cells, one row per approach.
pub fn render_metrics_table(rows: &[(String, Metrics, Metrics)]) -> String {
    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("Approach".len());
    let cell = |a: f64, c: f64| format!("{a:.3}/{c:.3}");
    let mut out = String::new();
    let rule = format!("+-{}-+-------------+-------------+-------------+\n", "-".repeat(label_w));
    out.push_str(&rule);
    let _ = writeln!(out, "| {:<label_w$} | {:<11} | {:<11} | {:<11} |", "Approach", "Precision", "Recall", "F1-score");
    out.push_str(&rule);
    for (label, all, clear) in rows {
        let _ = writeln!(
            out,
            "| {:<label_w$} | {} | {} | {} |",
            label,
            cell(all.precision, clear.precision),
            cell(all.recall, clear.recall),
            cell(all.f1, clear.f1)
        );
    }
    out.push_str(&rule);
    out
}

/// Vote-agreement table: votes, subject count, ratio predicted main.
pub fn render_agreement_table(rows: &[AgreementRow]) -> String {
    let mut out = String::new();
    let rule = "+-------+----------+--------+\n";
    out.push_str(rule);
    out.push_str("| Votes | Subjects | Ratio  |\n");
    out.push_str(rule);
    for r in rows {
        let ratio = r.ratio.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(out, "| {:>5} | {:>8} | {:<6} |", r.votes, r.subjects, ratio);
    }
    out.push_str(rule);
    out
}

impl EvalReport {
    /// Plain-text report: metric table, counts and agreement table.
    pub fn render(&self, extra_rows: &[(String, Metrics, Metrics)]) -> String {
        let mut rows = vec![(self.approach.clone(), self.all.metrics, self.clear.metrics)];
        rows.extend_from_slice(extra_rows);
        let mut out = String::from("Performance on all images/on clear cases (expert annotations as ground truth)\n");
        out.push_str(&render_metrics_table(&rows));
        for (name, s) in [("all", &self.all), ("clear", &self.clear)] {
            let c = s.confusion;
            let _ = writeln!(out, "{name}: {} images, tp={} fp={} fn={} tn={}", s.images, c.tp, c.fp, c.fn_, c.tn);
        }
        if !self.missing_results.is_empty() {
            let _ = writeln!(out, "missing results: {}", self.missing_results.join(", "));
        }
        out.push_str("\nRatio of main character predictions by number of annotators voting main\n");
        out.push_str(&render_agreement_table(&self.agreement));
        out
    }
}
