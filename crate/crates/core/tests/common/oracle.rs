//! Straight-line recomputation of the scoring formulas from keypoints and
//! pixels. Uses the library only for Canny, which is checked separately
//! against OpenCV.

use mcs::{GrayImage, ScoringConfig, Skeleton};

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePerson {
    pub status: &'static str,
    pub rect: Option<[f64; 4]>,
    pub raw: [f64; 3],
    pub overall: f64,
    pub importance: f64,
    pub is_main: bool,
}

const HEAD: [usize; 5] = [17, 15, 0, 16, 18];

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn sharpness(img: &GrayImage, l: f64, t: f64, w: f64, cfg: &ScoringConfig) -> f64 {
    let clip = |v: f64, max: usize| ((v + 0.5).floor().max(0.0) as usize).min(max);
    let (x0, x1) = (clip(l, img.width()), clip(l + w, img.width()));
    let (y0, y1) = (clip(t, img.height()), clip(t + w, img.height()));
    if x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let crop = GrayImage::from_fn(x1 - x0, y1 - y0, |x, y| img.get(x0 + x, y0 + y)).unwrap();
    let edges = mcs::canny::canny_edges_with_sigma(&crop, cfg.canny_low, cfg.canny_high, cfg.canny_sigma).unwrap();
    let on = edges.pixels().iter().filter(|&&p| p == 255).count();
    255.0 * on as f64 / ((x1 - x0) * (y1 - y0)) as f64
}

/// Returns per-person verdicts and the all-gated flag.
pub fn classify(img: &GrayImage, people: &[Skeleton], cfg: &ScoringConfig) -> (Vec<OraclePerson>, bool) {
    let (iw, ih) = (img.width() as f64, img.height() as f64);
    let mut out = Vec::new();
    let mut raws: Vec<(usize, [f64; 3], f64)> = Vec::new();
    for s in people {
        let kp = |i: usize| s.keypoints()[i];
        let det = |i: usize| kp(i).confidence > 0.0;
        let mut discard = false;
        if det(15) && det(16) {
            if kp(15).x > kp(16).x {
                discard = true;
            } else if det(17) && det(18) {
                let eye = dist((kp(15).x, kp(15).y), (kp(16).x, kp(16).y));
                let ear = dist((kp(17).x, kp(17).y), (kp(18).x, kp(18).y));
                discard = eye == 0.0 || ear > cfg.ear_eye_ratio * eye;
            }
        }
        let head: Vec<usize> = HEAD.iter().copied().filter(|&i| det(i)).collect();
        let mut rect = None;
        if !discard && head.len() >= 2 {
            let mut lo = head[0];
            let mut hi = head[0];
            for &i in &head {
                if kp(i).x < kp(lo).x {
                    lo = i;
                }
                if kp(i).x > kp(hi).x {
                    hi = i;
                }
            }
            let w = kp(hi).x - kp(lo).x;
            if w > 0.0 {
                let my = (kp(lo).y + kp(hi).y) / 2.0;
                rect = Some([kp(lo).x, my - w / 2.0, w, w]);
            }
        }
        let Some(r) = rect else {
            out.push(OraclePerson { status: "discarded", rect: None, raw: [0.0; 3], overall: 0.0, importance: 0.0, is_main: false });
            continue;
        };
        let away = !det(15) && !det(16) && !det(0) && (det(17) || det(18));
        let conf = head.iter().map(|&i| kp(i).confidence).sum::<f64>() / head.len() as f64;
        let gate = if away || conf < cfg.min_head_conf { 0.0 } else { 1.0 };
        let center = (r[0] + r[2] / 2.0, r[1] + r[3] / 2.0);
        let diag = (iw * iw + ih * ih).sqrt();
        let raw = [
            r[2] * r[2],
            sharpness(img, r[0], r[1], r[2], cfg),
            (diag / 2.0 - dist(center, (iw / 2.0, ih / 2.0))).max(0.0),
        ];
        raws.push((out.len(), raw, gate));
        out.push(OraclePerson {
            status: if gate == 1.0 { "scored" } else { "gated" },
            rect: Some(r),
            raw,
            overall: 0.0,
            importance: 0.0,
            is_main: false,
        });
    }
    let maxima: Vec<f64> = (0..3).map(|k| raws.iter().map(|r| r.1[k]).fold(0.0, f64::max)).collect();
    let weights = [cfg.w_area, cfg.w_sharp, cfg.w_pos];
    for &(i, raw, gate) in &raws {
        let mut s = 0.0;
        for k in 0..3 {
            let n = if maxima[k] > 0.0 { raw[k] / maxima[k] } else { 0.0 };
            s += weights[k] * n;
        }
        out[i].overall = s * gate;
    }
    let top = raws.iter().map(|r| out[r.0].overall).fold(0.0, f64::max);
    let all_gated = !raws.is_empty() && top == 0.0;
    let threshold = match raws.len() {
        0 | 1 => 0.0,
        2 => cfg.threshold_two,
        _ => cfg.threshold_many,
    };
    for &(i, _, _) in &raws {
        let p = &mut out[i];
        p.importance = if top > 0.0 { p.overall / top } else { 0.0 };
        p.is_main = p.status == "scored" && !all_gated && (p.importance > threshold || p.importance >= 1.0);
    }
    (out, all_gated)
}
