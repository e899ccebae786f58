//! Batch scoring of image files with a bounded worker pool.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_image, ScoringConfig};
use crate::output::ResultDoc;
use crate::pose::parse_pose_file;

pub const POSE_SUFFIX: &str = ".keypoints.json";
pub const RESULT_SUFFIX: &str = ".result.json";
pub const MANIFEST_NAME: &str = "manifest.json";
const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImageStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "decode-error")]
    DecodeError,
    #[serde(rename = "pose-missing")]
    PoseMissing,
    #[serde(rename = "pose-error")]
    PoseError,
    #[serde(rename = "error")]
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub pose: Option<PathBuf>,
    pub result: Option<PathBuf>,
    pub status: ImageStatus,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub pose_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl RunManifest {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.status == ImageStatus::Ok)
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Expands directories (non-recursively) into their PNG/JPEG files. Files
/// given explicitly are kept as is. The result is sorted and deduplicated.
pub fn collect_images(inputs: &[PathBuf]) -> std::io::Result<Vec<PathBuf>> {
    let mut images = Vec::new();
    for input in inputs {
        if input.is_dir() {
            for entry in std::fs::read_dir(input)? {
                let path = entry?.path();
                if path.is_file() && is_image(&path) {
                    images.push(path);
                }
            }
        } else {
            images.push(input.clone());
        }
    }
    images.sort();
    images.dedup();
    Ok(images)
}

pub fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// `<stem>.keypoints.json` under `pose_dir`, or next to the image.
pub fn pose_path(image: &Path, pose_dir: Option<&Path>) -> PathBuf {
    let name = format!("{}{POSE_SUFFIX}", image_id(image));
    match pose_dir {
        Some(dir) => dir.join(name),
        None => image.with_file_name(name),
    }
}

pub fn result_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("{id}{RESULT_SUFFIX}"))
}

fn process(image: &Path, pose_dir: Option<&Path>, out_dir: &Path, cfg: &ScoringConfig) -> ManifestEntry {
    let id = image_id(image);
    let pose = pose_path(image, pose_dir);
    let entry = |status, message: Option<String>, result: Option<PathBuf>| ManifestEntry {
        image: image.to_path_buf(),
        pose: pose.is_file().then(|| pose.clone()),
        result,
        status,
        message,
    };
    if !pose.is_file() {
        return entry(ImageStatus::PoseMissing, Some(format!("no pose file at {}", pose.display())), None);
    }
    let pose_file = match std::fs::read(&pose).map_err(|e| e.to_string()).and_then(|b| {
        parse_pose_file(&b, &id).map_err(|e| e.to_string())
    }) {
        Ok(p) => p,
        Err(e) => return entry(ImageStatus::PoseError, Some(e), None),
    };
    let decoded = match image::open(image) {
        Ok(img) => img,
        Err(e) => return entry(ImageStatus::DecodeError, Some(e.to_string()), None),
    };
    let result = match classify_image(&decoded, &pose_file, cfg) {
        Ok(r) => r,
        Err(e) => return entry(ImageStatus::Error, Some(e.to_string()), None),
    };
    let out = result_path(out_dir, &id);
    match std::fs::write(&out, ResultDoc::new(&result, cfg).to_json()) {
        Ok(()) => entry(ImageStatus::Ok, None, Some(out)),
        Err(e) => entry(ImageStatus::Error, Some(format!("writing {}: {e}", out.display())), None),
    }
}

/// Scores every image on a pool of `jobs` workers (0 = one per logical CPU)
/// and writes one result file per image plus `manifest.json` into `out_dir`.
/// Failures are recorded per image and never stop the batch.
pub fn run_detect(
    images: &[PathBuf],
    pose_dir: Option<&Path>,
    out_dir: &Path,
    cfg: &ScoringConfig,
    config_path: Option<&Path>,
    jobs: usize,
) -> std::io::Result<RunManifest> {
    std::fs::create_dir_all(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(std::io::Error::other)?;
    let entries = Mutex::new(Vec::with_capacity(images.len()));
    pool.install(|| {
        images.par_iter().for_each(|image| {
            let entry = process(image, pose_dir, out_dir, cfg);
            if entry.status != ImageStatus::Ok {
                log::warn!("{}: {:?} {}", image.display(), entry.status, entry.message.as_deref().unwrap_or(""));
            }
            entries.lock().expect("manifest lock").push(entry);
        })
    });
    let mut entries = entries.into_inner().expect("manifest lock");
    entries.sort_by(|a, b| a.image.cmp(&b.image));
    let manifest = RunManifest {
        config_path: config_path.map(Path::to_path_buf),
        pose_dir: pose_dir.map(Path::to_path_buf),
        output_dir: out_dir.to_path_buf(),
        entries,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    std::fs::write(out_dir.join(MANIFEST_NAME), json + "\n")?;
    Ok(manifest)
}
