//! Main-character detection for photographs.
//!
//! Each person found by a 25-keypoint pose estimator gets a square facial
//! rectangle built from the head keypoints. Three salience cues are measured on
//! that rectangle (size, closeness to the image centre, sharpness of focus),
//! combined with a gaze/confidence gate, renormalized per image and thresholded
//! into main and side characters.
//!
//! The [`eval`] module scores predictions against multi-annotator ground truth
//! and renders precision/recall/F1 and agreement tables.
//!
//! ```no_run
//! use mcs::{classify_image, parse_pose_file, ScoringConfig};
//!
//! let image = image::open("photo.jpg").unwrap();
//! let pose = parse_pose_file(&std::fs::read("photo.keypoints.json").unwrap(), "photo").unwrap();
//! let result = classify_image(&image, &pose, &ScoringConfig::default()).unwrap();
//! for person in result.persons.iter().filter(|p| p.is_main) {
//!     println!("main character: person {}", person.person_index);
//! }
//! ```

pub mod batch;
pub mod canny;
pub mod classifier;
pub mod config;
pub mod eval;
pub mod geometry;
pub mod gray;
pub mod output;
pub mod overlay;
pub mod pose;
pub mod scores;

pub use canny::{canny_edges, EdgeMap};
pub use classifier::{
    classify_image, finalize_importance, normalize_per_type, overall_score, select_main,
    ImageResult, PersonResult, PersonStatus, ScoringConfig,
};

pub use config::{load_config, ConfigError, ConfigOverrides};
pub use output::ResultDoc;
pub use geometry::{
    analyze_person, anomaly_filter, facial_rectangle, gaze_gate, DiscardReason, FaceRect,
    GateReason, GeometryVerdict,
};
pub use gray::{crop_rect, to_grayscale, GrayImage, ImageError};
pub use pose::{head_confidence, head_keypoints, parse_pose_file, Keypoint, PoseError, PoseFile, Skeleton};
pub use scores::{area_score, position_score, sharpness_score, RawScores, Sharpness};
