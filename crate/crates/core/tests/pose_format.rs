//! The pose file contract, checked against hand-written files in the format
//! pose estimators emit (extra keys, integer coordinates, empty hand arrays).

use std::path::PathBuf;

use mcs::pose::{HEAD_KEYPOINTS, LEFT_EAR, NOSE, RIGHT_EAR};
use mcs::{head_confidence, head_keypoints, parse_pose_file, PoseError, PoseFile};

fn fixture(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pose").join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn parse(name: &str) -> Result<PoseFile, PoseError> {
    parse_pose_file(&fixture(name), name.trim_end_matches(".keypoints.json"))
}

#[test]
fn portrait() {
    let pose = parse("portrait.keypoints.json").unwrap();
    assert_eq!(pose.source_image_id, "portrait");
    assert_eq!(pose.people.len(), 1);
    let s = &pose.people[0];
    let nose = s.get(NOSE);
    assert_eq!((nose.x, nose.y, nose.confidence), (100.0, 50.0, 0.9));
    assert_eq!(s.get(RIGHT_EAR).x, 80.0);
    assert_eq!(s.get(LEFT_EAR).x, 120.0);
    assert!(!s.get(1).is_detected());

    let head: Vec<usize> = head_keypoints(s).iter().map(|(i, _)| *i).collect();
    assert_eq!(head, HEAD_KEYPOINTS);
    let mean = (0.7 + 0.8 + 0.9 + 0.85 + 0.75) / 5.0;
    assert!((head_confidence(s).unwrap() - mean).abs() < 1e-12);
}

#[test]
fn empty_people() {
    assert!(parse("empty.keypoints.json").unwrap().people.is_empty());
}

#[test]
fn wrong_length_names_the_person() {
    match parse("short.keypoints.json") {
        Err(PoseError::Schema { person: 0, message }) => assert!(message.contains("74"), "{message}"),
        other => panic!("{other:?}"),
    }
    match parse("second_bad.keypoints.json") {
        Err(PoseError::Schema { person: 1, message }) => assert!(message.contains("76"), "{message}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn confidence_out_of_range() {
    assert!(matches!(parse("bad_confidence.keypoints.json"), Err(PoseError::Schema { person: 0, .. })));
}

#[test]
fn malformed_document() {
    assert!(matches!(parse("truncated.keypoints.json"), Err(PoseError::Parse(_))));
    assert!(matches!(parse_pose_file(b"{\"people\": 3}", "x"), Err(PoseError::Parse(_))));
}

#[test]
fn written_files_are_75_number_arrays() {
    let pose = parse("portrait.keypoints.json").unwrap();
    let doc: serde_json::Value = serde_json::from_str(&pose.to_json()).unwrap();
    let people = doc["people"].as_array().unwrap();
    assert_eq!(people.len(), 1);
    let flat = people[0]["pose_keypoints_2d"].as_array().unwrap();
    assert_eq!(flat.len(), 75);
    assert!(flat.iter().all(serde_json::Value::is_number));

    let original: serde_json::Value = serde_json::from_slice(&fixture("portrait.keypoints.json")).unwrap();
    let numbers = |v: &serde_json::Value| -> Vec<f64> {
        v.as_array().unwrap().iter().map(|n| n.as_f64().unwrap()).collect()
    };
    assert_eq!(numbers(&people[0]["pose_keypoints_2d"]), numbers(&original["people"][0]["pose_keypoints_2d"]));
    assert_eq!(parse_pose_file(pose.to_json().as_bytes(), "portrait").unwrap(), pose);
}
