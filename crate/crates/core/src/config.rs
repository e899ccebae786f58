//! Loading and validating [`ScoringConfig`]: defaults, then a flat TOML file,
//! then command-line overrides.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::canny::validate_thresholds;
use crate::classifier::ScoringConfig;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "MCS_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid {key}: {message}")]
    Invalid { key: &'static str, message: String },
}

/// Values given on the command line; `None` leaves the file/default value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub w_area: Option<f64>,
    pub w_sharp: Option<f64>,
    pub w_pos: Option<f64>,
    pub threshold_many: Option<f64>,
    pub threshold_two: Option<f64>,
    pub min_head_conf: Option<f64>,
    pub canny_low: Option<f64>,
    pub canny_high: Option<f64>,
    pub ear_eye_ratio: Option<f64>,
    pub canny_sigma: Option<f64>,
    pub count_gated_as_detected: Option<bool>,
}

impl ConfigOverrides {
    fn apply(&self, cfg: &mut ScoringConfig) {
        let float_fields: [(Option<f64>, &mut f64); 10] = [
            (self.w_area, &mut cfg.w_area),
            (self.w_sharp, &mut cfg.w_sharp),
            (self.w_pos, &mut cfg.w_pos),
            (self.threshold_many, &mut cfg.threshold_many),
            (self.threshold_two, &mut cfg.threshold_two),
            (self.min_head_conf, &mut cfg.min_head_conf),
            (self.canny_low, &mut cfg.canny_low),
            (self.canny_high, &mut cfg.canny_high),
            (self.ear_eye_ratio, &mut cfg.ear_eye_ratio),
            (self.canny_sigma, &mut cfg.canny_sigma),
        ];
        for (value, slot) in float_fields {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(v) = self.count_gated_as_detected {
            cfg.count_gated_as_detected = v;
        }
    }
}

fn float_slot<'a>(cfg: &'a mut ScoringConfig, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "w_area" => &mut cfg.w_area,
        "w_sharp" => &mut cfg.w_sharp,
        "w_pos" => &mut cfg.w_pos,
        "threshold_many" => &mut cfg.threshold_many,
        "threshold_two" => &mut cfg.threshold_two,
        "min_head_conf" => &mut cfg.min_head_conf,
        "canny_low" => &mut cfg.canny_low,
        "canny_high" => &mut cfg.canny_high,
        "ear_eye_ratio" => &mut cfg.ear_eye_ratio,
        "canny_sigma" => &mut cfg.canny_sigma,
        _ => return None,
    })
}

/// Applies the keys of a flat TOML document to `cfg`. Returns warnings for
/// unknown keys.
pub fn apply_toml(cfg: &mut ScoringConfig, text: &str, path: &Path) -> Result<Vec<String>, ConfigError> {
    let parse_err = |message: String| ConfigError::Parse { path: path.to_path_buf(), message };
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
    let mut warnings = Vec::new();
    for (key, value) in &table {
        if key == "count_gated_as_detected" {
            cfg.count_gated_as_detected =
                value.as_bool().ok_or_else(|| parse_err(format!("{key} must be a boolean")))?;
        } else if let Some(slot) = float_slot(cfg, key) {
            *slot = match value {
                toml::Value::Float(f) => *f,
                toml::Value::Integer(i) => *i as f64,
                _ => return Err(parse_err(format!("{key} must be a number"))),
            };
        } else {
            warnings.push(format!("{}: unknown config key `{key}` ignored", path.display()));
        }
    }
    Ok(warnings)
}

pub fn validate(cfg: &ScoringConfig) -> Result<(), ConfigError> {
    let invalid = |key, message: String| Err(ConfigError::Invalid { key, message });
    for (key, w) in [("w_area", cfg.w_area), ("w_sharp", cfg.w_sharp), ("w_pos", cfg.w_pos)] {
        if !(w.is_finite() && w >= 0.0) {
            return invalid(key, format!("weight must be finite and >= 0, got {w}"));
        }
    }
    for (key, t) in [("threshold_many", cfg.threshold_many), ("threshold_two", cfg.threshold_two)] {
        if !(t > 0.0 && t <= 1.0) {
            return invalid(key, format!("threshold must lie in (0, 1], got {t}"));
        }
    }
    if !(0.0..=1.0).contains(&cfg.min_head_conf) {
        return invalid("min_head_conf", format!("must lie in [0, 1], got {}", cfg.min_head_conf));
    }
    if let Err(e) = validate_thresholds(cfg.canny_low, cfg.canny_high) {
        return invalid("canny_low/canny_high", e.to_string());
    }
    if !(cfg.ear_eye_ratio.is_finite() && cfg.ear_eye_ratio > 0.0) {
        return invalid("ear_eye_ratio", format!("must be positive, got {}", cfg.ear_eye_ratio));
    }
    if !(cfg.canny_sigma.is_finite() && cfg.canny_sigma > 0.0) {
        return invalid("canny_sigma", format!("must be positive, got {}", cfg.canny_sigma));
    }
    Ok(())
}

/// defaults ← file ← overrides. Unknown file keys are logged and returned as
/// warnings.
pub fn load_config(path: Option<&Path>, overrides: &ConfigOverrides) -> Result<(ScoringConfig, Vec<String>), ConfigError> {
    let mut cfg = ScoringConfig::default();
    let mut warnings = Vec::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        warnings = apply_toml(&mut cfg, &text, path)?;
        for w in &warnings {
            log::warn!("{w}");
        }
    }
    overrides.apply(&mut cfg);
    validate(&cfg)?;
    Ok((cfg, warnings))
}

/// The explicit path if given, otherwise `$MCS_CONFIG` when set.
pub fn resolve_config_path(explicit: Option<PathBuf>) -> Option<PathBuf> {
    explicit.or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// Renders the config as the flat TOML document [`apply_toml`] reads.
pub fn to_toml(cfg: &ScoringConfig) -> String {
    toml::to_string(cfg).expect("config serialization")
}
