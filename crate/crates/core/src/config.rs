//! Engine configuration and `key=value` overrides.
//!
//! Every tunable is addressable by a dotted key (`face.n_exit`,
//! `swipe.primary_g`, `touch_free_menu.timeout_ms`, ...). Trace headers and
//! session config files are both flattened into such keys and applied with
//! [`EngineConfig::set`], which rejects unknown keys and out-of-range values.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{Dimensions, DEFAULT_CAMERA, DEFAULT_SCREEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("unknown technique `{0}`")]
    UnknownTechnique(String),
}

impl ConfigError {
    pub fn invalid(key: &str, value: &str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceConfig {
    /// Consecutive detections needed to report a face entering.
    pub n_enter: u32,
    /// Consecutive misses needed to report a face exiting.
    pub n_exit: u32,
    /// EMA weight of the newest observation.
    pub smoothing_alpha: f64,
    pub move_epsilon_px: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    /// Level hysteresis as a fraction of one bin width.
    pub hysteresis_frac: f64,
    /// Smoothed values older than this are unavailable to continuous consumers.
    pub stale_ms: u64,
}

impl Default for FaceConfig {
    fn default() -> Self {
        Self {
            n_enter: 2,
            n_exit: 5,
            smoothing_alpha: 0.4,
            move_epsilon_px: 8.0,
            scale_min: 40.0,
            scale_max: 160.0,
            hysteresis_frac: 0.05,
            stale_ms: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwipeConfig {
    pub primary_g: f64,
    pub primary_min_ms: u64,
    pub brake_g: f64,
    /// Brake must arrive within this long of the primary pulse onset.
    pub brake_within_ms: u64,
    pub refractory_ms: u64,
    /// Samples needed before the detector arms.
    pub warmup_ms: u64,
}

impl Default for SwipeConfig {
    fn default() -> Self {
        Self {
            primary_g: 0.6,
            primary_min_ms: 50,
            brake_g: 0.4,
            brake_within_ms: 500,
            refractory_ms: 400,
            warmup_ms: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionConfig {
    /// Cutoff of the gravity low-pass used for attitude.
    pub gravity_cutoff_hz: f64,
    /// Cutoff of the baseline removed from lateral accel before swipe detection.
    pub highpass_cutoff_hz: f64,
    /// Ignore the gyro entirely.
    pub accel_only: bool,
    /// Per-sample weight of the accelerometer roll in the complementary blend.
    pub accel_roll_weight: f64,
    pub degenerate_g: f64,
    pub degenerate_ms: u64,
    pub swipe: SwipeConfig,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            gravity_cutoff_hz: 1.0,
            highpass_cutoff_hz: 0.3,
            accel_only: false,
            accel_roll_weight: 0.02,
            degenerate_g: 0.2,
            degenerate_ms: 1000,
            swipe: SwipeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouchConfig {
    pub flick_speed_px_s: f64,
    pub velocity_window_ms: u64,
    pub history_ms: u64,
    pub hold_tolerance_px: f64,
    /// How long finished strokes stay queryable for travel measurements.
    pub path_retention_ms: u64,
}

impl Default for TouchConfig {
    fn default() -> Self {
        Self {
            flick_speed_px_s: 600.0,
            velocity_window_ms: 100,
            history_ms: 150,
            hold_tolerance_px: 15.0,
            path_retention_ms: 2000,
        }
    }
}

/// Raw per-technique parameters, validated by each technique's factory.
pub type TechniqueParams = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub screen: Dimensions,
    pub camera: Dimensions,
    /// Camera frames arrive mirrored (selfie view): image-right is the
    /// user's right. Clearing this flips every face-derived lateral direction.
    pub mirror_camera: bool,
    pub clock_hz: u32,
    pub face: FaceConfig,
    pub motion: MotionConfig,
    pub touch: TouchConfig,
    /// Enabled techniques in registration order; `None` means all built-ins.
    pub techniques: Option<Vec<String>>,
    pub params: BTreeMap<String, TechniqueParams>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            screen: DEFAULT_SCREEN,
            camera: DEFAULT_CAMERA,
            mirror_camera: true,
            clock_hz: 60,
            face: FaceConfig::default(),
            motion: MotionConfig::default(),
            touch: TouchConfig::default(),
            techniques: None,
            params: BTreeMap::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError::invalid(key, value, "not a valid number/flag"))
}

fn ranged<T>(key: &str, value: &str, lo: T, hi: T) -> Result<T, ConfigError>
where
    T: FromStr + PartialOrd + Copy + std::fmt::Display,
{
    let v: T = parse(key, value)?;
    if v < lo || v > hi {
        return Err(ConfigError::invalid(
            key,
            value,
            format!("must be within [{lo}, {hi}]"),
        ));
    }
    Ok(v)
}

impl EngineConfig {
    /// Master clock period for tick `k`, in integer milliseconds.
    pub fn tick_time(&self, k: u64) -> u64 {
        let hz = self.clock_hz as u64;
        (k * 1000 + hz / 2) / hz
    }

    /// Applies one dotted override. `known_techniques` is the set of ids whose
    /// parameters may be set with `<id>.<param>`.
    pub fn set(&mut self, key: &str, value: &str, known_techniques: &[&str]) -> Result<(), ConfigError> {
        let k = key.trim();
        match k {
            "screen.width" => self.screen.width = ranged(k, value, 1, 20_000)?,
            "screen.height" => self.screen.height = ranged(k, value, 1, 20_000)?,
            "camera.width" => self.camera.width = ranged(k, value, 1, 20_000)?,
            "camera.height" => self.camera.height = ranged(k, value, 1, 20_000)?,
            "mirror_camera" => self.mirror_camera = parse(k, value)?,
            "clock_hz" => self.clock_hz = ranged(k, value, 10, 1000)?,
            "techniques" => {
                let list: Vec<String> = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                for id in &list {
                    if !known_techniques.contains(&id.as_str()) {
                        return Err(ConfigError::UnknownTechnique(id.clone()));
                    }
                }
                self.techniques = Some(list);
            }

            "face.n_enter" => self.face.n_enter = ranged(k, value, 1, 100)?,
            "face.n_exit" => self.face.n_exit = ranged(k, value, 1, 100)?,
            "face.smoothing_alpha" => self.face.smoothing_alpha = ranged(k, value, 0.01, 1.0)?,
            "face.move_epsilon_px" => self.face.move_epsilon_px = ranged(k, value, 0.0, 480.0)?,
            "face.scale_min" => self.face.scale_min = ranged(k, value, 1.0, 10_000.0)?,
            "face.scale_max" => self.face.scale_max = ranged(k, value, 1.0, 10_000.0)?,
            "face.hysteresis_frac" => self.face.hysteresis_frac = ranged(k, value, 0.0, 0.5)?,
            "face.stale_ms" => self.face.stale_ms = ranged(k, value, 1, 60_000)?,

            "motion.gravity_cutoff_hz" => {
                self.motion.gravity_cutoff_hz = ranged(k, value, 0.01, 30.0)?
            }
            "motion.highpass_cutoff_hz" => {
                self.motion.highpass_cutoff_hz = ranged(k, value, 0.01, 30.0)?
            }
            "motion.accel_only" => self.motion.accel_only = parse(k, value)?,
            "motion.accel_roll_weight" => {
                self.motion.accel_roll_weight = ranged(k, value, 0.0, 1.0)?
            }
            "motion.degenerate_g" => self.motion.degenerate_g = ranged(k, value, 0.0, 1.0)?,
            "motion.degenerate_ms" => self.motion.degenerate_ms = ranged(k, value, 0, 60_000)?,

            "swipe.primary_g" => self.motion.swipe.primary_g = ranged(k, value, 0.05, 20.0)?,
            "swipe.primary_min_ms" => self.motion.swipe.primary_min_ms = ranged(k, value, 0, 1000)?,
            "swipe.brake_g" => self.motion.swipe.brake_g = ranged(k, value, 0.05, 20.0)?,
            "swipe.brake_within_ms" => {
                self.motion.swipe.brake_within_ms = ranged(k, value, 1, 700)?
            }
            "swipe.refractory_ms" => self.motion.swipe.refractory_ms = ranged(k, value, 0, 10_000)?,
            "swipe.warmup_ms" => self.motion.swipe.warmup_ms = ranged(k, value, 0, 10_000)?,

            "touch.flick_speed_px_s" => {
                self.touch.flick_speed_px_s = ranged(k, value, 1.0, 100_000.0)?
            }
            "touch.velocity_window_ms" => {
                self.touch.velocity_window_ms = ranged(k, value, 10, 1000)?
            }
            "touch.history_ms" => self.touch.history_ms = ranged(k, value, 10, 10_000)?,
            "touch.hold_tolerance_px" => {
                self.touch.hold_tolerance_px = ranged(k, value, 0.0, 1000.0)?
            }
            "touch.path_retention_ms" => {
                self.touch.path_retention_ms = ranged(k, value, 100, 600_000)?
            }

            _ => {
                let (id, param) = k
                    .split_once('.')
                    .ok_or_else(|| ConfigError::UnknownKey(k.to_string()))?;
                if !known_techniques.contains(&id) || param.is_empty() {
                    return Err(ConfigError::UnknownKey(k.to_string()));
                }
                self.params
                    .entry(id.to_string())
                    .or_default()
                    .insert(param.to_string(), value.trim().to_string());
            }
        }
        if self.face.scale_min >= self.face.scale_max {
            return Err(ConfigError::invalid(k, value, "face.scale_min must be below face.scale_max"));
        }
        if self.touch.velocity_window_ms > self.touch.history_ms {
            return Err(ConfigError::invalid(
                k,
                value,
                "touch.velocity_window_ms must not exceed touch.history_ms",
            ));
        }
        Ok(())
    }
}
