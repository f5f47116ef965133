//! Device attitude from the IMU and phone-swipe detection.

use thiserror::Error;

use crate::config::{MotionConfig, SwipeConfig};
use crate::model::{ImuSample, Timestamp, Vec3};

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let mut r = a % 360.0;
    if r <= -180.0 {
        r += 360.0;
    } else if r > 180.0 {
        r -= 360.0;
    }
    r
}

/// Device orientation relative to gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceAttitude {
    /// Unit vector of measured gravity in device coordinates.
    pub gravity: Vec3,
    /// Screen plane vs ground: 0 flat face-up, 90 upright, 180 face-down.
    pub tilt_deg: f64,
    /// Rotation about the screen normal, 0 portrait-upright, in (-180, 180].
    /// Positive when the right edge of the device is raised.
    pub roll_deg: f64,
    pub reliable: bool,
}

impl Default for DeviceAttitude {
    fn default() -> Self {
        Self::from_gravity(Vec3::new(0.0, -1.0, 0.0))
    }
}

impl DeviceAttitude {
    /// Attitude for a (not necessarily unit) gravity reading.
    pub fn from_gravity(g: Vec3) -> Self {
        let n = g.norm();
        let g = g.scale(1.0 / n);
        Self {
            gravity: g,
            tilt_deg: tilt_of(g),
            roll_deg: accel_roll(g).unwrap_or(0.0),
            reliable: true,
        }
    }
}

fn tilt_of(g: Vec3) -> f64 {
    (-g.z).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Roll implied by gravity alone; undefined when the screen is near flat.
fn accel_roll(g: Vec3) -> Option<f64> {
    if g.x.hypot(g.y) < 0.1 {
        return None;
    }
    Some(wrap_deg((-g.x).atan2(-g.y).to_degrees()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwipeDirection {
    Left,
    Right,
}

impl SwipeDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            SwipeDirection::Left => "LEFT",
            SwipeDirection::Right => "RIGHT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwipeDetection {
    pub direction: SwipeDirection,
    pub peak_accel_g: f64,
    /// Primary pulse onset to brake.
    pub window: (Timestamp, Timestamp),
}

/// One high-passed lateral acceleration sample, in g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralSample {
    pub t: Timestamp,
    pub accel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SwipePhase {
    Idle,
    Primary { sign: f64, start: Timestamp, peak: f64 },
    AwaitBrake { sign: f64, start: Timestamp, peak: f64 },
}

/// Streaming accelerate-then-brake detector.
///
/// A swipe is a pulse of at least `primary_g` lasting `primary_min_ms`,
/// followed by an opposite pulse of at least `brake_g` within
/// `brake_within_ms` of the pulse onset. After a detection the detector
/// ignores input for `refractory_ms`.
#[derive(Debug, Clone)]
pub struct SwipeDetector {
    cfg: SwipeConfig,
    phase: SwipePhase,
    first: Option<Timestamp>,
    refractory_until: Option<Timestamp>,
}

impl SwipeDetector {
    pub fn new(cfg: SwipeConfig) -> Self {
        Self {
            cfg,
            phase: SwipePhase::Idle,
            first: None,
            refractory_until: None,
        }
    }

    /// No pulse is currently being tracked.
    pub fn is_idle(&self) -> bool {
        self.phase == SwipePhase::Idle
    }

    pub fn push(&mut self, s: LateralSample) -> Option<SwipeDetection> {
        let first = *self.first.get_or_insert(s.t);
        if let Some(until) = self.refractory_until {
            if s.t < until {
                self.phase = SwipePhase::Idle;
                return None;
            }
            self.refractory_until = None;
        }
        if s.t.since(first) < self.cfg.warmup_ms {
            return None;
        }
        let cfg = &self.cfg;
        // A sample may end one phase and be re-examined by the next.
        loop {
            match self.phase {
                SwipePhase::Idle => {
                    if s.accel.abs() >= cfg.primary_g {
                        self.phase = SwipePhase::Primary {
                            sign: s.accel.signum(),
                            start: s.t,
                            peak: s.accel.abs(),
                        };
                    }
                    return None;
                }
                SwipePhase::Primary { sign, start, peak } => {
                    if s.t.since(start) > cfg.brake_within_ms {
                        self.phase = SwipePhase::Idle;
                        continue;
                    }
                    if sign * s.accel >= cfg.primary_g {
                        self.phase = SwipePhase::Primary {
                            sign,
                            start,
                            peak: peak.max(s.accel.abs()),
                        };
                        return None;
                    }
                    // Pulse ended; its extent runs up to this sample.
                    if s.t.since(start) >= cfg.primary_min_ms {
                        self.phase = SwipePhase::AwaitBrake { sign, start, peak };
                    } else {
                        self.phase = SwipePhase::Idle;
                    }
                    continue;
                }
                SwipePhase::AwaitBrake { sign, start, peak } => {
                    if s.t.since(start) > cfg.brake_within_ms {
                        self.phase = SwipePhase::Idle;
                        continue;
                    }
                    if -sign * s.accel >= cfg.brake_g {
                        self.phase = SwipePhase::Idle;
                        self.refractory_until = Some(Timestamp(s.t.0 + cfg.refractory_ms));
                        let direction = if sign > 0.0 {
                            SwipeDirection::Right
                        } else {
                            SwipeDirection::Left
                        };
                        return Some(SwipeDetection {
                            direction,
                            peak_accel_g: peak,
                            window: (start, s.t),
                        });
                    }
                    return None;
                }
            }
        }
    }
}

/// Runs a fresh detector over a buffered window and returns the first swipe.
pub fn detect_phone_swipe(window: &[LateralSample], cfg: &SwipeConfig) -> Option<SwipeDetection> {
    let mut d = SwipeDetector::new(cfg.clone());
    window.iter().find_map(|s| d.push(*s))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("gravity degenerate (|accel| < {threshold_g} g) since t={since}")]
    DegenerateGravity { since: Timestamp, threshold_g: f64 },
}

/// Per-session IMU processing.
#[derive(Debug, Clone)]
pub struct MotionState {
    cfg: MotionConfig,
    gravity_lp: Option<Vec3>,
    baseline_x: f64,
    roll: f64,
    last_t: Option<Timestamp>,
    low_since: Option<Timestamp>,
    attitude: DeviceAttitude,
    lateral: Option<LateralSample>,
    detector: SwipeDetector,
}

fn lowpass_alpha(dt_ms: u64, cutoff_hz: f64) -> f64 {
    let dt = dt_ms as f64 / 1000.0;
    let rc = 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz);
    dt / (rc + dt)
}

impl MotionState {
    pub fn new(cfg: MotionConfig) -> Self {
        let detector = SwipeDetector::new(cfg.swipe.clone());
        Self {
            cfg,
            gravity_lp: None,
            baseline_x: 0.0,
            roll: 0.0,
            last_t: None,
            low_since: None,
            attitude: DeviceAttitude::default(),
            lateral: None,
            detector,
        }
    }

    pub fn attitude(&self) -> &DeviceAttitude {
        &self.attitude
    }

    /// Latest high-passed lateral acceleration.
    pub fn lateral(&self) -> Option<LateralSample> {
        self.lateral
    }

    /// A swipe pulse is being tracked but not yet resolved.
    pub fn swipe_in_progress(&self) -> bool {
        !self.detector.is_idle()
    }

    /// Feeds one IMU sample. Returns a swipe if this sample completed one.
    pub fn update(&mut self, imu: &ImuSample, t: Timestamp) -> Result<Option<SwipeDetection>, MotionError> {
        let dt = self.last_t.map(|p| t.since(p)).unwrap_or(0);
        self.last_t = Some(t);
        let a = imu.accel;
        let magnitude = a.norm();

        let mut error = None;
        if magnitude < self.cfg.degenerate_g {
            let since = *self.low_since.get_or_insert(t);
            if t.since(since) > self.cfg.degenerate_ms && self.attitude.reliable {
                self.attitude.reliable = false;
                error = Some(MotionError::DegenerateGravity {
                    since,
                    threshold_g: self.cfg.degenerate_g,
                });
            }
        } else {
            self.low_since = None;
            self.attitude.reliable = true;
            let alpha = lowpass_alpha(dt, self.cfg.gravity_cutoff_hz);
            let g = match self.gravity_lp {
                None => a,
                Some(p) => Vec3::new(
                    p.x + alpha * (a.x - p.x),
                    p.y + alpha * (a.y - p.y),
                    p.z + alpha * (a.z - p.z),
                ),
            };
            let first = self.gravity_lp.is_none();
            self.gravity_lp = Some(g);
            let unit = g.scale(1.0 / g.norm());
            let measured = accel_roll(unit);
            let dt_s = dt as f64 / 1000.0;
            self.roll = if first {
                measured.unwrap_or(0.0)
            } else if self.cfg.accel_only {
                measured.unwrap_or(self.roll)
            } else {
                let predicted = wrap_deg(self.roll + imu.gyro.z * dt_s);
                match measured {
                    Some(m) => wrap_deg(predicted + self.cfg.accel_roll_weight * wrap_deg(m - predicted)),
                    None => predicted,
                }
            };
            self.attitude = DeviceAttitude {
                gravity: unit,
                tilt_deg: tilt_of(unit),
                roll_deg: self.roll,
                reliable: true,
            };
        }

        // Lateral high-pass for the swipe detector.
        if self.lateral.is_none() {
            self.baseline_x = a.x;
        } else {
            self.baseline_x += lowpass_alpha(dt, self.cfg.highpass_cutoff_hz) * (a.x - self.baseline_x);
        }
        let sample = LateralSample {
            t,
            accel: a.x - self.baseline_x,
        };
        self.lateral = Some(sample);
        let swipe = self.detector.push(sample);

        match error {
            Some(e) => Err(e),
            None => Ok(swipe),
        }
    }
}
