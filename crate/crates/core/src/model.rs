//! Shared domain types: sensor samples, frames, units and frame validation.
//!
//! Coordinate conventions used throughout the crate:
//!
//! * Screen: pixels, origin top-left, +x right, +y down.
//! * Camera: pixels of the front camera image, origin top-left.
//! * Device (accelerometer/gyro): +X right, +Y up (portrait), +Z out of the
//!   screen toward the user. At rest the accelerometer reads -1 g on
//!   whichever axis points up. Gyro rates are in degrees per second.
//! * Time: integer milliseconds since session start.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Milliseconds since session start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub fn ms(self) -> u64 {
        self.0
    }

    /// Milliseconds elapsed since `earlier`, saturating at zero.
    pub fn since(self, earlier: Timestamp) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimensions {
    pub width: u32,
    pub height: u32,
}

impl Dimensions {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x < self.width as f64 && p.y < self.height as f64
    }

    pub fn center(&self) -> Point {
        Point::new(self.width as f64 / 2.0, self.height as f64 / 2.0)
    }
}

/// iPhone 5 portrait screen.
pub const DEFAULT_SCREEN: Dimensions = Dimensions::new(640, 1136);
/// Front camera frame size.
pub const DEFAULT_CAMERA: Dimensions = Dimensions::new(480, 640);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, f: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * f,
            self.y + (other.y - self.y) * f,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TouchPhase {
    Began,
    Moved,
    Ended,
    Cancelled,
}

impl TouchPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            TouchPhase::Began => "BEGAN",
            TouchPhase::Moved => "MOVED",
            TouchPhase::Ended => "ENDED",
            TouchPhase::Cancelled => "CANCELLED",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, TouchPhase::Ended | TouchPhase::Cancelled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchSample {
    pub pointer_id: u32,
    pub phase: TouchPhase,
    pub position: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Acceleration in g.
    pub accel: Vec3,
    /// Angular rate in degrees per second.
    pub gyro: Vec3,
}

impl ImuSample {
    pub fn at_rest(accel: Vec3) -> Self {
        Self {
            accel,
            gyro: Vec3::default(),
        }
    }
}

/// Coarse in-plane rotation bucket reported by the face detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationClass {
    Minus45,
    Upright,
    Plus45,
}

impl RotationClass {
    pub const ALL: [RotationClass; 3] = [
        RotationClass::Minus45,
        RotationClass::Upright,
        RotationClass::Plus45,
    ];

    pub fn degrees(self) -> i32 {
        match self {
            RotationClass::Minus45 => -45,
            RotationClass::Upright => 0,
            RotationClass::Plus45 => 45,
        }
    }

    pub fn from_degrees(deg: i32) -> Option<Self> {
        match deg {
            -45 => Some(RotationClass::Minus45),
            0 => Some(RotationClass::Upright),
            45 => Some(RotationClass::Plus45),
            _ => None,
        }
    }

    /// Bucket nearest to a face angle. Ties at +/-22.5 go to the tilted bucket.
    pub fn nearest(angle_deg: f64) -> Self {
        if angle_deg >= 22.5 {
            RotationClass::Plus45
        } else if angle_deg <= -22.5 {
            RotationClass::Minus45
        } else {
            RotationClass::Upright
        }
    }
}

/// One detected face in camera-image space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceDetection {
    /// (F_x, F_y), camera px.
    pub center: Point,
    /// F_s: inter-eye distance, camera px.
    pub scale: f64,
    /// F_a: face roll in degrees, 0 upright, positive clockwise in the image.
    pub angle: f64,
    pub rotation_class: RotationClass,
}

impl FaceDetection {
    /// Detection with the rotation bucket derived from the angle.
    pub fn new(center: Point, scale: f64, angle: f64) -> Self {
        Self {
            center,
            scale,
            angle,
            rotation_class: RotationClass::nearest(angle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceObservation {
    Missed,
    Detected(FaceDetection),
}

impl FaceObservation {
    pub fn detection(&self) -> Option<&FaceDetection> {
        match self {
            FaceObservation::Missed => None,
            FaceObservation::Detected(d) => Some(d),
        }
    }
}

/// Which sensor channel a frame carries. Ordering is the tie-break order
/// for frames sharing a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Touch,
    Imu,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Touch(TouchSample),
    Imu(ImuSample),
    Face(FaceObservation),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub t: Timestamp,
    pub payload: Payload,
}

impl SensorFrame {
    pub fn touch(t: u64, pointer_id: u32, phase: TouchPhase, x: f64, y: f64) -> Self {
        Self {
            t: Timestamp(t),
            payload: Payload::Touch(TouchSample {
                pointer_id,
                phase,
                position: Point::new(x, y),
            }),
        }
    }

    pub fn imu(t: u64, accel: Vec3, gyro: Vec3) -> Self {
        Self {
            t: Timestamp(t),
            payload: Payload::Imu(ImuSample { accel, gyro }),
        }
    }

    pub fn face(t: u64, detection: FaceDetection) -> Self {
        Self {
            t: Timestamp(t),
            payload: Payload::Face(FaceObservation::Detected(detection)),
        }
    }

    pub fn face_missed(t: u64) -> Self {
        Self {
            t: Timestamp(t),
            payload: Payload::Face(FaceObservation::Missed),
        }
    }

    pub fn channel(&self) -> Channel {
        match self.payload {
            Payload::Touch(_) => Channel::Touch,
            Payload::Imu(_) => Channel::Imu,
            Payload::Face(_) => Channel::Face,
        }
    }
}

/// Per-user constant linking face scale and viewing distance:
/// `F_s * d = d_eye * d_image`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationConstants {
    /// Inter-pupil distance, mm.
    pub d_eye: f64,
    /// Camera focal length, camera px.
    pub d_image: f64,
}

impl CalibrationConstants {
    pub fn product_constant(&self) -> f64 {
        self.d_eye * self.d_image
    }

    /// Face scale (camera px) observed at distance `d` (mm).
    pub fn scale_at(&self, d: f64) -> f64 {
        self.product_constant() / d
    }

    /// Viewing distance (mm) implied by face scale `scale`.
    pub fn distance_at(&self, scale: f64) -> f64 {
        self.product_constant() / scale
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("timestamp {got} earlier than previous frame {prev}")]
    NonMonotonicTime { prev: Timestamp, got: Timestamp },
    #[error("{channel:?} frame at t={t} ordered after a later channel at the same timestamp")]
    ChannelOrder { t: Timestamp, channel: Channel },
    #[error("pointer {pointer_id}: illegal phase {phase:?}")]
    BadPhase { pointer_id: u32, phase: TouchPhase },
}

/// Nominal IMU interval bounds (30..=120 Hz).
const IMU_MIN_INTERVAL_MS: u64 = 1000 / 120;
const IMU_MAX_INTERVAL_MS: u64 = 1000 / 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateWarning {
    pub t: Timestamp,
    pub interval_ms: u64,
}

/// Stateful frame validator; tracks time order and per-pointer phase.
#[derive(Debug, Clone)]
pub struct Validator {
    screen: Dimensions,
    camera: Dimensions,
    last: Option<(Timestamp, Channel)>,
    down: BTreeMap<u32, bool>,
    last_imu: Option<Timestamp>,
    warnings: Vec<RateWarning>,
}

impl Validator {
    pub fn new(screen: Dimensions, camera: Dimensions) -> Self {
        Self {
            screen,
            camera,
            last: None,
            down: BTreeMap::new(),
            last_imu: None,
            warnings: Vec::new(),
        }
    }

    /// IMU arrival intervals outside the nominal 30-120 Hz band.
    pub fn rate_warnings(&self) -> &[RateWarning] {
        &self.warnings
    }

    /// Checks `frame` against every invariant and returns it unchanged.
    /// Rejected frames leave the validator state untouched.
    pub fn validate(&mut self, frame: SensorFrame) -> Result<SensorFrame, ValidationError> {
        let channel = frame.channel();
        if let Some((prev, prev_channel)) = self.last {
            if frame.t < prev {
                return Err(ValidationError::NonMonotonicTime { prev, got: frame.t });
            }
            if frame.t == prev && channel < prev_channel {
                return Err(ValidationError::ChannelOrder { t: frame.t, channel });
            }
        }
        match &frame.payload {
            Payload::Touch(s) => self.check_touch(s)?,
            Payload::Imu(s) => check_imu(s)?,
            Payload::Face(FaceObservation::Detected(d)) => self.check_face(d)?,
            Payload::Face(FaceObservation::Missed) => {}
        }

        // Accepted: commit state.
        if let Payload::Touch(s) = &frame.payload {
            self.down.insert(s.pointer_id, !s.phase.is_terminal());
        }
        if channel == Channel::Imu {
            if let Some(prev) = self.last_imu {
                let interval = frame.t.since(prev);
                if !(IMU_MIN_INTERVAL_MS..=IMU_MAX_INTERVAL_MS).contains(&interval) {
                    self.warnings.push(RateWarning {
                        t: frame.t,
                        interval_ms: interval,
                    });
                }
            }
            self.last_imu = Some(frame.t);
        }
        self.last = Some((frame.t, channel));
        Ok(frame)
    }

    fn check_touch(&self, s: &TouchSample) -> Result<(), ValidationError> {
        let p = s.position;
        if !(p.x.is_finite() && p.x >= 0.0 && p.x < self.screen.width as f64) {
            return Err(ValidationError::OutOfRange {
                what: "touch x",
                value: p.x,
            });
        }
        if !(p.y.is_finite() && p.y >= 0.0 && p.y < self.screen.height as f64) {
            return Err(ValidationError::OutOfRange {
                what: "touch y",
                value: p.y,
            });
        }
        let is_down = self.down.get(&s.pointer_id).copied().unwrap_or(false);
        let legal = match s.phase {
            TouchPhase::Began => !is_down,
            _ => is_down,
        };
        if legal {
            Ok(())
        } else {
            Err(ValidationError::BadPhase {
                pointer_id: s.pointer_id,
                phase: s.phase,
            })
        }
    }

    fn check_face(&self, d: &FaceDetection) -> Result<(), ValidationError> {
        let out = |what, value| Err(ValidationError::OutOfRange { what, value });
        let c = d.center;
        if !(c.x.is_finite() && c.x >= 0.0 && c.x < self.camera.width as f64) {
            return out("face x", c.x);
        }
        if !(c.y.is_finite() && c.y >= 0.0 && c.y < self.camera.height as f64) {
            return out("face y", c.y);
        }
        if !(d.scale.is_finite() && d.scale > 0.0) {
            return out("face scale", d.scale);
        }
        if !(d.angle.is_finite() && (-90.0..=90.0).contains(&d.angle)) {
            return out("face angle", d.angle);
        }
        // The detector bucket must be (one of) the nearest to the measured angle.
        let dist = |r: RotationClass| (d.angle - r.degrees() as f64).abs();
        let best = RotationClass::ALL
            .iter()
            .map(|r| dist(*r))
            .fold(f64::INFINITY, f64::min);
        if dist(d.rotation_class) > best + 1e-9 {
            return out("face rotation class", d.rotation_class.degrees() as f64);
        }
        Ok(())
    }
}

fn check_imu(s: &ImuSample) -> Result<(), ValidationError> {
    if !s.accel.is_finite() {
        return Err(ValidationError::OutOfRange {
            what: "accel",
            value: s.accel.norm(),
        });
    }
    if !s.gyro.is_finite() {
        return Err(ValidationError::OutOfRange {
            what: "gyro",
            value: s.gyro.norm(),
        });
    }
    Ok(())
}
