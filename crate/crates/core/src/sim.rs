//! Scripted sensor input: describe a virtual face, device pose and touches
//! over time and get back the frames a phone would have produced, IMU at
//! 60 Hz and camera at 16 Hz.

use crate::model::{Dimensions, FaceDetection, Point, SensorFrame, TouchPhase, Vec3, DEFAULT_CAMERA, DEFAULT_SCREEN};
use crate::trace::noise::Gaussian;

pub const IMU_HZ: u64 = 60;
pub const FACE_HZ: u64 = 16;

/// Timestamp of the `i`-th sample of a stream at `hz`, rounded to the ms.
pub fn sample_time(i: u64, hz: u64) -> u64 {
    (i * 1000 + hz / 2) / hz
}

/// Rounds to 6 decimals, the precision of the trace format.
pub fn q6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualFace {
    pub x: f64,
    pub y: f64,
    pub scale: f64,
    pub angle: f64,
}

impl VirtualFace {
    pub fn centered(scale: f64) -> Self {
        Self {
            x: DEFAULT_CAMERA.width as f64 / 2.0,
            y: DEFAULT_CAMERA.height as f64 / 2.0,
            scale,
            angle: 0.0,
        }
    }

    fn lerp(self, o: VirtualFace, f: f64) -> Self {
        Self {
            x: self.x + (o.x - self.x) * f,
            y: self.y + (o.y - self.y) * f,
            scale: self.scale + (o.scale - self.scale) * f,
            angle: self.angle + (o.angle - self.angle) * f,
        }
    }
}

/// Device pose: tilt from flat (0) through upright (90), roll about the
/// screen normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub tilt: f64,
    pub roll: f64,
}

impl Pose {
    pub const UPRIGHT: Pose = Pose { tilt: 90.0, roll: 0.0 };

    /// Accelerometer reading for this pose at rest.
    pub fn gravity(self) -> Vec3 {
        let (st, ct) = self.tilt.to_radians().sin_cos();
        let (sr, cr) = self.roll.to_radians().sin_cos();
        Vec3::new(-st * sr, -st * cr, -ct)
    }

    fn lerp(self, o: Pose, f: f64) -> Self {
        Self {
            tilt: self.tilt + (o.tilt - self.tilt) * f,
            roll: self.roll + (o.roll - self.roll) * f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseLevels {
    /// Per-axis accelerometer sigma, g.
    pub accel_g: f64,
    /// Face center and scale sigma, camera px.
    pub face_px: f64,
    /// Face angle sigma, degrees.
    pub face_deg: f64,
}

impl NoiseLevels {
    pub fn is_zero(&self) -> bool {
        self.accel_g == 0.0 && self.face_px == 0.0 && self.face_deg == 0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct State {
    face: Option<VirtualFace>,
    pose: Pose,
    lateral_g: f64,
}

/// Builder for a frame sequence.
pub struct Script {
    camera: Dimensions,
    screen: Dimensions,
    now: u64,
    imu_i: u64,
    face_j: u64,
    state: State,
    noise: NoiseLevels,
    rng: Option<Gaussian>,
    frames: Vec<SensorFrame>,
}

impl Script {
    pub fn new(seed: u64, noise: NoiseLevels) -> Self {
        Self {
            camera: DEFAULT_CAMERA,
            screen: DEFAULT_SCREEN,
            now: 0,
            imu_i: 0,
            face_j: 0,
            state: State {
                face: None,
                pose: Pose::UPRIGHT,
                lateral_g: 0.0,
            },
            rng: (!noise.is_zero()).then(|| Gaussian::new(seed)),
            noise,
            frames: Vec::new(),
        }
    }

    pub fn noiseless() -> Self {
        Self::new(0, NoiseLevels::default())
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn set_face(&mut self, face: Option<VirtualFace>) -> &mut Self {
        self.state.face = face;
        self
    }

    pub fn set_pose(&mut self, pose: Pose) -> &mut Self {
        self.state.pose = pose;
        self
    }

    /// Extra linear acceleration along device X, g.
    pub fn set_lateral(&mut self, g: f64) -> &mut Self {
        self.state.lateral_g = g;
        self
    }

    /// Emits frames for `[now, until)` with the current state.
    pub fn hold(&mut self, until: u64) -> &mut Self {
        let s = self.state;
        self.emit_until(until, |_| (s, 0.0));
        self
    }

    /// Linearly moves face and/or pose to the targets over `[now, until)`.
    pub fn ramp(&mut self, until: u64, face: Option<VirtualFace>, pose: Option<Pose>) -> &mut Self {
        let start = self.now;
        let from = self.state;
        let face_to = face.or(from.face);
        let pose_to = pose.unwrap_or(from.pose);
        let span = until.saturating_sub(start).max(1) as f64;
        let roll_rate = (pose_to.roll - from.pose.roll) / (span / 1000.0);
        self.emit_until(until, |t| {
            let f = (t - start) as f64 / span;
            let face = match (from.face, face_to) {
                (Some(a), Some(b)) => Some(a.lerp(b, f)),
                (_, b) => b,
            };
            (
                State {
                    face,
                    pose: from.pose.lerp(pose_to, f),
                    lateral_g: from.lateral_g,
                },
                roll_rate,
            )
        });
        self.state.face = face_to;
        self.state.pose = pose_to;
        self
    }

    pub fn touch(&mut self, t: u64, id: u32, phase: TouchPhase, p: Point) -> &mut Self {
        let x = q6(p.x.clamp(0.0, self.screen.width as f64 - 1e-6));
        let y = q6(p.y.clamp(0.0, self.screen.height as f64 - 1e-6));
        self.frames.push(SensorFrame::touch(t, id, phase, x, y));
        self
    }

    /// Moved samples on the IMU grid strictly inside `(t0, t1]`, moving
    /// linearly from `from` to `to`.
    pub fn drag(&mut self, id: u32, t0: u64, t1: u64, from: Point, to: Point) -> &mut Self {
        let mut i = t0 * IMU_HZ / 1000;
        loop {
            let t = sample_time(i, IMU_HZ);
            i += 1;
            if t <= t0 {
                continue;
            }
            if t > t1 {
                break;
            }
            let f = (t - t0) as f64 / (t1 - t0) as f64;
            self.touch(t, id, TouchPhase::Moved, from.lerp(to, f));
        }
        self
    }

    /// All frames, ordered by time then channel.
    pub fn finish(&mut self) -> Vec<SensorFrame> {
        let mut frames = std::mem::take(&mut self.frames);
        frames.sort_by_key(|f| (f.t, f.channel()));
        frames
    }

    fn emit_until(&mut self, until: u64, state_at: impl Fn(u64) -> (State, f64)) {
        loop {
            let t = sample_time(self.imu_i, IMU_HZ);
            if t >= until {
                break;
            }
            self.imu_i += 1;
            let (s, roll_rate) = state_at(t);
            let mut a = s.pose.gravity();
            a.x += s.lateral_g;
            if let Some(rng) = self.rng.as_mut() {
                let sd = self.noise.accel_g;
                a = Vec3::new(a.x + rng.sample(sd), a.y + rng.sample(sd), a.z + rng.sample(sd));
            }
            let accel = Vec3::new(q6(a.x), q6(a.y), q6(a.z));
            let gyro = Vec3::new(0.0, 0.0, q6(roll_rate));
            self.frames.push(SensorFrame::imu(t, accel, gyro));
        }
        loop {
            let t = sample_time(self.face_j, FACE_HZ);
            if t >= until {
                break;
            }
            self.face_j += 1;
            let (s, _) = state_at(t);
            let frame = match s.face {
                None => SensorFrame::face_missed(t),
                Some(mut f) => {
                    if let Some(rng) = self.rng.as_mut() {
                        f.x += rng.sample(self.noise.face_px);
                        f.y += rng.sample(self.noise.face_px);
                        f.scale += rng.sample(self.noise.face_px);
                        f.angle += rng.sample(self.noise.face_deg);
                    }
                    let w = self.camera.width as f64 - 1e-6;
                    let h = self.camera.height as f64 - 1e-6;
                    let center = Point::new(q6(f.x.clamp(0.0, w)), q6(f.y.clamp(0.0, h)));
                    let scale = q6(f.scale.max(1.0));
                    let angle = q6(f.angle.clamp(-90.0, 90.0));
                    SensorFrame::face(t, FaceDetection::new(center, scale, angle))
                }
            };
            self.frames.push(frame);
        }
        self.now = self.now.max(until);
    }
}
