//! Built-in synthetic scenarios, one per demonstrated interaction.

use thiserror::Error;

use crate::model::{Point, TouchPhase};
use crate::sim::{NoiseLevels, Pose, Script, VirtualFace};

use super::format::Trace;
use super::noise::{Gaussian, NOISE_ALGORITHM};

pub const SCENARIOS: &[&str] = &[
    "face_approach",
    "lean_left",
    "lean_right",
    "tilt_to_3d",
    "phone_swipe",
    "hold_and_swipe",
    "flick_and_swipe",
    "normal_flick",
    "menu_dwell",
    "zoom_in",
    "zoom_out",
    "rotate_device",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("unknown scenario parameter `{0}`")]
    UnknownParam(String),
    #[error("invalid value `{value}` for scenario parameter `{key}`")]
    InvalidParam { key: String, value: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub seed: u64,
    pub noise: NoiseLevels,
    /// Scenario-specific magnitude; `None` uses the scenario default.
    pub amplitude: Option<f64>,
    /// Whether a face is in view.
    pub face: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            seed: 0,
            noise: NoiseLevels::default(),
            amplitude: None,
            face: true,
        }
    }
}

impl ScenarioParams {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ScenarioError> {
        let bad = || ScenarioError::InvalidParam {
            key: key.to_string(),
            value: value.to_string(),
        };
        let nonneg = |v: &str| -> Result<f64, ScenarioError> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(bad)
        };
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "sigma_accel" => self.noise.accel_g = nonneg(value)?,
            "sigma_px" => self.noise.face_px = nonneg(value)?,
            "sigma_deg" => self.noise.face_deg = nonneg(value)?,
            "amplitude" => {
                self.amplitude = Some(value.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad)?)
            }
            "face" => {
                self.face = match value {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(bad()),
                }
            }
            _ => return Err(ScenarioError::UnknownParam(key.to_string())),
        }
        Ok(())
    }

    pub fn noisy(seed: u64, accel_g: f64, face_px: f64, face_deg: f64) -> Self {
        Self {
            seed,
            noise: NoiseLevels {
                accel_g,
                face_px,
                face_deg,
            },
            ..Self::default()
        }
    }
}

fn face_at(p: &ScenarioParams, face: VirtualFace) -> Option<VirtualFace> {
    p.face.then_some(face)
}

fn lean(s: &mut Script, p: &ScenarioParams, sign: f64) {
    let amp = p.amplitude.unwrap_or(20.0);
    let upright = VirtualFace::centered(100.0);
    let leaning = VirtualFace {
        x: upright.x + sign * 90.0,
        angle: sign * amp,
        ..upright
    };
    s.set_face(face_at(p, upright)).hold(500);
    s.set_face(face_at(p, leaning)).hold(1500);
    s.set_face(face_at(p, upright)).hold(2000);
}

/// Lateral pulse of `amp` g at 600..700 ms braked at 800..900 ms.
fn swipe(s: &mut Script, p: &ScenarioParams) {
    let amp = p.amplitude.unwrap_or(1.0);
    s.set_face(face_at(p, VirtualFace::centered(100.0))).hold(600);
    s.set_lateral(amp).hold(700).set_lateral(0.0).hold(800);
    s.set_lateral(-0.6 * amp).hold(900).set_lateral(0.0).hold(1600);
}

fn flick(s: &mut Script, t0: u64, t1: u64, dx: f64) {
    let a = Point::new(200.0, 600.0);
    let b = Point::new(200.0 + dx, 600.0);
    s.touch(t0, 1, TouchPhase::Began, a);
    s.drag(1, t0, t1, a, b);
    s.touch(t1, 1, TouchPhase::Ended, b);
}

fn hold_finger(s: &mut Script, from: u64, to: u64) {
    let a = Point::new(320.0, 500.0);
    s.touch(from, 0, TouchPhase::Began, a);
    s.touch(to, 0, TouchPhase::Ended, a);
}

fn zoom(s: &mut Script, p: &ScenarioParams, from: f64, to: f64) {
    s.set_face(face_at(p, VirtualFace::centered(from))).hold(500);
    s.ramp(1000, face_at(p, VirtualFace::centered(to)), None).hold(1500);
    hold_finger(s, 300, 1400);
}

/// Builds the named scenario. The same name and parameters always give the
/// same trace.
pub fn generate(name: &str, p: &ScenarioParams) -> Result<Trace, ScenarioError> {
    let mut s = Script::new(p.seed, p.noise);
    match name {
        "face_approach" => {
            let near = p.amplitude.unwrap_or(150.0);
            s.set_face(face_at(p, VirtualFace::centered(55.0))).hold(500);
            s.ramp(2500, face_at(p, VirtualFace::centered(near)), None).hold(3000);
            let a = Point::new(320.0, 900.0);
            let b = Point::new(320.0, 300.0);
            s.touch(300, 0, TouchPhase::Began, a);
            s.drag(0, 300, 2800, a, b);
            s.touch(2800, 0, TouchPhase::Ended, b);
        }
        "lean_left" => lean(&mut s, p, -1.0),
        "lean_right" => lean(&mut s, p, 1.0),
        "tilt_to_3d" => {
            let target = p.amplitude.unwrap_or(40.0);
            s.set_face(face_at(p, VirtualFace::centered(100.0))).hold(300);
            s.ramp(1800, None, Some(Pose { tilt: target, roll: 0.0 })).hold(3000);
        }
        "phone_swipe" => swipe(&mut s, p),
        "hold_and_swipe" => {
            swipe(&mut s, p);
            let a = Point::new(300.0, 700.0);
            let b = Point::new(312.0, 700.0);
            s.touch(300, 0, TouchPhase::Began, a);
            s.drag(0, 300, 1200, a, b);
            s.touch(1200, 0, TouchPhase::Ended, b);
        }
        "flick_and_swipe" => {
            swipe(&mut s, p);
            flick(&mut s, 620, 760, 120.0);
        }
        "normal_flick" => {
            s.set_face(face_at(p, VirtualFace::centered(100.0))).hold(1000);
            flick(&mut s, 300, 450, p.amplitude.unwrap_or(150.0));
        }
        "menu_dwell" => {
            let roll = p.amplitude.unwrap_or(90.0);
            s.set_pose(Pose { tilt: 90.0, roll });
            s.set_face(face_at(p, VirtualFace::centered(100.0))).hold(2500);
        }
        "zoom_in" => zoom(&mut s, p, 90.0, 110.0),
        "zoom_out" => zoom(&mut s, p, 110.0, 90.0),
        "rotate_device" => {
            let roll = p.amplitude.unwrap_or(36.0);
            s.set_face(face_at(p, VirtualFace::centered(100.0))).hold(500);
            s.ramp(1500, None, Some(Pose { tilt: 90.0, roll })).hold(2500);
            hold_finger(&mut s, 300, 2400);
        }
        _ => return Err(ScenarioError::UnknownScenario(name.to_string())),
    }
    let mut notes = vec![format!("scenario {name} seed {}", p.seed)];
    if !p.noise.is_zero() {
        notes.push(format!(
            "noise {NOISE_ALGORITHM} sigma_accel {} sigma_px {} sigma_deg {}",
            p.noise.accel_g, p.noise.face_px, p.noise.face_deg
        ));
    }
    Ok(Trace {
        notes,
        frames: s.finish(),
        ..Trace::default()
    })
}

/// Pseudo-random session of `segments` pieces, each 100 to 600 ms long:
/// face changes, device tilts and rolls, lateral pulses, taps, drags and
/// holds. Always valid; the same seed always gives the same trace.
pub fn random_trace(seed: u64, segments: usize) -> Trace {
    let mut rng = Gaussian::new(seed);
    let mut s = Script::noiseless();
    let mut face = Some(VirtualFace::centered(100.0));
    s.set_face(face);
    for _ in 0..segments {
        let t0 = s.now();
        let t1 = t0 + 100 + (rng.uniform() * 500.0) as u64;
        let pick = rng.uniform();
        if pick < 0.3 {
            face = (rng.uniform() < 0.85).then(|| VirtualFace {
                x: rng.range(100.0, 380.0),
                y: rng.range(200.0, 440.0),
                scale: rng.range(45.0, 155.0),
                angle: rng.range(-40.0, 40.0),
            });
            if rng.uniform() < 0.5 {
                s.set_face(face).hold(t1);
            } else {
                s.ramp(t1, face, None);
            }
        } else if pick < 0.5 {
            let pose = Pose {
                tilt: rng.range(20.0, 100.0),
                roll: rng.range(-60.0, 60.0),
            };
            s.ramp(t1, None, Some(pose));
        } else if pick < 0.6 {
            let g = rng.range(-1.2, 1.2);
            let mid = t0 + (t1 - t0) / 2;
            s.set_lateral(g).hold(mid).set_lateral(0.0).hold(t1);
        } else {
            let a = Point::new(rng.range(20.0, 620.0), rng.range(20.0, 1100.0));
            let b = Point::new(rng.range(20.0, 620.0), rng.range(20.0, 1100.0));
            let down = t0 + 1;
            let up = t1 - 1 - (rng.uniform() * 50.0) as u64;
            s.touch(down, 0, TouchPhase::Began, a);
            if rng.uniform() < 0.7 {
                s.drag(0, down, up, a, b);
                s.touch(up, 0, TouchPhase::Ended, b);
            } else {
                s.touch(up, 0, TouchPhase::Ended, a);
            }
            s.hold(t1);
        }
    }
    Trace {
        notes: vec![format!("random seed {seed} segments {segments}")],
        frames: s.finish(),
        ..Trace::default()
    }
}
