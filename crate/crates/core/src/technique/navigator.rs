//! One-handed map navigation: the thumb anchors, face distance zooms and
//! device rotation counter-rotates the content. Sliding without a locked
//! mode pans.

use crate::config::{ConfigError, EngineConfig};
use crate::engine::{Emitter, Fields, FusedSnapshot};
use crate::model::Point;
use crate::motion::wrap_deg;

use super::{steps_with_hysteresis, DragTracker, ParamReader, Technique, TechniqueDescriptor, Usage, ONE_HAND_NAVIGATOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavMode {
    Idle,
    IdleDown,
    Pan,
    Zoom,
    Rotate,
}

impl NavMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NavMode::Idle => "IDLE",
            NavMode::IdleDown => "DOWN",
            NavMode::Pan => "PAN",
            NavMode::Zoom => "ZOOM",
            NavMode::Rotate => "ROTATE",
        }
    }

    fn is_locked(self) -> bool {
        matches!(self, NavMode::Zoom | NavMode::Rotate)
    }
}

pub struct OneHandNavigator {
    zoom_base: f64,
    rotation_step: f64,
    hysteresis_deg: f64,
    mode: NavMode,
    anchor: Point,
    level_ref: Option<u8>,
    phi_ref: f64,
    zoom_steps: i64,
    rot_steps: i64,
    committed_zoom: f64,
    committed_rotation: f64,
    last_face_angle: f64,
    drag: DragTracker,
}

impl OneHandNavigator {
    pub fn from_params(_: &EngineConfig, p: &mut ParamReader) -> Result<Self, ConfigError> {
        Ok(Self {
            zoom_base: p.f64("zoom_per_level", 1.25, 1.0, 10.0)?,
            rotation_step: p.f64("rotation_step_deg", 18.0, 1.0, 180.0)?,
            hysteresis_deg: p.f64("hysteresis_deg", 5.0, 0.0, 90.0)?,
            mode: NavMode::Idle,
            anchor: Point::default(),
            level_ref: None,
            phi_ref: 0.0,
            zoom_steps: 0,
            rot_steps: 0,
            committed_zoom: 1.0,
            committed_rotation: 0.0,
            last_face_angle: 0.0,
            drag: DragTracker::default(),
        })
    }

    pub fn mode(&self) -> NavMode {
        self.mode
    }

    fn zoom_factor(&self) -> f64 {
        self.zoom_base.powi(self.zoom_steps as i32)
    }

    fn rotation(&self) -> f64 {
        let r = wrap_deg(-(self.rot_steps as f64) * self.rotation_step);
        if r == 0.0 {
            0.0
        } else {
            r
        }
    }

    fn set_mode(&mut self, mode: NavMode, out: &mut Emitter<'_>) {
        if self.mode != mode {
            self.mode = mode;
            out.emit("MODE", Fields::new().str("mode", mode.as_str()));
        }
    }

    fn anchor_fields(&self) -> Fields {
        Fields::new().num("ax", self.anchor.x).num("ay", self.anchor.y)
    }
}

impl Technique for OneHandNavigator {
    fn descriptor(&self) -> TechniqueDescriptor {
        TechniqueDescriptor {
            id: ONE_HAND_NAVIGATOR.into(),
            face: Usage::BOTH,
            motion: Usage::C,
            touch: Usage::BOTH,
            events: &["MODE", "PAN", "ANCHOR", "ZOOM", "ROTATE", "COMMIT"],
        }
    }

    fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>) {
        if let Some(f) = snap.face() {
            self.last_face_angle = f.angle;
        }
        let phi = snap.attitude.roll_deg - self.last_face_angle;
        let level = snap.scale_level();
        let drag = self.drag.update(snap.recent);

        if let Some((_, p)) = drag.began {
            self.anchor = p;
            self.level_ref = level;
            self.phi_ref = phi;
            self.zoom_steps = 0;
            self.rot_steps = 0;
            self.set_mode(NavMode::IdleDown, out);
            out.emit("ANCHOR", self.anchor_fields());
        }
        if self.mode == NavMode::Idle {
            return;
        }

        if drag.delta != Point::default() {
            if self.mode.is_locked() {
                self.anchor.x += drag.delta.x;
                self.anchor.y += drag.delta.y;
                out.emit("ANCHOR", self.anchor_fields());
            } else {
                self.set_mode(NavMode::Pan, out);
                out.emit("PAN", Fields::new().num("dx", drag.delta.x).num("dy", drag.delta.y));
            }
        }

        if self.level_ref.is_none() {
            self.level_ref = level;
        }
        let zoom_steps = match (self.level_ref, level) {
            (Some(r), Some(l)) => r as i64 - l as i64,
            _ => self.zoom_steps,
        };
        let rel = wrap_deg(phi - self.phi_ref);
        let rot_steps = steps_with_hysteresis(rel, self.rotation_step, self.rot_steps, self.hysteresis_deg);

        if !self.mode.is_locked() {
            if zoom_steps != 0 {
                self.set_mode(NavMode::Zoom, out);
            } else if rot_steps != 0 {
                self.set_mode(NavMode::Rotate, out);
            }
        }
        match self.mode {
            NavMode::Zoom if zoom_steps != self.zoom_steps => {
                self.zoom_steps = zoom_steps;
                out.emit(
                    "ZOOM",
                    self.anchor_fields()
                        .num("factor", self.zoom_factor())
                        .int("step", zoom_steps),
                );
            }
            NavMode::Rotate if rot_steps != self.rot_steps => {
                self.rot_steps = rot_steps;
                out.emit("ROTATE", self.anchor_fields().num("rotation", self.rotation()));
            }
            _ => {}
        }

        if drag.ended.is_some() {
            self.committed_zoom *= self.zoom_factor();
            self.committed_rotation = wrap_deg(self.committed_rotation + self.rotation());
            if self.committed_rotation == 0.0 {
                self.committed_rotation = 0.0;
            }
            self.zoom_steps = 0;
            self.rot_steps = 0;
            out.emit(
                "COMMIT",
                Fields::new()
                    .num("zoom", self.committed_zoom)
                    .num("rotation", self.committed_rotation),
            );
            self.set_mode(NavMode::Idle, out);
        }
    }

    fn status(&self) -> Fields {
        Fields::new()
            .str("nav_mode", self.mode.as_str())
            .num("nav_zoom", self.committed_zoom * self.zoom_factor())
            .num("nav_rotation", wrap_deg(self.committed_rotation + self.rotation()))
    }
}
