//! Map view: tilting the device into the 45 degree band toggles 2D/3D, and
//! in 3D a head lean glimpses sideways.

use crate::config::{ConfigError, EngineConfig};
use crate::engine::{Emitter, Fields, FusedSnapshot};

use super::{side_label, ParamReader, Technique, TechniqueDescriptor, Usage, MAP_VIEWER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewMode {
    TwoD,
    ThreeD,
}

impl ViewMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViewMode::TwoD => "2D",
            ViewMode::ThreeD => "3D",
        }
    }
}

/// Glimpse magnitude for a face angle magnitude: 0, 45, 90 or 135.
pub fn glimpse_level(angle_abs: f64, steps: [f64; 3]) -> f64 {
    if angle_abs >= steps[2] {
        135.0
    } else if angle_abs >= steps[1] {
        90.0
    } else if angle_abs >= steps[0] {
        45.0
    } else {
        0.0
    }
}

pub struct MapViewer {
    band: (f64, f64),
    rearm_margin: f64,
    min_offset_px: f64,
    steps: [f64; 3],
    mode: ViewMode,
    armed: bool,
    glimpse: f64,
}

impl MapViewer {
    pub fn from_params(_: &EngineConfig, p: &mut ParamReader) -> Result<Self, ConfigError> {
        let lo = p.f64("band_lo", 35.0, 0.0, 180.0)?;
        let hi = p.f64("band_hi", 55.0, lo, 180.0)?;
        let s0 = p.f64("glimpse_deg_1", 10.0, 0.0, 90.0)?;
        let s1 = p.f64("glimpse_deg_2", 20.0, s0, 90.0)?;
        let s2 = p.f64("glimpse_deg_3", 30.0, s1, 90.0)?;
        Ok(Self {
            band: (lo, hi),
            rearm_margin: p.f64("rearm_margin", 5.0, 0.0, 90.0)?,
            min_offset_px: p.f64("min_offset_px", 80.0, 0.0, 10_000.0)?,
            steps: [s0, s1, s2],
            mode: ViewMode::TwoD,
            armed: true,
            glimpse: 0.0,
        })
    }

    pub fn mode(&self) -> ViewMode {
        self.mode
    }

    pub fn glimpse(&self) -> f64 {
        self.glimpse
    }

    fn target_glimpse(&self, snap: &FusedSnapshot<'_>) -> f64 {
        if self.mode != ViewMode::ThreeD {
            return 0.0;
        }
        let Some(face) = snap.face() else {
            return 0.0;
        };
        let offset = face.center.x - snap.config.camera.width as f64 / 2.0;
        if offset.abs() < self.min_offset_px || offset.signum() != face.angle.signum() {
            return 0.0;
        }
        face.angle.signum() * glimpse_level(face.angle.abs(), self.steps)
    }
}

impl Technique for MapViewer {
    fn descriptor(&self) -> TechniqueDescriptor {
        TechniqueDescriptor {
            id: MAP_VIEWER.into(),
            face: Usage::C,
            motion: Usage::D,
            touch: Usage::NONE,
            events: &["VIEW_MODE", "GLIMPSE"],
        }
    }

    fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>) {
        if snap.attitude.reliable {
            let tilt = snap.attitude.tilt_deg;
            let (lo, hi) = self.band;
            if self.armed && (lo..=hi).contains(&tilt) {
                self.armed = false;
                self.mode = match self.mode {
                    ViewMode::TwoD => ViewMode::ThreeD,
                    ViewMode::ThreeD => ViewMode::TwoD,
                };
                out.emit("VIEW_MODE", Fields::new().str("mode", self.mode.as_str()));
            } else if !self.armed && (tilt < lo - self.rearm_margin || tilt > hi + self.rearm_margin) {
                self.armed = true;
            }
        }

        let g = self.target_glimpse(snap);
        if g != self.glimpse {
            self.glimpse = g;
            out.emit(
                "GLIMPSE",
                Fields::new()
                    .num("angle", g)
                    .str("side", side_label(snap.user_lateral(g.signum()))),
            );
        }
    }

    fn status(&self) -> Fields {
        Fields::new()
            .str("view_mode", self.mode.as_str())
            .num("glimpse", self.glimpse)
    }
}
