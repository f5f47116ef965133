//! Touch-free pie menu: the item aligned with the face's vertical axis is
//! highlighted, and holding it for the dwell timeout selects it.

use crate::config::{ConfigError, EngineConfig};
use crate::engine::{Emitter, Fields, FusedSnapshot};
use crate::model::Timestamp;

use super::{sector_with_hysteresis, ParamReader, Technique, TechniqueDescriptor, Usage, TOUCH_FREE_MENU};

/// Face-to-device angle in [0, 360).
pub fn relative_angle(roll_deg: f64, face_angle_deg: f64) -> f64 {
    let a = (roll_deg - face_angle_deg).rem_euclid(360.0);
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

pub struct TouchFreeMenu {
    items: u32,
    timeout_ms: u64,
    hysteresis_deg: f64,
    highlighted: Option<u32>,
    dwell_start: Timestamp,
    selected: Option<u32>,
}

impl TouchFreeMenu {
    pub fn from_params(_: &EngineConfig, p: &mut ParamReader) -> Result<Self, ConfigError> {
        Ok(Self {
            items: p.u64("items", 8, 2, 36)? as u32,
            timeout_ms: p.u64("timeout_ms", 2000, 1, 600_000)?,
            hysteresis_deg: p.f64("hysteresis_deg", 5.0, 0.0, 45.0)?,
            highlighted: None,
            dwell_start: Timestamp(0),
            selected: None,
        })
    }

    pub fn highlighted(&self) -> Option<u32> {
        self.highlighted
    }
}

impl Technique for TouchFreeMenu {
    fn descriptor(&self) -> TechniqueDescriptor {
        TechniqueDescriptor {
            id: TOUCH_FREE_MENU.into(),
            face: Usage::C,
            motion: Usage::C,
            touch: Usage::NONE,
            events: &["HIGHLIGHT", "SELECTED"],
        }
    }

    fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>) {
        let Some(face) = snap.face() else {
            self.highlighted = None;
            return;
        };
        let theta = relative_angle(snap.attitude.roll_deg, face.angle);
        let item = sector_with_hysteresis(theta, self.items, self.highlighted, self.hysteresis_deg);
        if self.highlighted != Some(item) {
            self.highlighted = Some(item);
            self.dwell_start = snap.t;
            out.emit("HIGHLIGHT", Fields::new().int("item", item as i64));
        } else if snap.t.since(self.dwell_start) >= self.timeout_ms {
            self.selected = Some(item);
            self.dwell_start = snap.t;
            out.emit("SELECTED", Fields::new().int("item", item as i64));
        }
    }

    fn status(&self) -> Fields {
        Fields::new()
            .int("menu_item", self.highlighted.map_or(-1, i64::from))
            .int("menu_selected", self.selected.map_or(-1, i64::from))
    }
}
