//! Face-distance scrolling: the scroll gain follows the face scale level.

use crate::config::{ConfigError, EngineConfig};
use crate::engine::{Emitter, Fields, FusedSnapshot};
use crate::model::Timestamp;

use super::{DragTracker, ParamReader, Technique, TechniqueDescriptor, Usage, MULTI_SCALE_SCROLL};

const MIN_EXP: i32 = -2;
const MAX_EXP: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScrollMode {
    /// Gain is a fixed function of the current level.
    Absolute,
    /// Gain changes by a factor of two per level moved while scrolling.
    Relative,
}

pub struct MultiScaleScroll {
    mode: ScrollMode,
    active_window_ms: u64,
    /// Multiplier is `2^exp`.
    exp: i32,
    active: bool,
    last_scroll_t: Option<Timestamp>,
    level: Option<u8>,
    drag: DragTracker,
}

impl MultiScaleScroll {
    pub fn from_params(_: &EngineConfig, p: &mut ParamReader) -> Result<Self, ConfigError> {
        let mode = match p.choice("mode", "relative", &["relative", "absolute"])? {
            "absolute" => ScrollMode::Absolute,
            _ => ScrollMode::Relative,
        };
        Ok(Self {
            mode,
            active_window_ms: p.u64("active_window_ms", 500, 0, 10_000)?,
            exp: 0,
            active: false,
            last_scroll_t: None,
            level: None,
            drag: DragTracker::default(),
        })
    }

    pub fn multiplier(&self) -> f64 {
        2f64.powi(self.exp)
    }

    pub fn is_active(&self) -> bool {
        self.active
    }
}

impl Technique for MultiScaleScroll {
    fn descriptor(&self) -> TechniqueDescriptor {
        TechniqueDescriptor {
            id: MULTI_SCALE_SCROLL.into(),
            face: Usage::C,
            motion: Usage::NONE,
            touch: Usage::C,
            events: &["RATE_CHANGED", "SCROLL_DELTA"],
        }
    }

    fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>) {
        let drag = self.drag.update(snap.recent);
        let input = drag.delta.y;
        self.active = self.drag.is_down()
            || drag.ended.is_some()
            || input != 0.0
            || self
                .last_scroll_t
                .is_some_and(|last| snap.t.since(last) <= self.active_window_ms);
        if input != 0.0 {
            self.last_scroll_t = Some(snap.t);
        }

        let level = snap.scale_level();
        let before = self.exp;
        match (self.mode, level) {
            (ScrollMode::Relative, Some(l)) => {
                if let (Some(prev), true) = (self.level, self.active) {
                    let delta = l as i32 - prev as i32;
                    self.exp = (self.exp + delta).clamp(MIN_EXP, MAX_EXP);
                }
            }
            (ScrollMode::Absolute, Some(l)) => {
                self.exp = (l as i32 - 2).clamp(MIN_EXP, MAX_EXP);
            }
            (_, None) => {}
        }
        self.level = level;
        if self.exp != before {
            out.emit(
                "RATE_CHANGED",
                Fields::new()
                    .num("multiplier", self.multiplier())
                    .int("level", level.map_or(-1, i64::from)),
            );
        }

        if input != 0.0 {
            out.emit(
                "SCROLL_DELTA",
                Fields::new()
                    .num("input", input)
                    .num("displacement", input * self.multiplier())
                    .num("multiplier", self.multiplier()),
            );
        }
    }

    fn status(&self) -> Fields {
        Fields::new()
            .num("scroll_mult", self.multiplier())
            .int("scroll_active", self.active as i64)
    }
}
