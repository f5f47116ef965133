//! Coarse cursor placement by tap, fine stepping by leaning the head.

use crate::config::{ConfigError, EngineConfig};
use crate::engine::{Emitter, Fields, FusedSnapshot};
use crate::model::{Point, Timestamp};
use crate::motion::wrap_deg;

use super::{side_label, DragTracker, ParamReader, Technique, TechniqueDescriptor, Usage, TEXT_EDIT};

/// Character grid used to hit-test taps against the abstract document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharGrid {
    pub char_width: f64,
    pub line_height: f64,
    pub columns: u64,
}

impl CharGrid {
    /// Character offset nearest to a screen point, clamped to `len`.
    pub fn hit(&self, p: Point, len: u64) -> u64 {
        let line = (p.y / self.line_height).floor().max(0.0) as u64;
        let col = ((p.x / self.char_width).round().max(0.0) as u64).min(self.columns);
        (line * self.columns + col).min(len)
    }
}

pub struct TextEdit {
    len: u64,
    cursor: u64,
    grid: CharGrid,
    threshold_deg: f64,
    step_ms: u64,
    tap_ms: u64,
    tap_px: f64,
    /// +1 right, -1 left.
    moving: Option<i8>,
    last_step_t: Timestamp,
    drag: DragTracker,
    press: Option<(Timestamp, Point)>,
}

impl TextEdit {
    pub fn from_params(cfg: &EngineConfig, p: &mut ParamReader) -> Result<Self, ConfigError> {
        let len = p.u64("length", 100, 0, 1 << 32)?;
        let char_width = p.f64("char_width", 20.0, 1.0, 1000.0)?;
        let line_height = p.f64("line_height", 40.0, 1.0, 1000.0)?;
        Ok(Self {
            cursor: p.u64("cursor", 50, 0, 1 << 32)?.min(len),
            len,
            grid: CharGrid {
                char_width,
                line_height,
                columns: (cfg.screen.width as f64 / char_width).floor().max(1.0) as u64,
            },
            threshold_deg: p.f64("threshold_deg", 15.0, 0.0, 90.0)?,
            step_ms: p.u64("step_ms", 200, 1, 60_000)?,
            tap_ms: p.u64("tap_ms", 300, 0, 10_000)?,
            tap_px: p.f64("tap_px", 10.0, 0.0, 1000.0)?,
            moving: None,
            last_step_t: Timestamp(0),
            drag: DragTracker::default(),
            press: None,
        })
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    fn step_cursor(&mut self, dir: i8, out: &mut Emitter<'_>) {
        let next = if dir > 0 {
            (self.cursor + 1).min(self.len)
        } else {
            self.cursor.saturating_sub(1)
        };
        if next != self.cursor {
            self.cursor = next;
            out.emit(
                "CURSOR_MOVED",
                Fields::new()
                    .int("index", next as i64)
                    .str("direction", side_label(dir as f64)),
            );
        }
    }
}

impl Technique for TextEdit {
    fn descriptor(&self) -> TechniqueDescriptor {
        TechniqueDescriptor {
            id: TEXT_EDIT.into(),
            face: Usage::D,
            motion: Usage::NONE,
            touch: Usage::BOTH,
            events: &["CURSOR_SET", "CURSOR_MOVED"],
        }
    }

    fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>) {
        let drag = self.drag.update(snap.recent);
        if let Some(b) = drag.began {
            self.press = Some(b);
        }
        let press = if drag.ended.is_some() { self.press.take() } else { None };
        if let (Some((t1, p1)), Some((t0, p0))) = (drag.ended, press) {
            if t1.since(t0) <= self.tap_ms && p0.distance(p1) <= self.tap_px {
                let idx = self.grid.hit(p0, self.len);
                self.cursor = idx;
                out.emit("CURSOR_SET", Fields::new().int("index", idx as i64));
            }
        }

        let dir = snap.face().and_then(|f| {
            let theta = wrap_deg(f.angle - snap.attitude.roll_deg);
            (theta.abs() > self.threshold_deg).then(|| snap.user_lateral(theta.signum()) as i8)
        });
        match dir {
            None => self.moving = None,
            Some(d) if self.moving != Some(d) => {
                self.moving = Some(d);
                self.last_step_t = snap.t;
                self.step_cursor(d, out);
            }
            Some(d) => {
                while snap.t.since(self.last_step_t) >= self.step_ms {
                    self.last_step_t = Timestamp(self.last_step_t.0 + self.step_ms);
                    self.step_cursor(d, out);
                }
            }
        }
    }

    fn status(&self) -> Fields {
        Fields::new().int("cursor", self.cursor as i64)
    }
}
