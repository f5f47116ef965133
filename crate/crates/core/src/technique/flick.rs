//! Expressive flicking: combines touch flicks and phone swipes into four
//! gesture classes of increasing intensity. Face presence at the start of a
//! swipe gates the three swipe classes.

use std::collections::VecDeque;

use crate::config::{ConfigError, EngineConfig};
use crate::engine::{Emitter, Fields, FusedSnapshot};
use crate::model::Timestamp;
use crate::motion::{SwipeDetection, SwipeDirection};
use crate::touch::{FlickDetection, FlickDirection};

use super::{ParamReader, Technique, TechniqueDescriptor, Usage, FLICK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlickClass {
    NormalFlick,
    PhoneSwipe,
    HoldAndSwipe,
    FlickAndSwipe,
}

impl FlickClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FlickClass::NormalFlick => "NormalFlick",
            FlickClass::PhoneSwipe => "PhoneSwipe",
            FlickClass::HoldAndSwipe => "HoldAndSwipe",
            FlickClass::FlickAndSwipe => "FlickAndSwipe",
        }
    }

    pub fn rank(self) -> u8 {
        match self {
            FlickClass::NormalFlick => 1,
            FlickClass::PhoneSwipe => 2,
            FlickClass::HoldAndSwipe => 3,
            FlickClass::FlickAndSwipe => 4,
        }
    }
}

fn same_direction(f: FlickDirection, s: SwipeDirection) -> bool {
    matches!(
        (f, s),
        (FlickDirection::Left, SwipeDirection::Left) | (FlickDirection::Right, SwipeDirection::Right)
    )
}

pub struct ExpressiveFlicking {
    min_travel_px: f64,
    pair_grace_ms: u64,
    presence: VecDeque<(Timestamp, bool)>,
    pending: Option<FlickDetection>,
    last: Option<FlickClass>,
}

const PRESENCE_HISTORY_MS: u64 = 2000;

impl ExpressiveFlicking {
    pub fn from_params(_: &EngineConfig, p: &mut ParamReader) -> Result<Self, ConfigError> {
        Ok(Self {
            min_travel_px: p.f64("min_travel_px", 40.0, 0.0, 10_000.0)?,
            pair_grace_ms: p.u64("pair_grace_ms", 100, 0, 5000)?,
            presence: VecDeque::new(),
            pending: None,
            last: None,
        })
    }

    fn face_at(&self, t: Timestamp) -> bool {
        self.presence
            .iter()
            .rev()
            .find(|(pt, _)| *pt <= t)
            .or(self.presence.front())
            .is_some_and(|(_, p)| *p)
    }

    /// Class of a swipe, taking the pending flick if it pairs with it.
    fn classify_swipe(&mut self, sw: &SwipeDetection, snap: &FusedSnapshot<'_>) -> Option<FlickClass> {
        let (w0, w1) = sw.window;
        let lo = Timestamp(w0.0.saturating_sub(self.pair_grace_ms));
        let hi = Timestamp(w1.0 + self.pair_grace_ms);
        let paired = self.pending.filter(|f| f.t >= lo && f.t <= hi);
        if paired.is_some() {
            self.pending = None;
        }
        if !self.face_at(w0) {
            return None;
        }
        if let Some(f) = paired {
            if same_direction(f.direction, sw.direction)
                && snap.touch.travel_during(f.pointer_id, w0, w1) >= self.min_travel_px
            {
                return Some(FlickClass::FlickAndSwipe);
            }
        }
        let mut tracks = snap.touch.tracks_during(w0, w1).peekable();
        if tracks.peek().is_none() {
            return Some(FlickClass::PhoneSwipe);
        }
        let tol = snap.touch.config().hold_tolerance_px;
        tracks
            .all(|tr| tr.max_deviation() <= tol)
            .then_some(FlickClass::HoldAndSwipe)
    }

    fn emit(&mut self, class: FlickClass, direction: &str, out: &mut Emitter<'_>) {
        self.last = Some(class);
        out.emit(
            "CLASS",
            Fields::new()
                .str("kind", class.as_str())
                .int("rank", class.rank() as i64)
                .str("direction", direction),
        );
    }
}

impl Technique for ExpressiveFlicking {
    fn descriptor(&self) -> TechniqueDescriptor {
        TechniqueDescriptor {
            id: FLICK.into(),
            face: Usage::D,
            motion: Usage::D,
            touch: Usage::BOTH,
            events: &["CLASS"],
        }
    }

    fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>) {
        self.presence.push_back((snap.t, snap.face.is_present()));
        while self
            .presence
            .front()
            .is_some_and(|(t, _)| snap.t.since(*t) > PRESENCE_HISTORY_MS)
        {
            self.presence.pop_front();
        }

        if let Some(f) = snap.recent.flick {
            self.pending = Some(f);
        }
        if let Some(sw) = snap.recent.swipe {
            if let Some(class) = self.classify_swipe(&sw, snap) {
                self.emit(class, sw.direction.as_str(), out);
            }
        }
        if let Some(f) = self.pending {
            if !snap.swipe_in_progress && snap.t.since(f.t) >= self.pair_grace_ms {
                self.pending = None;
                self.emit(FlickClass::NormalFlick, f.direction.as_str(), out);
            }
        }
    }

    fn status(&self) -> Fields {
        Fields::new().str("flick_last", self.last.map_or("-", FlickClass::as_str))
    }
}
