//! The centralized recognizer: a fixed-rate master clock that feeds the
//! touch, motion and face pipelines and steps every registered technique
//! once per tick with a fused snapshot.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::config::EngineConfig;
use crate::face::{FaceEvent, FaceState, SmoothedFace};
use crate::model::{Payload, SensorFrame, Timestamp, TouchSample, ValidationError, Validator};
use crate::motion::{DeviceAttitude, MotionError, MotionState, SwipeDetection};
use crate::technique::{Technique, TechniqueDescriptor};
use crate::touch::{FlickDetection, TouchError, TouchState};

/// Payload value of a technique event.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Num(f64),
    Str(String),
}

/// Fixed 6-decimal rendering, with negative zero folded to zero.
pub fn fmt_fixed6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Num(x) => f.write_str(&fmt_fixed6(*x)),
            Value::Str(s) => f.write_str(s),
        }
    }
}

/// Sorted key/value payload.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fields(pub BTreeMap<String, Value>);

impl Fields {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn int(mut self, k: &str, v: i64) -> Self {
        self.0.insert(k.to_string(), Value::Int(v));
        self
    }

    pub fn num(mut self, k: &str, v: f64) -> Self {
        self.0.insert(k.to_string(), Value::Num(v));
        self
    }

    pub fn str(mut self, k: &str, v: &str) -> Self {
        self.0.insert(k.to_string(), Value::Str(v.to_string()));
        self
    }

    pub fn get(&self, k: &str) -> Option<&Value> {
        self.0.get(k)
    }

    pub fn extend(&mut self, other: Fields) {
        self.0.extend(other.0);
    }
}

impl fmt::Display for Fields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// One discrete or continuous output of a technique.
#[derive(Debug, Clone, PartialEq)]
pub struct TechniqueEvent {
    pub t: Timestamp,
    pub technique: String,
    pub kind: &'static str,
    pub payload: Fields,
}

impl fmt::Display for TechniqueEvent {
    /// `<t_ms> EVT <technique> <kind> k=v ...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} EVT {} {}", self.t, self.technique, self.kind)?;
        if !self.payload.0.is_empty() {
            write!(f, " {}", self.payload)?;
        }
        Ok(())
    }
}

/// Collects the events of one technique during one step.
pub struct Emitter<'a> {
    t: Timestamp,
    descriptor: &'a TechniqueDescriptor,
    events: &'a mut Vec<TechniqueEvent>,
}

impl<'a> Emitter<'a> {
    pub fn new(t: Timestamp, descriptor: &'a TechniqueDescriptor, events: &'a mut Vec<TechniqueEvent>) -> Self {
        Self { t, descriptor, events }
    }

    /// Records an event. `kind` must be in the technique's declared vocabulary.
    pub fn emit(&mut self, kind: &'static str, payload: Fields) {
        debug_assert!(
            self.descriptor.events.contains(&kind),
            "{} emitted undeclared event {kind}",
            self.descriptor.id
        );
        self.events.push(TechniqueEvent {
            t: self.t,
            technique: self.descriptor.id.clone(),
            kind,
            payload,
        });
    }
}

/// Detections produced during the current tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recent {
    pub flick: Option<FlickDetection>,
    pub swipe: Option<SwipeDetection>,
    pub face_event: Option<FaceEvent>,
    /// Raw touch samples applied during this tick, in order.
    pub touches: Vec<(Timestamp, TouchSample)>,
}

/// Read-only view of every channel at one tick.
pub struct FusedSnapshot<'a> {
    pub t: Timestamp,
    pub config: &'a EngineConfig,
    pub face: &'a FaceState,
    pub attitude: DeviceAttitude,
    pub touch: &'a TouchState,
    pub recent: &'a Recent,
    /// The swipe detector is tracking an unresolved pulse.
    pub swipe_in_progress: bool,
}

impl FusedSnapshot<'_> {
    /// Smoothed face, if present and fresh enough for continuous control.
    pub fn face(&self) -> Option<&SmoothedFace> {
        if self.face.is_available(&self.config.face) {
            self.face.smoothed()
        } else {
            None
        }
    }

    pub fn scale_level(&self) -> Option<u8> {
        self.face().and(self.face.scale_level())
    }

    /// Maps an image-space lateral sign (+ = image right / clockwise) to a
    /// user-space one (+ = the user's right).
    pub fn user_lateral(&self, image_sign: f64) -> f64 {
        if self.config.mirror_camera {
            image_sign
        } else {
            -image_sign
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("technique `{0}` is already registered")]
    DuplicateIdentifier(String),
    #[error("tick at t={got} precedes previous tick t={prev}")]
    ClockWentBackwards { prev: Timestamp, got: Timestamp },
}

/// Non-fatal problem with one frame; the frame is dropped.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Diagnostic {
    #[error("t={0}: invalid frame: {1}")]
    Invalid(Timestamp, ValidationError),
    #[error("t={0}: frame later than tick t={1}")]
    FutureFrame(Timestamp, Timestamp),
    #[error("t={0}: touch: {1}")]
    Touch(Timestamp, TouchError),
    #[error("t={0}: motion: {1}")]
    Motion(Timestamp, MotionError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickOutput {
    pub t: Timestamp,
    pub events: Vec<TechniqueEvent>,
    pub diagnostics: Vec<Diagnostic>,
}

struct Slot {
    descriptor: TechniqueDescriptor,
    technique: Box<dyn Technique>,
}

/// One session's recognizer.
pub struct Engine {
    config: EngineConfig,
    validator: Validator,
    face: FaceState,
    motion: MotionState,
    touch: TouchState,
    recent: Recent,
    swipe_in_progress: bool,
    now: Option<Timestamp>,
    slots: Vec<Slot>,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Self {
            validator: Validator::new(config.screen, config.camera),
            face: FaceState::new(),
            motion: MotionState::new(config.motion.clone()),
            touch: TouchState::new(config.touch.clone()),
            recent: Recent::default(),
            swipe_in_progress: false,
            now: None,
            slots: Vec::new(),
            config,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn register(&mut self, technique: Box<dyn Technique>) -> Result<(), EngineError> {
        let descriptor = technique.descriptor();
        if self.slots.iter().any(|s| s.descriptor.id == descriptor.id) {
            return Err(EngineError::DuplicateIdentifier(descriptor.id));
        }
        self.slots.push(Slot { descriptor, technique });
        Ok(())
    }

    /// Descriptors in registration order.
    pub fn registry(&self) -> impl Iterator<Item = &TechniqueDescriptor> {
        self.slots.iter().map(|s| &s.descriptor)
    }

    /// Status fields of every technique, for live state reporting.
    pub fn status(&self) -> Fields {
        let mut f = Fields::new();
        for s in &self.slots {
            f.extend(s.technique.status());
        }
        f
    }

    pub fn now(&self) -> Option<Timestamp> {
        self.now
    }

    /// Snapshot as of the last tick.
    pub fn snapshot(&self) -> FusedSnapshot<'_> {
        FusedSnapshot {
            t: self.now.unwrap_or_default(),
            config: &self.config,
            face: &self.face,
            attitude: *self.motion.attitude(),
            touch: &self.touch,
            recent: &self.recent,
            swipe_in_progress: self.swipe_in_progress,
        }
    }

    /// Advances the clock to `t`, applying `frames` (all at or before `t`,
    /// in time order) and stepping every technique once.
    pub fn tick(&mut self, t: Timestamp, frames: &[SensorFrame]) -> Result<TickOutput, EngineError> {
        if let Some(prev) = self.now {
            if t < prev {
                return Err(EngineError::ClockWentBackwards { prev, got: t });
            }
        }
        let mut out = TickOutput {
            t,
            ..TickOutput::default()
        };
        self.recent = Recent::default();
        for frame in frames {
            if frame.t > t {
                out.diagnostics.push(Diagnostic::FutureFrame(frame.t, t));
                continue;
            }
            if let Err(e) = self.validator.validate(*frame) {
                out.diagnostics.push(Diagnostic::Invalid(frame.t, e));
                continue;
            }
            self.apply(frame, &mut out.diagnostics);
        }
        self.face.advance(t);
        self.swipe_in_progress = self.motion.swipe_in_progress();
        self.now = Some(t);

        let snap = FusedSnapshot {
            t,
            config: &self.config,
            face: &self.face,
            attitude: *self.motion.attitude(),
            touch: &self.touch,
            recent: &self.recent,
            swipe_in_progress: self.swipe_in_progress,
        };
        for slot in &mut self.slots {
            let mut emitter = Emitter::new(t, &slot.descriptor, &mut out.events);
            slot.technique.step(&snap, &mut emitter);
        }
        Ok(out)
    }

    fn apply(&mut self, frame: &SensorFrame, diags: &mut Vec<Diagnostic>) {
        match &frame.payload {
            Payload::Touch(s) => {
                self.recent.touches.push((frame.t, *s));
                match self.touch.ingest(s, frame.t) {
                    Ok(Some(f)) => self.recent.flick = Some(f),
                    Ok(None) => {}
                    Err(e) => diags.push(Diagnostic::Touch(frame.t, e)),
                }
            }
            Payload::Imu(s) => match self.motion.update(s, frame.t) {
                Ok(Some(sw)) => self.recent.swipe = Some(sw),
                Ok(None) => {}
                Err(e) => diags.push(Diagnostic::Motion(frame.t, e)),
            },
            Payload::Face(obs) => {
                if let Some(ev) = self.face.ingest(obs, frame.t, &self.config.face) {
                    self.recent.face_event = Some(ev);
                }
            }
        }
    }
}

/// Drives an [`Engine`] from a time-ordered frame stream at the master
/// clock rate. Batch replay and live streaming both go through this, so
/// they tick identically.
pub struct Session {
    engine: Engine,
    validator: Validator,
    next_tick: u64,
    pending: Vec<SensorFrame>,
}

impl Session {
    pub fn new(engine: Engine) -> Self {
        let validator = Validator::new(engine.config.screen, engine.config.camera);
        Self {
            engine,
            validator,
            next_tick: 0,
            pending: Vec::new(),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Accepts the next frame. Every tick strictly before the frame's
    /// timestamp is run and reported to `on_tick`.
    pub fn push<F>(&mut self, frame: SensorFrame, on_tick: &mut F) -> Result<(), ValidationError>
    where
        F: FnMut(&Engine, &TickOutput),
    {
        let frame = self.validator.validate(frame)?;
        while self.engine.config.tick_time(self.next_tick) < frame.t.0 {
            self.run_tick(on_tick);
        }
        self.pending.push(frame);
        Ok(())
    }

    /// Runs ticks until every pending frame has been consumed.
    pub fn finish<F>(&mut self, on_tick: &mut F)
    where
        F: FnMut(&Engine, &TickOutput),
    {
        while !self.pending.is_empty() {
            self.run_tick(on_tick);
        }
    }

    fn run_tick<F>(&mut self, on_tick: &mut F)
    where
        F: FnMut(&Engine, &TickOutput),
    {
        let t = self.engine.config.tick_time(self.next_tick);
        self.next_tick += 1;
        let split = self.pending.partition_point(|f| f.t.0 <= t);
        let due: Vec<SensorFrame> = self.pending.drain(..split).collect();
        let out = self
            .engine
            .tick(Timestamp(t), &due)
            .expect("session ticks are monotonic");
        on_tick(&self.engine, &out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FaceDetection, Point, Vec3};
    use crate::technique::{Modality, TechniqueDescriptor, Usage};

    type Seen = std::sync::Arc<std::sync::Mutex<Vec<(u64, Option<FaceEvent>)>>>;

    /// Records every snapshot time and face event it sees.
    struct Probe {
        id: String,
        seen: Seen,
    }

    impl Technique for Probe {
        fn descriptor(&self) -> TechniqueDescriptor {
            TechniqueDescriptor {
                id: self.id.clone(),
                face: Usage::NONE,
                motion: Usage::NONE,
                touch: Usage::NONE,
                events: &["SEEN"],
            }
        }

        fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>) {
            self.seen.lock().unwrap().push((snap.t.0, snap.recent.face_event));
            out.emit("SEEN", Fields::new().int("t", snap.t.0 as i64));
        }
    }

    fn probe(id: &str) -> (Box<Probe>, Seen) {
        let seen = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
        (
            Box::new(Probe {
                id: id.to_string(),
                seen: seen.clone(),
            }),
            seen,
        )
    }

    #[test]
    fn duplicate_registration_is_rejected() {
        let mut e = Engine::new(EngineConfig::default());
        e.register(probe("a").0).unwrap();
        assert_eq!(
            e.register(probe("a").0),
            Err(EngineError::DuplicateIdentifier("a".into()))
        );
    }

    #[test]
    fn empty_tick_advances_staleness() {
        let mut e = Engine::new(EngineConfig::default());
        let face = SensorFrame::face(0, FaceDetection::new(Point::new(240.0, 320.0), 100.0, 0.0));
        let mut f2 = face;
        f2.t = Timestamp(50);
        e.tick(Timestamp(50), &[face, f2]).unwrap();
        assert_eq!(e.snapshot().face.staleness_ms(), 0);
        let out = e.tick(Timestamp(300), &[]).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(e.snapshot().face.staleness_ms(), 250);
        assert!(e.snapshot().face().is_none());
    }

    #[test]
    fn face_entering_surfaces_in_recent() {
        let mut e = Engine::new(EngineConfig::default());
        let (p, seen) = probe("p");
        e.register(p).unwrap();
        let d = FaceDetection::new(Point::new(240.0, 320.0), 100.0, 0.0);
        e.tick(Timestamp(0), &[SensorFrame::face(0, d)]).unwrap();
        e.tick(Timestamp(63), &[SensorFrame::face(63, d)]).unwrap();
        let seen = seen.lock().unwrap();
        assert_eq!(seen[0], (0, None));
        assert_eq!(seen[1], (63, Some(FaceEvent::Entering)));
    }

    #[test]
    fn events_follow_registration_order() {
        let mut e = Engine::new(EngineConfig::default());
        e.register(probe("z").0).unwrap();
        e.register(probe("a").0).unwrap();
        let out = e.tick(Timestamp(0), &[]).unwrap();
        let ids: Vec<&str> = out.events.iter().map(|e| e.technique.as_str()).collect();
        assert_eq!(ids, vec!["z", "a"]);
        assert_eq!(out.events[0].to_string(), "0 EVT z SEEN t=0");
    }

    #[test]
    fn bad_frames_become_diagnostics() {
        let mut e = Engine::new(EngineConfig::default());
        let ok = SensorFrame::imu(0, Vec3::new(0.0, -1.0, 0.0), Vec3::default());
        let bad = SensorFrame::touch(5, 0, crate::model::TouchPhase::Moved, 10.0, 10.0);
        let late = SensorFrame::imu(40, Vec3::new(0.0, -1.0, 0.0), Vec3::default());
        let out = e.tick(Timestamp(17), &[ok, bad, late]).unwrap();
        assert_eq!(out.diagnostics.len(), 2);
        assert!(matches!(out.diagnostics[0], Diagnostic::Invalid(..)));
        assert!(matches!(out.diagnostics[1], Diagnostic::FutureFrame(..)));
        assert!(e.tick(Timestamp(10), &[]).is_err());
    }

    #[test]
    fn session_ticks_cover_every_frame_monotonically() {
        let mut e = Engine::new(EngineConfig::default());
        let (p, seen) = probe("p");
        e.register(p).unwrap();
        let mut s = Session::new(e);
        let mut ticks = Vec::new();
        let mut cb = |_: &Engine, o: &TickOutput| ticks.push(o.t.0);
        for t in [0u64, 5, 40, 41, 100] {
            s.push(SensorFrame::face_missed(t), &mut cb).unwrap();
        }
        s.finish(&mut cb);
        assert_eq!(ticks, vec![0, 17, 33, 50, 67, 83, 100]);
        let seen = seen.lock().unwrap();
        assert!(seen.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn session_with_no_frames_runs_no_ticks() {
        let mut s = Session::new(Engine::new(EngineConfig::default()));
        let mut n = 0;
        s.finish(&mut |_: &Engine, _: &TickOutput| n += 1);
        assert_eq!(n, 0);
    }

    #[test]
    fn descriptor_usage_helpers() {
        let u = Usage::BOTH;
        assert!(u.discrete && u.continuous);
        assert_eq!(Modality::ALL.len(), 3);
    }
}
