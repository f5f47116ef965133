//! Face-engaged interaction techniques.
//!
//! Each technique is a state machine behind the [`Technique`] trait. The
//! [`TechniqueRegistry`] maps technique ids to factories so a session can
//! pick its techniques by name at runtime.

use std::fmt;

use crate::config::{ConfigError, EngineConfig, TechniqueParams};
use crate::engine::{Emitter, Engine, EngineError, Fields, FusedSnapshot, Recent};
use crate::model::{Point, Timestamp, TouchPhase};

pub mod flick;
pub mod map_viewer;
pub mod menu;
pub mod navigator;
pub mod scroll;
pub mod text_edit;

pub use flick::ExpressiveFlicking;
pub use map_viewer::MapViewer;
pub use menu::TouchFreeMenu;
pub use navigator::OneHandNavigator;
pub use scroll::MultiScaleScroll;
pub use text_edit::TextEdit;

/// How a technique uses one input modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Usage {
    pub discrete: bool,
    pub continuous: bool,
}

impl Usage {
    pub const NONE: Usage = Usage { discrete: false, continuous: false };
    pub const D: Usage = Usage { discrete: true, continuous: false };
    pub const C: Usage = Usage { discrete: false, continuous: true };
    pub const BOTH: Usage = Usage { discrete: true, continuous: true };
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.discrete, self.continuous) {
            (false, false) => "-",
            (true, false) => "D",
            (false, true) => "C",
            (true, true) => "D+C",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Face,
    Motion,
    Touch,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Face, Modality::Motion, Modality::Touch];
}

#[derive(Debug, Clone, PartialEq)]
pub struct TechniqueDescriptor {
    pub id: String,
    pub face: Usage,
    pub motion: Usage,
    pub touch: Usage,
    /// Event kinds this technique may emit.
    pub events: &'static [&'static str],
}

impl TechniqueDescriptor {
    pub fn usage(&self, m: Modality) -> Usage {
        match m {
            Modality::Face => self.face,
            Modality::Motion => self.motion,
            Modality::Touch => self.touch,
        }
    }
}

pub trait Technique: Send {
    fn descriptor(&self) -> TechniqueDescriptor;

    /// Called exactly once per engine tick.
    fn step(&mut self, snap: &FusedSnapshot<'_>, out: &mut Emitter<'_>);

    /// Live state for status reporting.
    fn status(&self) -> Fields {
        Fields::new()
    }
}

pub const MULTI_SCALE_SCROLL: &str = "multi_scale_scroll";
pub const TEXT_EDIT: &str = "text_edit";
pub const MAP_VIEWER: &str = "map_viewer";
pub const TOUCH_FREE_MENU: &str = "touch_free_menu";
pub const FLICK: &str = "flick";
pub const ONE_HAND_NAVIGATOR: &str = "one_hand_navigator";

/// Reads a technique's parameters, rejecting unknown keys on `finish`.
pub struct ParamReader {
    id: String,
    raw: TechniqueParams,
}

impl ParamReader {
    pub fn new(id: &str, raw: Option<&TechniqueParams>) -> Self {
        Self {
            id: id.to_string(),
            raw: raw.cloned().unwrap_or_default(),
        }
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.id)
    }

    pub fn f64(&mut self, k: &str, default: f64, lo: f64, hi: f64) -> Result<f64, ConfigError> {
        match self.raw.remove(k) {
            None => Ok(default),
            Some(v) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| ConfigError::invalid(&self.key(k), &v, "not a number"))?;
                if !(lo..=hi).contains(&x) {
                    return Err(ConfigError::invalid(&self.key(k), &v, format!("must be within [{lo}, {hi}]")));
                }
                Ok(x)
            }
        }
    }

    pub fn u64(&mut self, k: &str, default: u64, lo: u64, hi: u64) -> Result<u64, ConfigError> {
        match self.raw.remove(k) {
            None => Ok(default),
            Some(v) => {
                let x: u64 = v
                    .parse()
                    .map_err(|_| ConfigError::invalid(&self.key(k), &v, "not an integer"))?;
                if !(lo..=hi).contains(&x) {
                    return Err(ConfigError::invalid(&self.key(k), &v, format!("must be within [{lo}, {hi}]")));
                }
                Ok(x)
            }
        }
    }

    pub fn choice(&mut self, k: &str, default: &'static str, options: &[&'static str]) -> Result<&'static str, ConfigError> {
        match self.raw.remove(k) {
            None => Ok(default),
            Some(v) => options
                .iter()
                .copied()
                .find(|o| o.eq_ignore_ascii_case(&v))
                .ok_or_else(|| ConfigError::invalid(&self.key(k), &v, format!("expected one of {options:?}"))),
        }
    }

    pub fn finish(self) -> Result<(), ConfigError> {
        match self.raw.keys().next() {
            None => Ok(()),
            Some(k) => Err(ConfigError::UnknownKey(format!("{}.{k}", self.id))),
        }
    }
}

pub type Factory = fn(&EngineConfig, &mut ParamReader) -> Result<Box<dyn Technique>, ConfigError>;

/// Name-to-factory table of available techniques.
#[derive(Clone)]
pub struct TechniqueRegistry {
    entries: Vec<(String, Factory)>,
}

impl TechniqueRegistry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// The six built-in techniques in canonical order.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        let builtins: [(&str, Factory); 6] = [
            (MULTI_SCALE_SCROLL, |c, p| Ok(Box::new(MultiScaleScroll::from_params(c, p)?))),
            (TEXT_EDIT, |c, p| Ok(Box::new(TextEdit::from_params(c, p)?))),
            (MAP_VIEWER, |c, p| Ok(Box::new(MapViewer::from_params(c, p)?))),
            (TOUCH_FREE_MENU, |c, p| Ok(Box::new(TouchFreeMenu::from_params(c, p)?))),
            (FLICK, |c, p| Ok(Box::new(ExpressiveFlicking::from_params(c, p)?))),
            (ONE_HAND_NAVIGATOR, |c, p| Ok(Box::new(OneHandNavigator::from_params(c, p)?))),
        ];
        for (id, f) in builtins {
            r.register(id, f).expect("built-in ids are unique");
        }
        r
    }

    pub fn register(&mut self, id: &str, factory: Factory) -> Result<(), EngineError> {
        if self.entries.iter().any(|(n, _)| n == id) {
            return Err(EngineError::DuplicateIdentifier(id.to_string()));
        }
        self.entries.push((id.to_string(), factory));
        Ok(())
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn create(&self, id: &str, config: &EngineConfig) -> Result<Box<dyn Technique>, ConfigError> {
        let (_, factory) = self
            .entries
            .iter()
            .find(|(n, _)| n == id)
            .ok_or_else(|| ConfigError::UnknownTechnique(id.to_string()))?;
        let mut params = ParamReader::new(id, config.params.get(id));
        let t = factory(config, &mut params)?;
        params.finish()?;
        Ok(t)
    }

    /// Builds an engine with the configured techniques registered in order.
    /// Parameters of disabled techniques are still validated.
    pub fn build_engine(&self, config: &EngineConfig) -> Result<Engine, ConfigError> {
        let enabled: Vec<String> = match &config.techniques {
            Some(list) => list.clone(),
            None => self.ids().into_iter().map(String::from).collect(),
        };
        for id in config.params.keys() {
            self.create(id, config)?;
        }
        let mut engine = Engine::new(config.clone());
        for id in &enabled {
            let t = self.create(id, config)?;
            engine
                .register(t)
                .map_err(|_| ConfigError::invalid("techniques", id, "listed twice"))?;
        }
        Ok(engine)
    }
}

impl Default for TechniqueRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// What the primary pointer did during one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct DragStep {
    pub began: Option<(Timestamp, Point)>,
    pub delta: Point,
    pub ended: Option<(Timestamp, Point)>,
}

/// Follows the first pointer to go down until it lifts, ignoring others.
#[derive(Debug, Clone, Default)]
pub(crate) struct DragTracker {
    id: Option<u32>,
    last: Point,
}

impl DragTracker {
    pub fn is_down(&self) -> bool {
        self.id.is_some()
    }

    pub fn update(&mut self, recent: &Recent) -> DragStep {
        let mut step = DragStep::default();
        for (t, s) in &recent.touches {
            match s.phase {
                TouchPhase::Began if self.id.is_none() => {
                    self.id = Some(s.pointer_id);
                    self.last = s.position;
                    step.began = Some((*t, s.position));
                }
                TouchPhase::Moved | TouchPhase::Ended | TouchPhase::Cancelled if self.id == Some(s.pointer_id) => {
                    step.delta.x += s.position.x - self.last.x;
                    step.delta.y += s.position.y - self.last.y;
                    self.last = s.position;
                    if s.phase.is_terminal() {
                        self.id = None;
                        step.ended = Some((*t, s.position));
                    }
                }
                _ => {}
            }
        }
        step
    }
}

/// "LEFT"/"RIGHT"/"CENTER" for a user-space lateral sign.
pub(crate) fn side_label(user_sign: f64) -> &'static str {
    if user_sign > 0.0 {
        "RIGHT"
    } else if user_sign < 0.0 {
        "LEFT"
    } else {
        "CENTER"
    }
}

/// Sector index (0..n) for an angle with hysteresis around sector edges.
///
/// Sector `i` is centered on `i * 360/n`. The previous sector is kept while
/// the angle stays within half a sector plus `hysteresis` of its center.
pub fn sector_with_hysteresis(angle_deg: f64, n: u32, prev: Option<u32>, hysteresis: f64) -> u32 {
    let width = 360.0 / n as f64;
    let a = angle_deg.rem_euclid(360.0);
    let raw = ((a / width).round() as u32) % n;
    match prev {
        Some(p) if p != raw => {
            let center = p as f64 * width;
            let d = crate::motion::wrap_deg(a - center).abs();
            if d <= width / 2.0 + hysteresis {
                p
            } else {
                raw
            }
        }
        _ => raw,
    }
}

/// Nearest whole number of `step`-degree steps, holding the previous count
/// while within half a step plus `hysteresis` of it.
pub(crate) fn steps_with_hysteresis(angle_deg: f64, step: f64, prev: i64, hysteresis: f64) -> i64 {
    let raw = (angle_deg / step).round() as i64;
    if raw != prev && (angle_deg - prev as f64 * step).abs() <= step / 2.0 + hysteresis {
        prev
    } else {
        raw
    }
}


#[cfg(test)]
pub(crate) mod testutil {
    use crate::config::EngineConfig;
    use crate::engine::{Session, TechniqueEvent};
    use crate::model::SensorFrame;

    use super::TechniqueRegistry;

    /// Runs `frames` through an engine with only technique `id` enabled.
    pub fn run_only(id: &str, overrides: &[(&str, &str)], frames: &[SensorFrame]) -> Vec<TechniqueEvent> {
        let registry = TechniqueRegistry::builtin();
        let mut cfg = EngineConfig::default();
        for (k, v) in overrides {
            cfg.set(k, v, &registry.ids()).unwrap();
        }
        cfg.techniques = Some(vec![id.to_string()]);
        let mut session = Session::new(registry.build_engine(&cfg).unwrap());
        let mut events = Vec::new();
        let mut cb = |_: &crate::engine::Engine, o: &crate::engine::TickOutput| events.extend(o.events.iter().cloned());
        for f in frames {
            session.push(*f, &mut cb).unwrap();
        }
        session.finish(&mut cb);
        events
    }

    pub fn kinds<'a>(events: &'a [TechniqueEvent], kind: &str) -> Vec<&'a TechniqueEvent> {
        events.iter().filter(|e| e.kind == kind).collect()
    }
}
