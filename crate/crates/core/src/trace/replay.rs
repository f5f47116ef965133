//! Deterministic offline replay of a trace through the engine.

use std::fmt::Write as _;

use thiserror::Error;

use crate::config::{ConfigError, EngineConfig};
use crate::engine::{Diagnostic, Engine, Session, TechniqueEvent, TickOutput};
use crate::model::ValidationError;
use crate::technique::TechniqueRegistry;

use super::format::{Trace, TraceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("validation: {0}")]
    Validation(#[from] ValidationError),
}

/// Engine config for a trace: defaults, then the trace's dimensions and
/// overrides, then `extra` overrides in order.
pub fn session_config(
    trace: &Trace,
    registry: &TechniqueRegistry,
    extra: &[(String, String)],
) -> Result<EngineConfig, ConfigError> {
    let mut cfg = EngineConfig {
        screen: trace.screen,
        camera: trace.camera,
        ..EngineConfig::default()
    };
    let ids = registry.ids();
    for (k, v) in trace.overrides.iter().chain(extra) {
        cfg.set(k, v, &ids)?;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Replay {
    pub events: Vec<TechniqueEvent>,
    pub diagnostics: Vec<Diagnostic>,
    pub ticks: u64,
}

impl Replay {
    pub fn log(&self) -> String {
        event_log(&self.events)
    }
}

/// One line per event, each newline-terminated.
pub fn event_log(events: &[TechniqueEvent]) -> String {
    let mut s = String::new();
    for e in events {
        let _ = writeln!(s, "{e}");
    }
    s
}

/// Replays `trace`, calling `on_tick` after every tick.
pub fn replay_with<F>(
    trace: &Trace,
    registry: &TechniqueRegistry,
    extra: &[(String, String)],
    mut on_tick: F,
) -> Result<Replay, ReplayError>
where
    F: FnMut(&Engine, &TickOutput),
{
    let cfg = session_config(trace, registry, extra)?;
    let mut session = Session::new(registry.build_engine(&cfg)?);
    let mut out = Replay::default();
    let mut cb = |e: &Engine, t: &TickOutput| {
        out.ticks += 1;
        out.events.extend(t.events.iter().cloned());
        out.diagnostics.extend(t.diagnostics.iter().cloned());
        on_tick(e, t);
    };
    for f in &trace.frames {
        session.push(*f, &mut cb)?;
    }
    session.finish(&mut cb);
    Ok(out)
}

pub fn replay(trace: &Trace, registry: &TechniqueRegistry, extra: &[(String, String)]) -> Result<Replay, ReplayError> {
    replay_with(trace, registry, extra, |_, _| {})
}

/// Parses `text` and returns the event log.
pub fn replay_text(text: &str, registry: &TechniqueRegistry, extra: &[(String, String)]) -> Result<String, ReplayError> {
    let trace = Trace::parse(text)?;
    Ok(replay(&trace, registry, extra)?.log())
}
