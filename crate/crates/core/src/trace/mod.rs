//! Trace serialization, replay and synthetic scenario generation.

pub mod format;
pub mod noise;
pub mod replay;
pub mod scenario;

pub use format::{parse_line, render_frame, Line, ParseError, Trace, TraceError};
pub use replay::{event_log, replay, replay_text, replay_with, session_config, Replay, ReplayError};
pub use scenario::{generate, random_trace, ScenarioError, ScenarioParams, SCENARIOS};
