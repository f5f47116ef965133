//! Fusion of face tracking, device motion and touch into interaction
//! techniques, driven by a fixed-rate master clock.

pub mod config;
pub mod engine;
pub mod face;
pub mod model;
pub mod motion;
pub mod sim;
pub mod technique;
pub mod touch;
pub mod trace;

pub use config::{ConfigError, EngineConfig};
pub use engine::{Engine, FusedSnapshot, Session, TechniqueEvent, TickOutput};
pub use model::{SensorFrame, Timestamp};
pub use technique::{Technique, TechniqueDescriptor, TechniqueRegistry};
