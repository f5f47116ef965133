//! Face observation processing: presence debounce, smoothing, face events,
//! the scale/distance law and scale-level quantization.

use thiserror::Error;

use crate::config::FaceConfig;
use crate::model::{FaceObservation, Point, Timestamp};

/// Number of discrete face-scale levels. Level 0 is the closest face.
pub const SCALE_LEVELS: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presence {
    Absent,
    Present,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceEvent {
    Entering,
    Moving,
    Exiting,
}

impl FaceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            FaceEvent::Entering => "ENTERING",
            FaceEvent::Moving => "MOVING",
            FaceEvent::Exiting => "EXITING",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedFace {
    pub center: Point,
    pub scale: f64,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FaceError {
    #[error("face scales must be positive (got {reference} and {current})")]
    NonPositiveScale { reference: f64, current: f64 },
}

/// Ratio of the current viewing distance to the reference one.
///
/// Face scale times distance is constant for a given user and camera, so
/// `d_current / d_reference = scale_reference / scale_current`.
pub fn distance_ratio(reference_scale: f64, current_scale: f64) -> Result<f64, FaceError> {
    if !(reference_scale > 0.0 && current_scale > 0.0) {
        return Err(FaceError::NonPositiveScale {
            reference: reference_scale,
            current: current_scale,
        });
    }
    Ok(reference_scale / current_scale)
}

/// Maps a face scale onto one of six equal-width bins over `[min, max]`.
///
/// Level 0 holds the largest scales (closest face), level 5 the smallest.
/// With a previous level, the output only moves once the scale leaves the
/// previous bin by more than `hysteresis_frac` of a bin width.
pub fn quantize_scale(scale: f64, range: (f64, f64), prev: Option<u8>, hysteresis_frac: f64) -> u8 {
    let (lo, hi) = range;
    debug_assert!(lo < hi);
    let width = (hi - lo) / SCALE_LEVELS as f64;
    let s = scale.clamp(lo, hi);
    let raw = (((hi - s) / width).floor() as i64).clamp(0, SCALE_LEVELS as i64 - 1) as u8;
    match prev {
        Some(p) if p != raw && p < SCALE_LEVELS => {
            let margin = hysteresis_frac * width;
            let bin_hi = hi - p as f64 * width;
            let bin_lo = bin_hi - width;
            if s >= bin_lo - margin && s <= bin_hi + margin {
                p
            } else {
                raw
            }
        }
        _ => raw,
    }
}

/// Debounced, smoothed face state for one session.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceState {
    presence: Presence,
    last_event: Option<FaceEvent>,
    smoothing: Option<SmoothedFace>,
    last_detection: Option<Timestamp>,
    staleness_ms: u64,
    scale_level: Option<u8>,
    reference_scale: Option<f64>,
    hits: u32,
    misses: u32,
    move_anchor: Option<Point>,
}

impl Default for FaceState {
    fn default() -> Self {
        Self::new()
    }
}

impl FaceState {
    pub fn new() -> Self {
        Self {
            presence: Presence::Absent,
            last_event: None,
            smoothing: None,
            last_detection: None,
            staleness_ms: 0,
            scale_level: None,
            reference_scale: None,
            hits: 0,
            misses: 0,
            move_anchor: None,
        }
    }

    pub fn presence(&self) -> Presence {
        self.presence
    }

    pub fn is_present(&self) -> bool {
        self.presence == Presence::Present
    }

    pub fn last_event(&self) -> Option<FaceEvent> {
        self.last_event
    }

    /// Smoothed parameters; only defined while the face is present.
    pub fn smoothed(&self) -> Option<&SmoothedFace> {
        if self.is_present() {
            self.smoothing.as_ref()
        } else {
            None
        }
    }

    pub fn staleness_ms(&self) -> u64 {
        self.staleness_ms
    }

    pub fn scale_level(&self) -> Option<u8> {
        if self.is_present() {
            self.scale_level
        } else {
            None
        }
    }

    /// Smoothed scale captured when the face entered.
    pub fn reference_scale(&self) -> Option<f64> {
        self.reference_scale
    }

    /// Present and recently observed: safe for continuous control.
    pub fn is_available(&self, cfg: &FaceConfig) -> bool {
        self.is_present() && self.staleness_ms <= cfg.stale_ms
    }

    /// Updates staleness for the current clock time.
    pub fn advance(&mut self, now: Timestamp) {
        if let Some(last) = self.last_detection {
            self.staleness_ms = now.since(last);
        }
    }

    /// Feeds one camera observation.
    pub fn ingest(&mut self, obs: &FaceObservation, t: Timestamp, cfg: &FaceConfig) -> Option<FaceEvent> {
        let event = match obs.detection() {
            Some(d) => {
                self.hits = self.hits.saturating_add(1);
                self.misses = 0;
                self.last_detection = Some(t);
                self.staleness_ms = 0;
                let a = cfg.smoothing_alpha;
                let s = match self.smoothing {
                    None => SmoothedFace {
                        center: d.center,
                        scale: d.scale,
                        angle: d.angle,
                    },
                    Some(prev) => SmoothedFace {
                        center: prev.center.lerp(d.center, a),
                        scale: prev.scale + a * (d.scale - prev.scale),
                        angle: prev.angle + a * (d.angle - prev.angle),
                    },
                };
                self.smoothing = Some(s);
                self.scale_level = Some(quantize_scale(
                    s.scale,
                    (cfg.scale_min, cfg.scale_max),
                    self.scale_level,
                    cfg.hysteresis_frac,
                ));
                match self.presence {
                    Presence::Absent if self.hits >= cfg.n_enter => {
                        self.presence = Presence::Present;
                        self.reference_scale = Some(s.scale);
                        self.move_anchor = Some(s.center);
                        Some(FaceEvent::Entering)
                    }
                    Presence::Absent => None,
                    Presence::Present => {
                        let anchor = self.move_anchor.unwrap_or(s.center);
                        if anchor.distance(s.center) > cfg.move_epsilon_px {
                            self.move_anchor = Some(s.center);
                            Some(FaceEvent::Moving)
                        } else {
                            None
                        }
                    }
                }
            }
            None => {
                self.hits = 0;
                self.misses = self.misses.saturating_add(1);
                if let Some(last) = self.last_detection {
                    self.staleness_ms = t.since(last);
                }
                match self.presence {
                    Presence::Present if self.misses >= cfg.n_exit => {
                        self.presence = Presence::Absent;
                        self.clear_tracking();
                        Some(FaceEvent::Exiting)
                    }
                    Presence::Present => None,
                    Presence::Absent => {
                        // A partial entry run is discarded.
                        self.clear_tracking();
                        None
                    }
                }
            }
        };
        if event.is_some() {
            self.last_event = event;
        }
        event
    }

    fn clear_tracking(&mut self) {
        self.smoothing = None;
        self.scale_level = None;
        self.reference_scale = None;
        self.move_anchor = None;
    }
}
