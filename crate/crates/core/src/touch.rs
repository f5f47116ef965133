//! Per-pointer touch tracking, flick detection, hold tolerance and
//! windowed travel queries.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::config::TouchConfig;
use crate::model::{Point, Timestamp, TouchPhase, TouchSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlickDirection {
    Left,
    Right,
    Up,
    Down,
}

impl FlickDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            FlickDirection::Left => "LEFT",
            FlickDirection::Right => "RIGHT",
            FlickDirection::Up => "UP",
            FlickDirection::Down => "DOWN",
        }
    }

    /// Dominant axis of a screen-space vector (+y is down). Horizontal wins ties.
    pub fn of(v: Point) -> Self {
        if v.x.abs() >= v.y.abs() {
            if v.x >= 0.0 {
                FlickDirection::Right
            } else {
                FlickDirection::Left
            }
        } else if v.y >= 0.0 {
            FlickDirection::Down
        } else {
            FlickDirection::Up
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlickDetection {
    pub pointer_id: u32,
    pub t: Timestamp,
    pub direction: FlickDirection,
    pub speed_px_s: f64,
    /// Release velocity, px/s.
    pub velocity: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TouchError {
    #[error("pointer {0} is not down")]
    UnknownPointer(u32),
    #[error("pointer {0} is already down")]
    AlreadyDown(u32),
}

/// One finger from Began to Ended/Cancelled.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerTrack {
    pub pointer_id: u32,
    pub start: Point,
    pub start_t: Timestamp,
    pub current: Point,
    pub current_t: Timestamp,
    /// Recent samples used for release velocity.
    history: VecDeque<(Timestamp, Point)>,
    /// Timestamped positions used for travel queries.
    path: Vec<(Timestamp, Point)>,
    pub travel_px: f64,
    max_deviation: f64,
    pub is_down: bool,
}

impl PointerTrack {
    fn new(id: u32, p: Point, t: Timestamp) -> Self {
        Self {
            pointer_id: id,
            start: p,
            start_t: t,
            current: p,
            current_t: t,
            history: VecDeque::from([(t, p)]),
            path: vec![(t, p)],
            travel_px: 0.0,
            max_deviation: 0.0,
            is_down: true,
        }
    }

    /// Largest distance from the start position seen so far.
    pub fn max_deviation(&self) -> f64 {
        self.max_deviation
    }

    pub fn history(&self) -> impl Iterator<Item = &(Timestamp, Point)> {
        self.history.iter()
    }

    fn push(&mut self, p: Point, t: Timestamp, history_ms: u64) {
        self.travel_px += self.current.distance(p);
        self.max_deviation = self.max_deviation.max(self.start.distance(p));
        self.current = p;
        self.current_t = t;
        self.history.push_back((t, p));
        while let Some(&(ht, _)) = self.history.front() {
            if t.since(ht) > history_ms {
                self.history.pop_front();
            } else {
                break;
            }
        }
        self.path.push((t, p));
    }

    /// Drops path points no longer needed to answer queries from `cutoff` on.
    fn trim_path(&mut self, cutoff: Timestamp) {
        let keep_from = self.path.iter().rposition(|(t, _)| *t <= cutoff).unwrap_or(0);
        if keep_from > 0 {
            self.path.drain(..keep_from);
        }
    }

    /// Path length within `[t0, t1)`, interpolating positions linearly in time.
    pub fn travel_during(&self, t0: Timestamp, t1: Timestamp) -> f64 {
        path_length_clipped(&self.path, t0.0 as f64, t1.0 as f64)
    }

    /// Least-squares release velocity over the samples of the last `window_ms`.
    fn release_velocity(&self, window_ms: u64) -> Option<Point> {
        let end = self.current_t;
        let pts: Vec<(f64, Point)> = self
            .history
            .iter()
            .filter(|(t, _)| end.since(*t) <= window_ms)
            .map(|(t, p)| (t.0 as f64 / 1000.0, *p))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
        let mx = pts.iter().map(|(_, p)| p.x).sum::<f64>() / n;
        let my = pts.iter().map(|(_, p)| p.y).sum::<f64>() / n;
        let var: f64 = pts.iter().map(|(t, _)| (t - mt).powi(2)).sum();
        if var <= 0.0 {
            return None;
        }
        let cx: f64 = pts.iter().map(|(t, p)| (t - mt) * (p.x - mx)).sum();
        let cy: f64 = pts.iter().map(|(t, p)| (t - mt) * (p.y - my)).sum();
        Some(Point::new(cx / var, cy / var))
    }
}

fn path_length_clipped(path: &[(Timestamp, Point)], t0: f64, t1: f64) -> f64 {
    if t1 <= t0 {
        return 0.0;
    }
    let mut total = 0.0;
    for w in path.windows(2) {
        let (ta, pa) = (w[0].0 .0 as f64, w[0].1);
        let (tb, pb) = (w[1].0 .0 as f64, w[1].1);
        let len = pa.distance(pb);
        if tb <= ta {
            // Instantaneous jump: counted where it happens.
            if ta >= t0 && ta < t1 {
                total += len;
            }
            continue;
        }
        let lo = ta.max(t0);
        let hi = tb.min(t1);
        if hi > lo {
            total += len * (hi - lo) / (tb - ta);
        }
    }
    total
}

/// All pointers of one session.
#[derive(Debug, Clone)]
pub struct TouchState {
    cfg: TouchConfig,
    active: BTreeMap<u32, PointerTrack>,
    finished: Vec<PointerTrack>,
}

impl TouchState {
    pub fn new(cfg: TouchConfig) -> Self {
        Self {
            cfg,
            active: BTreeMap::new(),
            finished: Vec::new(),
        }
    }

    pub fn config(&self) -> &TouchConfig {
        &self.cfg
    }

    pub fn is_down(&self) -> bool {
        !self.active.is_empty()
    }

    pub fn pointer(&self, id: u32) -> Option<&PointerTrack> {
        self.active.get(&id)
    }

    /// Lowest-numbered pointer currently down.
    pub fn primary(&self) -> Option<&PointerTrack> {
        self.active.values().next()
    }

    pub fn active(&self) -> impl Iterator<Item = &PointerTrack> {
        self.active.values()
    }

    /// Active and recently finished tracks, oldest first.
    pub fn tracks(&self) -> impl Iterator<Item = &PointerTrack> {
        self.finished.iter().chain(self.active.values())
    }

    pub fn ingest(&mut self, s: &TouchSample, t: Timestamp) -> Result<Option<FlickDetection>, TouchError> {
        self.expire(t);
        let id = s.pointer_id;
        match s.phase {
            TouchPhase::Began => {
                if self.active.contains_key(&id) {
                    return Err(TouchError::AlreadyDown(id));
                }
                self.active.insert(id, PointerTrack::new(id, s.position, t));
                Ok(None)
            }
            TouchPhase::Moved => {
                let track = self.active.get_mut(&id).ok_or(TouchError::UnknownPointer(id))?;
                track.push(s.position, t, self.cfg.history_ms);
                Ok(None)
            }
            TouchPhase::Ended | TouchPhase::Cancelled => {
                let mut track = self.active.remove(&id).ok_or(TouchError::UnknownPointer(id))?;
                track.push(s.position, t, self.cfg.history_ms);
                track.is_down = false;
                let flick = if s.phase == TouchPhase::Ended {
                    track
                        .release_velocity(self.cfg.velocity_window_ms)
                        .and_then(|v| {
                            let speed = v.x.hypot(v.y);
                            (speed >= self.cfg.flick_speed_px_s).then(|| FlickDetection {
                                pointer_id: id,
                                t,
                                direction: FlickDirection::of(v),
                                speed_px_s: speed,
                                velocity: v,
                            })
                        })
                } else {
                    None
                };
                self.finished.push(track);
                Ok(flick)
            }
        }
    }

    fn expire(&mut self, now: Timestamp) {
        let keep = self.cfg.path_retention_ms;
        self.finished.retain(|tr| now.since(tr.current_t) <= keep);
        let cutoff = Timestamp(now.0.saturating_sub(keep));
        for tr in self.active.values_mut() {
            tr.trim_path(cutoff);
        }
    }

    /// True while the pointer has never strayed more than the hold tolerance
    /// from where it went down. Looks at finished tracks too.
    pub fn within_hold_tolerance(&self, id: u32) -> Result<bool, TouchError> {
        let track = self
            .active
            .get(&id)
            .or_else(|| self.finished.iter().rev().find(|tr| tr.pointer_id == id))
            .ok_or(TouchError::UnknownPointer(id))?;
        Ok(track.max_deviation <= self.cfg.hold_tolerance_px)
    }

    /// Path length of `id` inside `[t0, t1)`, over every retained stroke.
    pub fn travel_during(&self, id: u32, t0: Timestamp, t1: Timestamp) -> f64 {
        self.tracks()
            .filter(|tr| tr.pointer_id == id)
            .map(|tr| tr.travel_during(t0, t1))
            .sum()
    }

    /// Tracks that were down at some point inside `[t0, t1]`.
    pub fn tracks_during(&self, t0: Timestamp, t1: Timestamp) -> impl Iterator<Item = &PointerTrack> {
        self.tracks().filter(move |tr| {
            let end = if tr.is_down { Timestamp(u64::MAX) } else { tr.current_t };
            tr.start_t <= t1 && end >= t0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: u32, phase: TouchPhase, x: f64, y: f64) -> TouchSample {
        TouchSample {
            pointer_id: id,
            phase,
            position: Point::new(x, y),
        }
    }

    fn state() -> TouchState {
        TouchState::new(TouchConfig::default())
    }

    #[test]
    fn fast_release_is_a_flick() {
        let mut s = state();
        s.ingest(&sample(0, TouchPhase::Began, 100.0, 500.0), Timestamp(0)).unwrap();
        s.ingest(&sample(0, TouchPhase::Moved, 300.0, 500.0), Timestamp(100)).unwrap();
        let f = s
            .ingest(&sample(0, TouchPhase::Ended, 300.0, 500.0), Timestamp(100))
            .unwrap()
            .unwrap();
        assert_eq!(f.direction, FlickDirection::Right);
        assert!((f.speed_px_s - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn stationary_hold_is_not_a_flick() {
        let mut s = state();
        s.ingest(&sample(0, TouchPhase::Began, 100.0, 500.0), Timestamp(0)).unwrap();
        let f = s
            .ingest(&sample(0, TouchPhase::Ended, 100.0, 500.0), Timestamp(500))
            .unwrap();
        assert!(f.is_none());
    }

    #[test]
    fn slow_drift_is_not_a_flick() {
        let mut s = state();
        s.ingest(&sample(0, TouchPhase::Began, 100.0, 500.0), Timestamp(0)).unwrap();
        for i in 1..=60u64 {
            let t = i * 1000 / 60;
            let x = 100.0 + 50.0 * t as f64 / 1000.0;
            s.ingest(&sample(0, TouchPhase::Moved, x, 500.0), Timestamp(t)).unwrap();
        }
        let f = s
            .ingest(&sample(0, TouchPhase::Ended, 150.0, 500.0), Timestamp(1000))
            .unwrap();
        assert!(f.is_none());
    }

    #[test]
    fn cancelled_never_flicks() {
        let mut s = state();
        s.ingest(&sample(0, TouchPhase::Began, 100.0, 500.0), Timestamp(0)).unwrap();
        s.ingest(&sample(0, TouchPhase::Moved, 300.0, 500.0), Timestamp(50)).unwrap();
        let f = s
            .ingest(&sample(0, TouchPhase::Cancelled, 400.0, 500.0), Timestamp(100))
            .unwrap();
        assert!(f.is_none());
    }

    #[test]
    fn unknown_pointer_errors() {
        let mut s = state();
        assert_eq!(
            s.ingest(&sample(3, TouchPhase::Moved, 1.0, 1.0), Timestamp(0)),
            Err(TouchError::UnknownPointer(3))
        );
        assert_eq!(s.within_hold_tolerance(3), Err(TouchError::UnknownPointer(3)));
    }

    #[test]
    fn hold_tolerance_latches_max_deviation() {
        let mut s = state();
        s.ingest(&sample(0, TouchPhase::Began, 100.0, 500.0), Timestamp(0)).unwrap();
        assert!(s.within_hold_tolerance(0).unwrap());
        s.ingest(&sample(0, TouchPhase::Moved, 114.0, 500.0), Timestamp(10)).unwrap();
        s.ingest(&sample(0, TouchPhase::Moved, 105.0, 500.0), Timestamp(20)).unwrap();
        assert!(s.within_hold_tolerance(0).unwrap());

        s.ingest(&sample(1, TouchPhase::Began, 300.0, 500.0), Timestamp(30)).unwrap();
        s.ingest(&sample(1, TouchPhase::Moved, 316.0, 500.0), Timestamp(40)).unwrap();
        s.ingest(&sample(1, TouchPhase::Moved, 300.0, 500.0), Timestamp(50)).unwrap();
        assert!(!s.within_hold_tolerance(1).unwrap());
    }

    #[test]
    fn travel_clipping() {
        let mut s = state();
        assert_eq!(s.travel_during(0, Timestamp(0), Timestamp(100)), 0.0);
        s.ingest(&sample(0, TouchPhase::Began, 100.0, 500.0), Timestamp(100)).unwrap();
        s.ingest(&sample(0, TouchPhase::Moved, 300.0, 500.0), Timestamp(200)).unwrap();
        let full = s.travel_during(0, Timestamp(0), Timestamp(1000));
        assert!((full - 200.0).abs() < 1e-9);
        let half = s.travel_during(0, Timestamp(150), Timestamp(1000));
        assert!((half - 100.0).abs() < 1e-9);
        assert_eq!(s.travel_during(0, Timestamp(300), Timestamp(400)), 0.0);
    }

    #[test]
    fn primary_is_lowest_id() {
        let mut s = state();
        s.ingest(&sample(4, TouchPhase::Began, 10.0, 10.0), Timestamp(0)).unwrap();
        s.ingest(&sample(2, TouchPhase::Began, 20.0, 20.0), Timestamp(0)).unwrap();
        assert_eq!(s.primary().unwrap().pointer_id, 2);
    }

    #[test]
    fn finished_strokes_expire() {
        let mut s = state();
        s.ingest(&sample(0, TouchPhase::Began, 10.0, 10.0), Timestamp(0)).unwrap();
        s.ingest(&sample(0, TouchPhase::Ended, 50.0, 10.0), Timestamp(100)).unwrap();
        assert_eq!(s.tracks().count(), 1);
        s.ingest(&sample(1, TouchPhase::Began, 10.0, 10.0), Timestamp(5000)).unwrap();
        assert_eq!(s.tracks().count(), 1);
        assert_eq!(s.tracks().next().unwrap().pointer_id, 1);
    }
}
