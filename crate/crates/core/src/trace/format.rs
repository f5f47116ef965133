//! Line-oriented trace text format.
//!
//! ```text
//! # facefuse-trace v1
//! # screen 640 1136
//! # camera 480 640
//! # set face.n_exit=6
//! # note free text kept on round-trip
//! 0 IMU 0.000000 -1.000000 0.000000 0.000000 0.000000 0.000000
//! 0 FACE DET 240.000000 320.000000 100.000000 0.000000 0
//! 17 TOUCH 0 BEGAN 320.000000 500.000000
//! 63 FACE NONE
//! ```
//!
//! IMU values are accel in g then gyro in deg/s. Floats are written with
//! six decimals; the parser accepts any decimal form. Other `#` lines are
//! comments.

use std::fmt::Write as _;
use std::str::SplitWhitespace;

use thiserror::Error;

use crate::engine::fmt_fixed6;
use crate::model::{
    Dimensions, FaceDetection, FaceObservation, Payload, Point, RotationClass, SensorFrame, Timestamp, TouchPhase,
    TouchSample, ValidationError, Validator, Vec3, DEFAULT_CAMERA, DEFAULT_SCREEN,
};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "facefuse-trace";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {source}")]
    Validation { line: usize, source: ValidationError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub screen: Dimensions,
    pub camera: Dimensions,
    /// Config overrides carried by the trace, applied in order.
    pub overrides: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub frames: Vec<SensorFrame>,
}

impl Default for Trace {
    fn default() -> Self {
        Self {
            screen: DEFAULT_SCREEN,
            camera: DEFAULT_CAMERA,
            overrides: Vec::new(),
            notes: Vec::new(),
            frames: Vec::new(),
        }
    }
}

/// One parsed line.
#[derive(Debug, Clone, PartialEq)]
pub enum Line {
    Version(u32),
    Screen(Dimensions),
    Camera(Dimensions),
    Set(String, String),
    Note(String),
    Comment,
    Blank,
    Frame(SensorFrame),
}

fn field<'a>(it: &mut SplitWhitespace<'a>, what: &str) -> Result<&'a str, String> {
    it.next().ok_or_else(|| format!("missing {what}"))
}

fn num(it: &mut SplitWhitespace<'_>, what: &str) -> Result<f64, String> {
    let s = field(it, what)?;
    let x: f64 = s.parse().map_err(|_| format!("bad {what} `{s}`"))?;
    if !x.is_finite() {
        return Err(format!("non-finite {what} `{s}`"));
    }
    Ok(x)
}

fn int<T: std::str::FromStr>(it: &mut SplitWhitespace<'_>, what: &str) -> Result<T, String> {
    let s = field(it, what)?;
    s.parse().map_err(|_| format!("bad {what} `{s}`"))
}

fn dims(it: &mut SplitWhitespace<'_>) -> Result<Dimensions, String> {
    let w: u32 = int(it, "width")?;
    let h: u32 = int(it, "height")?;
    if w == 0 || h == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok(Dimensions::new(w, h))
}

fn end(it: &mut SplitWhitespace<'_>) -> Result<(), String> {
    match it.next() {
        None => Ok(()),
        Some(extra) => Err(format!("unexpected trailing field `{extra}`")),
    }
}

fn parse_header(body: &str) -> Result<Line, String> {
    let mut it = body.split_whitespace();
    let line = match it.next() {
        Some(MAGIC) => {
            let v = field(&mut it, "version")?;
            let n: u32 = v
                .strip_prefix('v')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| format!("bad version `{v}`"))?;
            if n != FORMAT_VERSION {
                return Err(format!("unsupported trace version {n}"));
            }
            Line::Version(n)
        }
        Some("screen") => Line::Screen(dims(&mut it)?),
        Some("camera") => Line::Camera(dims(&mut it)?),
        Some("set") => {
            let kv = field(&mut it, "key=value")?;
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("expected key=value, got `{kv}`"))?;
            Line::Set(k.to_string(), v.to_string())
        }
        Some("note") => return Ok(Line::Note(body.trim_start()[4..].trim().to_string())),
        _ => return Ok(Line::Comment),
    };
    end(&mut it)?;
    Ok(line)
}

fn parse_phase(s: &str) -> Result<TouchPhase, String> {
    Ok(match s {
        "BEGAN" => TouchPhase::Began,
        "MOVED" => TouchPhase::Moved,
        "ENDED" => TouchPhase::Ended,
        "CANCELLED" => TouchPhase::Cancelled,
        _ => return Err(format!("bad touch phase `{s}`")),
    })
}

/// Parses one line without validating frame contents against a session.
pub fn parse_line(text: &str) -> Result<Line, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Line::Blank);
    }
    if let Some(body) = text.strip_prefix('#') {
        return parse_header(body);
    }
    let mut it = text.split_whitespace();
    let t: u64 = int(&mut it, "timestamp")?;
    let payload = match field(&mut it, "channel")? {
        "TOUCH" => {
            let pointer_id: u32 = int(&mut it, "pointer id")?;
            let phase = parse_phase(field(&mut it, "phase")?)?;
            let x = num(&mut it, "x")?;
            let y = num(&mut it, "y")?;
            Payload::Touch(TouchSample {
                pointer_id,
                phase,
                position: Point::new(x, y),
            })
        }
        "IMU" => {
            let mut v = [0.0; 6];
            for (i, name) in ["ax", "ay", "az", "rx", "ry", "rz"].iter().enumerate() {
                v[i] = num(&mut it, name)?;
            }
            Payload::Imu(crate::model::ImuSample {
                accel: Vec3::new(v[0], v[1], v[2]),
                gyro: Vec3::new(v[3], v[4], v[5]),
            })
        }
        "FACE" => match field(&mut it, "NONE or DET")? {
            "NONE" => Payload::Face(FaceObservation::Missed),
            "DET" => {
                let fx = num(&mut it, "fx")?;
                let fy = num(&mut it, "fy")?;
                let fs = num(&mut it, "fs")?;
                let fa = num(&mut it, "fa")?;
                let rot: i32 = int(&mut it, "rotation class")?;
                let rotation_class =
                    RotationClass::from_degrees(rot).ok_or_else(|| format!("rotation class must be -45, 0 or 45, got {rot}"))?;
                Payload::Face(FaceObservation::Detected(FaceDetection {
                    center: Point::new(fx, fy),
                    scale: fs,
                    angle: fa,
                    rotation_class,
                }))
            }
            other => return Err(format!("expected NONE or DET, got `{other}`")),
        },
        other => return Err(format!("unknown channel `{other}`")),
    };
    end(&mut it)?;
    Ok(Line::Frame(SensorFrame {
        t: Timestamp(t),
        payload,
    }))
}

pub fn render_frame(f: &SensorFrame) -> String {
    let t = f.t;
    match &f.payload {
        Payload::Touch(s) => format!(
            "{t} TOUCH {} {} {} {}",
            s.pointer_id,
            s.phase.as_str(),
            fmt_fixed6(s.position.x),
            fmt_fixed6(s.position.y)
        ),
        Payload::Imu(s) => format!(
            "{t} IMU {} {} {} {} {} {}",
            fmt_fixed6(s.accel.x),
            fmt_fixed6(s.accel.y),
            fmt_fixed6(s.accel.z),
            fmt_fixed6(s.gyro.x),
            fmt_fixed6(s.gyro.y),
            fmt_fixed6(s.gyro.z)
        ),
        Payload::Face(FaceObservation::Missed) => format!("{t} FACE NONE"),
        Payload::Face(FaceObservation::Detected(d)) => format!(
            "{t} FACE DET {} {} {} {} {}",
            fmt_fixed6(d.center.x),
            fmt_fixed6(d.center.y),
            fmt_fixed6(d.scale),
            fmt_fixed6(d.angle),
            d.rotation_class.degrees()
        ),
    }
}

impl Trace {
    /// Header lines followed by one line per frame, each newline-terminated.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {MAGIC} v{FORMAT_VERSION}");
        let _ = writeln!(out, "# screen {} {}", self.screen.width, self.screen.height);
        let _ = writeln!(out, "# camera {} {}", self.camera.width, self.camera.height);
        for (k, v) in &self.overrides {
            let _ = writeln!(out, "# set {k}={v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "# note {n}");
        }
        for f in &self.frames {
            out.push_str(&render_frame(f));
            out.push('\n');
        }
        out
    }

    /// Parses and validates a whole trace.
    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let mut trace = Trace::default();
        let mut validator: Option<Validator> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let parsed = parse_line(raw).map_err(|message| ParseError { line, message })?;
            let header_too_late = |what: &str| {
                TraceError::Parse(ParseError {
                    line,
                    message: format!("`{what}` header after the first frame"),
                })
            };
            match parsed {
                Line::Screen(d) => {
                    if validator.is_some() {
                        return Err(header_too_late("screen"));
                    }
                    trace.screen = d;
                }
                Line::Camera(d) => {
                    if validator.is_some() {
                        return Err(header_too_late("camera"));
                    }
                    trace.camera = d;
                }
                Line::Set(k, v) => trace.overrides.push((k, v)),
                Line::Note(n) => trace.notes.push(n),
                Line::Version(_) | Line::Comment | Line::Blank => {}
                Line::Frame(f) => {
                    let v = validator.get_or_insert_with(|| Validator::new(trace.screen, trace.camera));
                    let f = v.validate(f).map_err(|source| TraceError::Validation { line, source })?;
                    trace.frames.push(f);
                }
            }
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_lines() {
        let Line::Frame(f) = parse_line("0 IMU 0.000000 -1.000000 0.000000 0 0 0").unwrap() else {
            panic!()
        };
        assert_eq!(f, SensorFrame::imu(0, Vec3::new(0.0, -1.0, 0.0), Vec3::default()));
        let Line::Frame(f) = parse_line("16 FACE DET 240 320 100 0.0 0").unwrap() else {
            panic!()
        };
        assert_eq!(f, SensorFrame::face(16, FaceDetection::new(Point::new(240.0, 320.0), 100.0, 0.0)));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = Trace::parse("16 FACE DET 240").unwrap_err();
        assert_eq!(
            err,
            TraceError::Parse(ParseError {
                line: 1,
                message: "missing fy".into()
            })
        );
        let err = Trace::parse("# facefuse-trace v1\n0 IMU 0 -1 0 0 0 0\n0 IMU 0 -1 0 0 0 0 9\n").unwrap_err();
        assert!(matches!(err, TraceError::Parse(ParseError { line: 3, .. })));
    }

    #[test]
    fn validation_errors_carry_line() {
        let err = Trace::parse("10 IMU 0 -1 0 0 0 0\n5 IMU 0 -1 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, TraceError::Validation { line: 2, .. }));
        let err = Trace::parse("0 TOUCH 0 BEGAN 700 10\n").unwrap_err();
        assert!(matches!(
            err,
            TraceError::Validation {
                line: 1,
                source: ValidationError::OutOfRange { .. }
            }
        ));
    }

    #[test]
    fn render_parse_round_trip() {
        let trace = Trace {
            overrides: vec![("face.n_exit".into(), "6".into())],
            notes: vec!["hello world".into()],
            frames: vec![
                SensorFrame::touch(0, 2, TouchPhase::Began, 10.5, 20.25),
                SensorFrame::imu(0, Vec3::new(0.1, -0.9, -0.0), Vec3::new(0.0, 0.0, 12.5)),
                SensorFrame::face(0, FaceDetection::new(Point::new(240.0, 320.0), 100.0, -30.0)),
                SensorFrame::face_missed(63),
            ],
            ..Trace::default()
        };
        let text = trace.render();
        assert!(text.starts_with("# facefuse-trace v1\n# screen 640 1136\n# camera 480 640\n"));
        assert!(text.contains("0 IMU 0.100000 -0.900000 0.000000 0.000000 0.000000 12.500000\n"));
        assert!(text.contains("0 FACE DET 240.000000 320.000000 100.000000 -30.000000 -45\n"));
        let back = Trace::parse(&text).unwrap();
        assert_eq!(back, trace);
        assert_eq!(back.render(), text);
    }

    #[test]
    fn header_must_precede_frames() {
        assert!(Trace::parse("0 FACE NONE\n# screen 100 100\n").is_err());
        assert!(Trace::parse("# facefuse-trace v2\n").is_err());
    }

    #[test]
    fn empty_trace_parses() {
        assert_eq!(Trace::parse("").unwrap(), Trace::default());
    }
}
