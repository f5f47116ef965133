//! Streaming gateway: one engine per TCP connection.
//!
//! The client writes trace lines (headers first, then frames in time order)
//! and may end with `END`. The server answers with the same `EVT` lines a
//! batch replay prints plus a `STATE` line every `1000 / state_hz` ms of
//! trace time. Protocol violations get one `ERR <reason>` line and the
//! connection is closed.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use facefuse_core::engine::{fmt_fixed6, Session, TickOutput};
use facefuse_core::technique::TechniqueRegistry;
use facefuse_core::trace::{parse_line, session_config, Line, Trace};
use facefuse_core::Engine;

use crate::settings::Settings;

/// Everything a connection handler needs; cheap to clone per connection.
#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub settings: Settings,
}

/// `STATE` line for the engine's current snapshot.
pub fn state_line(engine: &Engine) -> String {
    let snap = engine.snapshot();
    let face = if snap.face.is_present() { "PRESENT" } else { "ABSENT" };
    format!(
        "STATE {} face={face} tilt={} roll={} {}",
        snap.t.0,
        fmt_fixed6(snap.attitude.tilt_deg),
        fmt_fixed6(snap.attitude.roll_deg),
        engine.status()
    )
}

struct Stream {
    period: u64,
    next_state: u64,
    out: Vec<String>,
}

impl Stream {
    fn on_tick(&mut self, engine: &Engine, tick: &TickOutput) {
        for e in &tick.events {
            self.out.push(e.to_string());
        }
        if tick.t.0 >= self.next_state {
            self.out.push(state_line(engine));
            while self.next_state <= tick.t.0 {
                self.next_state += self.period;
            }
        }
    }
}

fn flush<W: Write>(w: &mut W, lines: &mut Vec<String>) -> io::Result<()> {
    for l in lines.drain(..) {
        writeln!(w, "{l}")?;
    }
    w.flush()
}

/// Serves one client until `END`, end of input or a protocol error.
pub fn handle_connection<R: BufRead, W: Write>(reader: R, mut writer: W, cfg: &GatewayConfig) -> io::Result<()> {
    let registry = TechniqueRegistry::builtin();
    let mut header = Trace::default();
    let mut session: Option<Session> = None;
    let mut stream = Stream {
        period: (1000 / cfg.settings.state_hz.max(1) as u64).max(1),
        next_state: 0,
        out: Vec::new(),
    };

    let fail = |w: &mut W, reason: String| -> io::Result<()> {
        writeln!(w, "ERR {reason}")?;
        w.flush()
    };

    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        if line.trim() == "END" {
            break;
        }
        let parsed = match parse_line(&line) {
            Ok(p) => p,
            Err(msg) => return fail(&mut writer, format!("parse line {n}: {msg}")),
        };
        let frame = match parsed {
            Line::Frame(f) => f,
            Line::Screen(_) | Line::Camera(_) | Line::Set(..) if session.is_some() => {
                return fail(&mut writer, format!("parse line {n}: header after the first frame"));
            }
            Line::Screen(d) => {
                header.screen = d;
                continue;
            }
            Line::Camera(d) => {
                header.camera = d;
                continue;
            }
            Line::Set(k, v) => {
                header.overrides.push((k, v));
                continue;
            }
            Line::Version(_) | Line::Note(_) | Line::Comment | Line::Blank => continue,
        };
        if session.is_none() {
            let engine = session_config(&header, &registry, &cfg.settings.overrides)
                .and_then(|c| registry.build_engine(&c));
            match engine {
                Ok(e) => session = Some(Session::new(e)),
                Err(e) => return fail(&mut writer, format!("config {e}")),
            }
        }
        let s = session.as_mut().expect("session built above");
        if let Err(e) = s.push(frame, &mut |e, t| stream.on_tick(e, t)) {
            flush(&mut writer, &mut stream.out)?;
            return fail(&mut writer, format!("validation line {n}: {e}"));
        }
        flush(&mut writer, &mut stream.out)?;
    }
    if let Some(s) = session.as_mut() {
        s.finish(&mut |e, t| stream.on_tick(e, t));
    }
    flush(&mut writer, &mut stream.out)
}

/// Accepts connections forever, one thread per client.
pub fn serve(listener: TcpListener, cfg: GatewayConfig) -> io::Result<()> {
    for conn in listener.incoming() {
        let conn = conn?;
        let cfg = cfg.clone();
        thread::spawn(move || {
            let _ = serve_stream(conn, &cfg);
        });
    }
    Ok(())
}

fn serve_stream(conn: TcpStream, cfg: &GatewayConfig) -> io::Result<()> {
    let reader = BufReader::new(conn.try_clone()?);
    handle_connection(reader, BufWriter::new(&conn), cfg)?;
    conn.shutdown(std::net::Shutdown::Both)
}
