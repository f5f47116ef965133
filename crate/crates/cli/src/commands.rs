use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use facefuse_core::technique::TechniqueRegistry;
use facefuse_core::trace::{generate, replay, replay_with, ReplayError, ScenarioError, ScenarioParams, Trace, TraceError};
use facefuse_core::Engine;
use thiserror::Error;

use crate::gateway::{self, GatewayConfig};
use crate::settings::{Settings, SettingsError};

pub const CONFIG_ENV: &str = "FACEFUSE_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "facefuse", version, about = "Face + touch + motion gesture fusion tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a trace and write the event log.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// TOML session config; falls back to $FACEFUSE_CONFIG.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra `key=value` config override, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Write a synthetic scenario trace.
    Generate {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scenario parameter: sigma_accel, sigma_px, sigma_deg, amplitude or face.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the fused state after every tick.
    Inspect {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the streaming gateway on localhost.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `gateway.state_hz` from the config file.
        #[arg(long)]
        state_hz: Option<u32>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Settings(#[from] SettingsError),
    #[error("{path}: {source}")]
    Trace { path: String, source: TraceError },
    #[error("{0}")]
    Replay(ReplayError),
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{context}: {source}")]
    File { context: String, source: io::Error },
}

impl CliError {
    /// 1 for input and runtime failures, 2 for configuration problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Settings(_) => 2,
            CliError::Replay(ReplayError::Config(_)) => 2,
            CliError::Scenario(_) => 2,
            _ => 1,
        }
    }
}

fn load_settings(path: Option<&Path>) -> Result<Settings, CliError> {
    let env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    match path.map(Path::to_path_buf).or(env) {
        Some(p) => Ok(Settings::load(&p)?),
        None => Ok(Settings::default()),
    }
}

fn read_trace(path: &Path) -> Result<Trace, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::File {
        context: format!("cannot read {}", path.display()),
        source,
    })?;
    Trace::parse(&text).map_err(|source| CliError::Trace {
        path: path.display().to_string(),
        source,
    })
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::File {
            context: format!("cannot write {}", p.display()),
            source,
        }),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn fold_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Human-readable fused state, one line per tick.
pub fn inspect_line(engine: &Engine) -> String {
    let snap = engine.snapshot();
    let mut s = format!("t={}", snap.t.0);
    match snap.face() {
        Some(f) => {
            let _ = write!(
                s,
                " face=PRESENT fx={:.0} fy={:.0} fs={:.0} fa={:.1}",
                fold_zero(f.center.x),
                fold_zero(f.center.y),
                fold_zero(f.scale),
                fold_zero(f.angle)
            );
            if let Some(l) = snap.scale_level() {
                let _ = write!(s, " level={l}");
            }
        }
        None => s.push_str(" face=ABSENT"),
    }
    let _ = write!(
        s,
        " tilt={:.1} roll={:.1}",
        fold_zero(snap.attitude.tilt_deg),
        fold_zero(snap.attitude.roll_deg)
    );
    match snap.touch.primary() {
        Some(p) => {
            let at = p.current;
            let _ = write!(s, " touch=DOWN x={:.0} y={:.0}", fold_zero(at.x), fold_zero(at.y));
        }
        None => s.push_str(" touch=UP"),
    }
    s
}

/// Runs one command. Normal output goes to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let registry = TechniqueRegistry::builtin();
    match cli.command {
        Command::Replay { trace, config, out, set } => {
            let mut settings = load_settings(config.as_deref())?;
            settings.push_overrides(&set).map_err(SettingsError::from)?;
            let trace = read_trace(&trace)?;
            let r = replay(&trace, &registry, &settings.overrides).map_err(CliError::Replay)?;
            write_output(out.as_deref(), &r.log(), stdout)
        }
        Command::Generate {
            scenario,
            seed,
            params,
            out,
        } => {
            let mut p = ScenarioParams {
                seed,
                ..ScenarioParams::default()
            };
            for kv in &params {
                let (k, v) = kv.split_once('=').ok_or_else(|| ScenarioError::InvalidParam {
                    key: kv.clone(),
                    value: String::new(),
                })?;
                p.set(k.trim(), v.trim())?;
            }
            let trace = generate(&scenario, &p)?;
            write_output(out.as_deref(), &trace.render(), stdout)
        }
        Command::Inspect { trace, config } => {
            let settings = load_settings(config.as_deref())?;
            let trace = read_trace(&trace)?;
            let mut text = String::new();
            replay_with(&trace, &registry, &settings.overrides, |e, _| {
                text.push_str(&inspect_line(e));
                text.push('\n');
            })
            .map_err(CliError::Replay)?;
            write_output(None, &text, stdout)
        }
        Command::Serve { port, config, state_hz } => {
            let mut settings = load_settings(config.as_deref())?;
            if let Some(hz) = state_hz {
                if !(1..=1000).contains(&hz) {
                    return Err(SettingsError::from(facefuse_core::ConfigError::invalid(
                        "gateway.state_hz",
                        &hz.to_string(),
                        "must be within [1, 1000]",
                    ))
                    .into());
                }
                settings.state_hz = hz;
            }
            let listener = TcpListener::bind(("127.0.0.1", port))?;
            writeln!(stdout, "listening on {}", listener.local_addr()?)?;
            stdout.flush()?;
            gateway::serve(listener, GatewayConfig { settings })?;
            Ok(())
        }
    }
}

/// Entry point shared by the binary: parses `args` and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = io::stdout().lock();
    match execute(cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("facefuse: {e}");
            e.exit_code()
        }
    }
}
