//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fail.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::process::Command;
use std::thread;
use std::time::{Duration, Instant};

use facefuse_cli::{serve, GatewayConfig, Settings};
use facefuse_core::engine::Value;
use facefuse_core::face::distance_ratio;
use facefuse_core::model::{CalibrationConstants, Payload, Point, TouchPhase};
use facefuse_core::sim::{Pose, Script, VirtualFace};
use facefuse_core::technique::{sector_with_hysteresis, Modality, TechniqueRegistry, Usage};
use facefuse_core::trace::noise::Gaussian;
use facefuse_core::trace::{generate, random_trace, replay, replay_with, ScenarioParams, Trace, SCENARIOS};
use facefuse_core::{EngineConfig, TechniqueEvent};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn events(trace: &Trace) -> Vec<TechniqueEvent> {
    replay(trace, &TechniqueRegistry::builtin(), &[]).unwrap().events
}

fn of<'a>(ev: &'a [TechniqueEvent], technique: &str, kind: &str) -> Vec<&'a TechniqueEvent> {
    ev.iter().filter(|e| e.technique == technique && e.kind == kind).collect()
}

fn num(e: &TechniqueEvent, k: &str) -> f64 {
    match e.payload.get(k) {
        Some(Value::Num(x)) => *x,
        Some(Value::Int(i)) => *i as f64,
        other => panic!("{k}: {other:?}"),
    }
}

fn script_trace(mut s: Script) -> Trace {
    Trace {
        frames: s.finish(),
        ..Trace::default()
    }
}

fn distance_law() -> Outcome {
    let mut rng = Gaussian::new(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let cal = CalibrationConstants {
            d_eye: rng.range(50.0, 75.0),
            d_image: rng.range(300.0, 2000.0),
        };
        let d1 = rng.range(100.0, 1000.0);
        let d2 = rng.range(100.0, 1000.0);
        let ratio = distance_ratio(cal.scale_at(d1), cal.scale_at(d2)).map_err(|e| e.to_string())?;
        worst = worst.max((ratio - d2 / d1).abs() / (d2 / d1));
    }
    ensure(worst < 1e-9, || format!("worst relative error {worst:e}"))?;
    Ok(format!("1000 triples, worst relative error {worst:.1e}"))
}

fn text_edit_cadence() -> Outcome {
    let moved = |amp: f64| {
        let p = ScenarioParams {
            amplitude: Some(amp),
            ..ScenarioParams::default()
        };
        let ev = events(&generate("lean_right", &p).unwrap());
        of(&ev, "text_edit", "CURSOR_MOVED").len()
    };
    let (at20, at10) = (moved(20.0), moved(10.0));
    ensure(at20 == 5 && at10 == 0, || format!("20 deg: {at20} events, 10 deg: {at10} events"))?;
    Ok("20 deg for 1 s: 5 CURSOR_MOVED; 10 deg: 0".into())
}

/// Enters 3D by tilting to 40 deg, then shows a face at `offset` px right
/// of center leaning `angle` deg. Returns every glimpse angle emitted.
fn glimpses(angle: f64, offset: f64) -> Vec<f64> {
    let mut s = Script::noiseless();
    let home = VirtualFace::centered(100.0);
    s.set_face(Some(home)).hold(300);
    s.ramp(1200, None, Some(Pose { tilt: 40.0, roll: 0.0 })).hold(1500);
    s.set_face(Some(VirtualFace {
        x: home.x + offset,
        angle,
        ..home
    }))
    .hold(2500);
    let ev = events(&script_trace(s));
    assert_eq!(of(&ev, "map_viewer", "VIEW_MODE").len(), 1);
    of(&ev, "map_viewer", "GLIMPSE").iter().map(|e| num(e, "angle")).collect()
}

fn glimpse_mapping() -> Outcome {
    let mut parts = Vec::new();
    for (a, want) in [(12.0, 45.0), (22.0, 90.0), (32.0, 135.0)] {
        let g = glimpses(a, 90.0);
        ensure(g.last() == Some(&want), || format!("F_a={a}: glimpses {g:?}, want final {want}"))?;
        parts.push(format!("{a}->{want}"));
    }
    let vetoed = glimpses(25.0, 10.0);
    ensure(vetoed.is_empty(), || format!("F_a=25 offset 10: glimpses {vetoed:?}"))?;
    Ok(format!("{} with 90 px offset; 25 deg with 10 px offset: none", parts.join(", ")))
}

fn toggles(s: Script) -> usize {
    of(&events(&script_trace(s)), "map_viewer", "VIEW_MODE").len()
}

fn toggle_3d() -> Outcome {
    let ramp = of(&events(&generate("tilt_to_3d", &ScenarioParams::default()).unwrap()), "map_viewer", "VIEW_MODE").len();
    ensure(ramp == 1, || format!("tilt ramp: {ramp} toggles"))?;

    let tilt = |t| Some(Pose { tilt: t, roll: 0.0 });
    let mut s = Script::noiseless();
    s.set_face(Some(VirtualFace::centered(100.0))).hold(300);
    s.ramp(1500, None, tilt(46.0));
    let mut t = 1500;
    for _ in 0..10 {
        s.ramp(t + 200, None, tilt(44.0)).ramp(t + 400, None, tilt(46.0));
        t += 400;
    }
    s.hold(t + 500);
    let osc = toggles(s);
    ensure(osc == 1, || format!("44/46 oscillation: {osc} toggles"))?;

    // Leaving the band re-arms; coming back toggles again.
    let mut s = Script::noiseless();
    s.set_face(Some(VirtualFace::centered(100.0))).hold(300);
    s.ramp(1300, None, tilt(45.0)).ramp(2300, None, tilt(85.0)).ramp(3300, None, tilt(45.0)).hold(3800);
    let rearmed = toggles(s);
    ensure(rearmed == 2, || format!("leave and return: {rearmed} toggles"))?;
    Ok("ramp: 1 toggle; 10 cycles of 44/46: 1 toggle; leave and return: 2".into())
}

fn menu() -> Outcome {
    // Pure sweep, both directions over two turns.
    let sweep: Vec<f64> = (0..=720).chain((0..720).rev()).map(f64::from).collect();
    let mut prev = None;
    let mut transitions = 0;
    for (i, &theta) in sweep.iter().enumerate() {
        let item = sector_with_hysteresis(theta, 8, prev, 5.0);
        let nominal = ((theta.rem_euclid(360.0) / 45.0).round() as u32) % 8;
        let off_boundary = (theta.rem_euclid(45.0) - 22.5).abs() > 5.0;
        if off_boundary {
            ensure(item == nominal, || format!("theta {theta}: item {item}, want {nominal}"))?;
        }
        if prev.is_some_and(|p| p != item) {
            transitions += 1;
            // A change only once the angle is past the boundary by the band.
            let past = (theta.rem_euclid(45.0) - 22.5).abs();
            ensure(past >= 5.0 - 1e-9, || format!("step {i} theta {theta}: changed inside the band"))?;
        }
        prev = Some(item);
    }
    ensure(transitions == 32, || format!("{transitions} transitions over four turns, want 32"))?;

    // Same sweep through the engine: device roll turning at 20 deg/s.
    let mut s = Script::noiseless();
    s.set_face(Some(VirtualFace::centered(100.0))).hold(500);
    s.ramp(18_500, None, Some(Pose { tilt: 90.0, roll: 360.0 })).hold(19_000);
    let ev = events(&script_trace(s));
    let items: Vec<i64> = of(&ev, "touch_free_menu", "HIGHLIGHT").iter().map(|e| num(e, "item") as i64).collect();
    ensure(items == vec![0, 1, 2, 3, 4, 5, 6, 7, 0], || format!("engine sweep highlights {items:?}"))?;

    // Dwell: how long item 0 stays highlighted before the device turns away.
    let dwell_run = |hold_ms: u64| {
        let mut s = Script::noiseless();
        s.set_face(Some(VirtualFace::centered(100.0)));
        s.hold(67 + hold_ms);
        s.ramp(67 + hold_ms + 50, None, Some(Pose { tilt: 90.0, roll: 90.0 })).hold(5000);
        let ev = events(&script_trace(s));
        let hl = of(&ev, "touch_free_menu", "HIGHLIGHT");
        let dwell = hl[1].t.0 - hl[0].t.0;
        let selected_0 = of(&ev, "touch_free_menu", "SELECTED")
            .iter()
            .filter(|e| num(e, "item") == 0.0)
            .count();
        (dwell, selected_0)
    };
    let (d_long, n_long) = dwell_run(2017);
    let (d_short, n_short) = dwell_run(1900);
    ensure(n_long == 1 && n_short == 0, || {
        format!("dwell {d_long} ms: {n_long} selections, dwell {d_short} ms: {n_short}")
    })?;
    Ok(format!(
        "sweep matches round(theta/45) mod 8 with 32 single transitions; engine sweep 0..7,0; dwell {d_long} ms selects, {d_short} ms does not"
    ))
}

fn flick_classes() -> Outcome {
    let class = |name: &str, face: bool| {
        let p = ScenarioParams {
            face,
            ..ScenarioParams::default()
        };
        of(&events(&generate(name, &p).unwrap()), "flick", "CLASS")
            .iter()
            .map(|e| e.payload.to_string())
            .collect::<Vec<_>>()
    };
    let expect = [
        ("normal_flick", "direction=RIGHT kind=NormalFlick rank=1"),
        ("phone_swipe", "direction=RIGHT kind=PhoneSwipe rank=2"),
        ("hold_and_swipe", "direction=RIGHT kind=HoldAndSwipe rank=3"),
        ("flick_and_swipe", "direction=RIGHT kind=FlickAndSwipe rank=4"),
    ];
    for (name, want) in expect {
        let got = class(name, true);
        ensure(got == vec![want.to_string()], || format!("{name}: {got:?}"))?;
    }
    for (name, _) in &expect[1..] {
        let got = class(name, false);
        ensure(got.is_empty(), || format!("{name} without a face: {got:?}"))?;
    }
    Ok("ranks 1-4 from the four traces; swipes without a face: none".into())
}

fn without_touch(mut t: Trace) -> Trace {
    t.frames.retain(|f| !matches!(f.payload, Payload::Touch(_)));
    t
}

fn navigator() -> Outcome {
    let nav = |t: &Trace| {
        events(t)
            .into_iter()
            .filter(|e| e.technique == "one_hand_navigator")
            .collect::<Vec<_>>()
    };
    let zoom_trace = generate("zoom_in", &ScenarioParams::default()).unwrap();
    let ev = nav(&zoom_trace);
    let zooms: Vec<f64> = of(&ev, "one_hand_navigator", "ZOOM").iter().map(|e| num(e, "factor")).collect();
    ensure(zooms == vec![1.25], || format!("zoom factors {zooms:?}"))?;

    let rot_trace = generate("rotate_device", &ScenarioParams::default()).unwrap();
    let ev = nav(&rot_trace);
    let rots: Vec<f64> = of(&ev, "one_hand_navigator", "ROTATE").iter().map(|e| num(e, "rotation")).collect();
    ensure(rots == vec![-18.0, -36.0], || format!("rotations {rots:?}"))?;

    let idle_zoom = nav(&without_touch(zoom_trace));
    let idle_rot = nav(&without_touch(rot_trace));
    ensure(idle_zoom.is_empty() && idle_rot.is_empty(), || {
        format!("finger up: {} + {} events", idle_zoom.len(), idle_rot.len())
    })?;
    Ok("level -1 -> zoom 1.25; +36 deg roll -> -18, -36; finger up -> no events".into())
}

fn scroll_freeze() -> Outcome {
    let registry = TechniqueRegistry::builtin();
    for seed in 0..100u64 {
        let mut rng = Gaussian::new(1000 + seed);
        let s0 = rng.range(50.0, 150.0);
        let step = rng.range(25.0, 50.0);
        let s1 = if s0 + step <= 155.0 { s0 + step } else { s0 - step };
        let up = 300 + rng.range(200.0, 800.0) as u64;
        let wait = rng.range(550.0, 1500.0) as u64;
        let ramp_end = up + wait + rng.range(100.0, 600.0) as u64;
        let end = ramp_end + 800;

        let mut s = Script::noiseless();
        s.set_face(Some(VirtualFace::centered(s0))).hold(up + wait);
        s.ramp(ramp_end, Some(VirtualFace::centered(s1)), None).hold(end);
        let a = Point::new(320.0, 800.0);
        let b = Point::new(320.0, 800.0 - rng.range(50.0, 400.0));
        s.touch(300, 0, TouchPhase::Began, a);
        s.drag(0, 300, up, a, b);
        s.touch(up, 0, TouchPhase::Ended, b);
        let trace = script_trace(s);

        let mut samples: Vec<(u64, f64, Option<u8>)> = Vec::new();
        replay_with(&trace, &registry, &[], |e, o| {
            let mult = match e.status().get("scroll_mult") {
                Some(Value::Num(m)) => *m,
                _ => f64::NAN,
            };
            samples.push((o.t.0, mult, e.snapshot().scale_level()));
        })
        .map_err(|e| e.to_string())?;
        let frozen_from = up + 500 + 17;
        let inactive: Vec<_> = samples.iter().filter(|(t, ..)| *t >= frozen_from).collect();
        let first = inactive.first().ok_or("no inactive ticks")?;
        let last = inactive.last().unwrap();
        ensure(first.2 != last.2, || format!("seed {seed}: level never changed ({:?})", first.2))?;
        ensure(inactive.iter().all(|(_, m, _)| *m == first.1), || {
            format!("seed {seed}: multiplier moved while inactive")
        })?;
    }
    Ok("100 traces, multiplier unchanged across inactive level changes".into())
}

fn determinism() -> Outcome {
    let registry = TechniqueRegistry::builtin();
    for seed in 0..200u64 {
        let trace = random_trace(seed, 16);
        let text = trace.render();
        let back = Trace::parse(&text).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back == trace && back.render() == text, || format!("seed {seed}: round trip differs"))?;
        let a = replay(&trace, &registry, &[]).map_err(|e| e.to_string())?.log();
        let b = replay(&back, &registry, &[]).map_err(|e| e.to_string())?.log();
        ensure(a == b, || format!("seed {seed}: replays differ"))?;
    }
    Ok("200 random traces round-trip and replay byte-identically".into())
}

fn noise_robustness() -> Outcome {
    let mut menu_ok = 0;
    let mut tilt_ok = 0;
    for seed in 0..100u64 {
        let p = ScenarioParams::noisy(seed, 0.05, 3.0, 2.0);
        let ev = events(&generate("menu_dwell", &p).unwrap());
        menu_ok += (of(&ev, "touch_free_menu", "SELECTED").len() == 1) as u32;
        let ev = events(&generate("tilt_to_3d", &p).unwrap());
        tilt_ok += (of(&ev, "map_viewer", "VIEW_MODE").len() == 1) as u32;
    }
    ensure(menu_ok >= 95 && tilt_ok >= 95, || format!("menu_dwell {menu_ok}/100, tilt_to_3d {tilt_ok}/100"))?;
    Ok(format!("menu_dwell {menu_ok}/100, tilt_to_3d {tilt_ok}/100"))
}

fn registry_table() -> Outcome {
    const D: Usage = Usage::D;
    const C: Usage = Usage::C;
    const DC: Usage = Usage::BOTH;
    const NO: Usage = Usage::NONE;
    // (face, motion, touch) per technique.
    let table = [
        ("multi_scale_scroll", [C, NO, C]),
        ("text_edit", [D, NO, DC]),
        ("map_viewer", [C, D, NO]),
        ("touch_free_menu", [C, C, NO]),
        ("flick", [D, D, DC]),
        ("one_hand_navigator", [DC, C, DC]),
    ];
    let engine = TechniqueRegistry::builtin()
        .build_engine(&EngineConfig::default())
        .map_err(|e| e.to_string())?;
    let got: Vec<_> = engine.registry().collect();
    ensure(got.len() == table.len(), || format!("{} techniques registered", got.len()))?;
    for (id, usage) in table {
        let d = got.iter().find(|d| d.id == id).ok_or_else(|| format!("{id} missing"))?;
        for (m, want) in Modality::ALL.iter().zip(usage) {
            ensure(d.usage(*m) == want, || format!("{id} {m:?}: {:?}, want {want:?}", d.usage(*m)))?;
        }
    }
    Ok("six descriptors match the modality table".into())
}

fn stream_through_gateway(port: u16, text: &str) -> Result<String, String> {
    let conn = TcpStream::connect(("127.0.0.1", port)).map_err(|e| e.to_string())?;
    conn.set_read_timeout(Some(Duration::from_secs(10))).map_err(|e| e.to_string())?;
    let mut w = conn.try_clone().map_err(|e| e.to_string())?;
    let body = format!("{text}END\n");
    let writer = thread::spawn(move || w.write_all(body.as_bytes()));
    let mut evt = String::new();
    for line in BufReader::new(conn).lines() {
        let line = line.map_err(|e| e.to_string())?;
        if line.starts_with("ERR") {
            return Err(line);
        }
        if !line.starts_with("STATE ") {
            evt.push_str(&line);
            evt.push('\n');
        }
    }
    writer.join().unwrap().map_err(|e| e.to_string())?;
    Ok(evt)
}

fn gateway_equivalence() -> Outcome {
    let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    let port = listener.local_addr().unwrap().port();
    thread::spawn(move || {
        serve(
            listener,
            GatewayConfig {
                settings: Settings::default(),
            },
        )
    });
    let dir = std::env::temp_dir().join(format!("facefuse-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let exe = env!("CARGO_BIN_EXE_facefuse");
    let mut slowest = Duration::ZERO;
    for name in SCENARIOS {
        let start = Instant::now();
        let path = dir.join(format!("{name}.trace"));
        let gen = Command::new(exe)
            .args(["generate", "--scenario", name, "--out"])
            .arg(&path)
            .env_remove("FACEFUSE_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(gen.status.success(), || format!("{name}: generate failed"))?;
        let out = Command::new(exe)
            .args(["replay", "--trace"])
            .arg(&path)
            .env_remove("FACEFUSE_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("{name}: replay failed"))?;
        let batch = String::from_utf8(out.stdout).unwrap();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let streamed = stream_through_gateway(port, &text)?;
        ensure(!batch.is_empty() && streamed == batch, || format!("{name}: streamed EVT lines differ"))?;
        let took = start.elapsed();
        ensure(took < Duration::from_secs(5), || format!("{name}: {took:?}"))?;
        slowest = slowest.max(took);
    }
    Ok(format!("{} scenarios identical, slowest {slowest:.2?}", SCENARIOS.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("distance law", distance_law, Some(Duration::from_secs(1))),
        ("text-edit cadence", text_edit_cadence, Some(Duration::from_secs(1))),
        ("glimpse mapping", glimpse_mapping, None),
        ("3D toggle", toggle_3d, None),
        ("menu", menu, None),
        ("flick classes", flick_classes, None),
        ("navigator", navigator, None),
        ("scroll freeze", scroll_freeze, None),
        ("determinism and round-trip", determinism, Some(Duration::from_secs(10))),
        ("noise robustness", noise_robustness, Some(Duration::from_secs(30))),
        ("registry table", registry_table, None),
        ("gateway/batch equivalence", gateway_equivalence, None),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        if let (Ok(_), Some(b)) = (&outcome, budget) {
            if took > *b {
                outcome = Err(format!("took {took:.2?}, budget {b:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
