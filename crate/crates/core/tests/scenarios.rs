//! Each built-in scenario, replayed without noise, produces its headline
//! event.

use facefuse_core::technique::TechniqueRegistry;
use facefuse_core::trace::{generate, replay, ScenarioParams, SCENARIOS};

fn log(name: &str) -> Vec<String> {
    let trace = generate(name, &ScenarioParams::default()).unwrap();
    replay(&trace, &TechniqueRegistry::builtin(), &[])
        .unwrap()
        .events
        .iter()
        .map(|e| e.to_string())
        .collect()
}

fn matching<'a>(log: &'a [String], needle: &str) -> Vec<&'a String> {
    log.iter().filter(|l| l.contains(needle)).collect()
}

#[test]
fn face_approach_slows_scrolling_and_zooms_in() {
    let log = log("face_approach");
    let rates = matching(&log, "RATE_CHANGED");
    assert_eq!(
        rates.iter().map(|l| l.split_once(" EVT ").unwrap().1).collect::<Vec<_>>(),
        vec![
            "multi_scale_scroll RATE_CHANGED level=4 multiplier=0.500000",
            "multi_scale_scroll RATE_CHANGED level=3 multiplier=0.250000",
        ]
    );
    let zooms = matching(&log, " ZOOM ");
    assert_eq!(zooms.len(), 5);
    assert!(zooms.last().unwrap().ends_with("factor=3.051758 step=5"));
}

#[test]
fn lean_right_steps_cursor_right() {
    let log = log("lean_right");
    let moved = matching(&log, "CURSOR_MOVED");
    assert_eq!(moved.len(), 5);
    assert!(moved.iter().all(|l| l.contains("direction=RIGHT")));
    assert!(moved[4].ends_with("index=55"));
}

#[test]
fn lean_left_steps_cursor_left() {
    let log = log("lean_left");
    let moved = matching(&log, "CURSOR_MOVED");
    assert_eq!(moved.len(), 5);
    assert!(moved[4].ends_with("direction=LEFT index=45"));
}

#[test]
fn tilt_to_3d_toggles_once() {
    let log = log("tilt_to_3d");
    assert_eq!(matching(&log, "VIEW_MODE"), vec!["1517 EVT map_viewer VIEW_MODE mode=3D"]);
}

#[test]
fn swipe_scenarios_classify() {
    let expect = [
        ("phone_swipe", "kind=PhoneSwipe rank=2"),
        ("hold_and_swipe", "kind=HoldAndSwipe rank=3"),
        ("flick_and_swipe", "kind=FlickAndSwipe rank=4"),
        ("normal_flick", "kind=NormalFlick rank=1"),
    ];
    for (name, class) in expect {
        let log = log(name);
        let classes = matching(&log, " CLASS ");
        assert_eq!(classes.len(), 1, "{name}: {classes:?}");
        assert!(classes[0].ends_with(&format!("direction=RIGHT {class}")), "{name}: {classes:?}");
    }
}

#[test]
fn menu_dwell_selects_item_two() {
    let log = log("menu_dwell");
    assert_eq!(
        matching(&log, "touch_free_menu"),
        vec![
            "67 EVT touch_free_menu HIGHLIGHT item=2",
            "2067 EVT touch_free_menu SELECTED item=2"
        ]
    );
}

#[test]
fn zoom_scenarios_commit_one_step() {
    let log_in = log("zoom_in");
    assert_eq!(matching(&log_in, " ZOOM ").len(), 1);
    assert!(matching(&log_in, "COMMIT")[0].ends_with("rotation=0.000000 zoom=1.250000"));
    let log_out = log("zoom_out");
    assert!(matching(&log_out, "COMMIT")[0].ends_with("rotation=0.000000 zoom=0.800000"));
}

#[test]
fn rotate_device_counter_rotates_content() {
    let log = log("rotate_device");
    let rot: Vec<_> = matching(&log, " ROTATE ");
    assert_eq!(rot.len(), 2);
    assert!(rot[0].ends_with("rotation=-18.000000"));
    assert!(rot[1].ends_with("rotation=-36.000000"));
    assert!(matching(&log, "COMMIT")[0].ends_with("rotation=-36.000000 zoom=1.000000"));
}

#[test]
fn every_scenario_is_covered() {
    assert_eq!(SCENARIOS.len(), 12);
    for name in SCENARIOS {
        assert!(!log(name).is_empty(), "{name}");
    }
}
