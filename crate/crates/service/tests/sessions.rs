use std::fs;

use dess::experiment::{DisplayFrame, InputSource};
use dess::experiment::{ScheduleSettings, SpeedAgent, ZoneCenterAgent};
use dess_service::results::{parse_csv, CSV_HEADER};
use dess_service::session::{SessionConfig, LOG_FILE};
use dess_service::{export_results, open_session, replay_session, Session, SessionStore, WireMessage};

fn config(family: &str, trials: u32) -> SessionConfig {
    SessionConfig {
        label: "s1".into(),
        family: family.into(),
        seed: 11,
        schedule: ScheduleSettings {
            trials_per_condition: trials,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn frame_of(msg: &WireMessage) -> DisplayFrame {
    match msg {
        WireMessage::Display { tick, cursor, zone } => DisplayFrame {
            shows_tick: cursor.map(|_| *tick),
            cursor: cursor.unwrap_or(0.0),
            zone: zone.map(|[lo, hi]| (lo, hi)),
        },
        other => panic!("expected display, got {other:?}"),
    }
}

/// Drive one trial with a scripted agent the way a client would: read the
/// display message, send an angle, let the server tick.
fn play_trial(s: &mut Session, agent: &mut dyn InputSource) -> WireMessage {
    let plan = s.plan()[s.trial_index()];
    agent.begin(&plan.condition, &s.config().engine);
    let (_, mut display) = s.start_trial().unwrap();
    let mut tick = 0;
    loop {
        let angle = agent.angle(tick, &frame_of(&display)).unwrap();
        s.input(angle, tick).unwrap();
        let out = s.drive_tick(None).unwrap();
        if let Some(end) = out.ended {
            return end;
        }
        display = out.display;
        tick += 1;
    }
}

#[test]
fn delay_display_lags_cursor_by_delay_ticks() {
    let mut s = open_session("x", config("delay", 1), None).unwrap();
    // Find the 3/8 s (15 tick) condition.
    while s.plan()[s.trial_index()].condition.display_delay_ticks() != 15 {
        s.start_trial().unwrap();
        s.abort().unwrap();
    }
    s.start_trial().unwrap();
    let mut cursors = Vec::new();
    let mut shown = Vec::new();
    for k in 0..40 {
        let out = s.drive_tick(Some(k as f64 * 0.01)).unwrap();
        let WireMessage::Display { tick, cursor, .. } = out.display else {
            panic!()
        };
        cursors.push(8.0 * (k as f64 * 0.01));
        shown.push((tick, cursor));
    }
    for (tick, cursor) in shown {
        if tick < 15 {
            assert_eq!(cursor, None);
        } else {
            // Cursor at tick t is set by the angle of tick t - 1.
            let src = tick - 15;
            let expected = if src == 0 { 0.0 } else { cursors[src as usize - 1] };
            assert_eq!(cursor, Some(expected), "tick {tick}");
        }
    }
}

#[test]
fn quantization_zone_halves_each_refinement() {
    let mut s = open_session("x", config("quantization", 1), None).unwrap();
    // Trials cycle through R = 1..6 in shuffled order; take the R = 1 one.
    while s.plan()[s.trial_index()].condition.rate_bits() != Some(1) {
        s.start_trial().unwrap();
        s.abort().unwrap();
    }
    s.start_trial().unwrap();
    let mut widths = Vec::new();
    for _ in 0..=42 {
        let out = s.drive_tick(Some(0.0)).unwrap();
        let WireMessage::Display { tick, zone, .. } = out.display else {
            panic!()
        };
        if tick % 14 == 0 {
            let [lo, hi] = zone.unwrap();
            widths.push(hi - lo);
        }
    }
    assert_eq!(widths, vec![4.0, 2.0, 1.0]);
}

#[test]
fn persisted_session_replays_identically() {
    let root = tempfile::tempdir().unwrap();
    let store = SessionStore::open(root.path()).unwrap();
    let id = store.create(config("diversity-1", 1)).unwrap();
    let shared = store.get(&id).unwrap();
    {
        let mut s = shared.lock().unwrap();
        for _ in 0..6 {
            play_trial(&mut s, &mut SpeedAgent::default());
        }
        s.start_trial().unwrap();
        s.drive_tick(Some(40.0)).unwrap();
        s.abort().unwrap();
    }
    let replayed = replay_session(&root.path().join(&id)).unwrap();
    assert_eq!(replayed.len(), 7);
    assert!(replayed.iter().all(|r| r.matches()));
}

#[test]
fn crash_mid_trial_keeps_completed_trials() {
    let root = tempfile::tempdir().unwrap();
    let id;
    let first_summary;
    {
        let store = SessionStore::open(root.path()).unwrap();
        id = store.create(config("combined", 1)).unwrap();
        let shared = store.get(&id).unwrap();
        let mut s = shared.lock().unwrap();
        play_trial(&mut s, &mut ZoneCenterAgent::default());
        first_summary = s.completed()[0].clone();
        s.start_trial().unwrap();
        for _ in 0..5 {
            s.drive_tick(Some(0.1)).unwrap();
        }
        // Dropped here without finishing, as if the process died.
    }
    // A torn write at the end of the log is tolerated as well.
    let log = root.path().join(&id).join(LOG_FILE);
    let mut text = fs::read_to_string(&log).unwrap();
    text.push_str("{\"kind\":\"ticks\",\"trial\":1,\"samp");
    fs::write(&log, text).unwrap();

    let store = SessionStore::open(root.path()).unwrap();
    let s = store.get(&id).unwrap();
    let mut s = s.lock().unwrap();
    assert_eq!(s.completed(), &[first_summary]);
    assert_eq!(s.trial_index(), 1);
    let end = play_trial(&mut s, &mut ZoneCenterAgent::default());
    assert!(matches!(end, WireMessage::TrialEnd { trial: 1, .. }));
}

#[test]
fn results_csv_round_trips() {
    // Three synthetic sessions of different shape.
    for (family, trials) in [("delay", 2), ("combined", 1), ("diversity-2", 1)] {
        let mut s = open_session("x", config(family, trials), None).unwrap();
        while !s.is_done() {
            if family.starts_with("diversity") {
                play_trial(&mut s, &mut SpeedAgent::default());
            } else {
                play_trial(&mut s, &mut ZoneCenterAgent::default());
            }
        }
        let bundle = export_results(&s);
        let csv = bundle.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(parse_csv(&csv).unwrap(), bundle.rows);
        let n: usize = bundle.rows.iter().map(|r| r.n + r.censored + r.invalid).sum();
        assert_eq!(n, s.plan().len(), "{family}");
        let json = serde_json::to_string(&bundle).unwrap();
        assert_eq!(
            serde_json::from_str::<dess_service::ResultsBundle>(&json).unwrap(),
            bundle
        );
    }
}

#[test]
fn baseline_trials_set_internal_delay() {
    let mut s = open_session("x", config("delay", 2), None).unwrap();
    while !s.is_done() {
        play_trial(&mut s, &mut ZoneCenterAgent::default());
    }
    let bundle = export_results(&s);
    // Zero-delay trials land one tick after the first frame.
    assert_eq!(bundle.internal_delay, 0.025);
    let zero = bundle.rows.iter().find(|r| r.condition == "delay=0").unwrap();
    assert_eq!(zero.mean_reach_time, Some(0.0));
}

#[test]
fn unknown_session_is_rejected() {
    let store = SessionStore::in_memory();
    assert!(store.export_results("nope").is_err());
}
