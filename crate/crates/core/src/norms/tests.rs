use proptest::prelude::*;

use super::*;
use crate::demo::garage_month;
use crate::prov::{Literal, ProvNode};
use crate::sim::Scenario;

fn at(day: u32, h: u32, m: u32) -> Timestamp {
    Timestamp::from_ymd_hms(2024, 3, day, h, m, 0).unwrap()
}

/// Pairs the month's open/close utterances directly from the scenario text.
fn month_events() -> Vec<ActionEvent> {
    let scenario = Scenario::parse(&garage_month()).unwrap();
    let mut events = Vec::new();
    let mut open = None;
    for turn in &scenario.turns {
        if turn.text.starts_with("Open") {
            open = Some(turn.time);
        } else if let Some(start) = open.take() {
            events.push(ActionEvent::new(
                DOOR_OPEN_INTERVAL,
                start,
                (turn.time.unix() - start.unix()) as u64,
            ));
        }
    }
    events
}

fn response(doc: &mut ProvDocument, id: &str, time: Timestamp, action: &str) {
    let node = ProvNode::activity(ids::trace_node(id, "handling"))
        .with_type(ids::skill_response_type())
        .with_attr(ids::action_key(), Literal::str(action))
        .with_times(Some(time), None);
    doc.add_node(node).unwrap();
}

fn doc() -> ProvDocument {
    let mut doc = ProvDocument::new();
    for (p, u) in ids::RUNTIME_NAMESPACES {
        doc.add_namespace(p, u).unwrap();
    }
    doc
}

#[test]
fn pairs_opens_with_closes() {
    let mut d = doc();
    response(&mut d, "t1", at(12, 8, 0), DOOR_OPENED);
    response(&mut d, "t2", at(12, 8, 3), DOOR_CLOSED);
    response(&mut d, "t3", at(12, 9, 0), "none");
    assert_eq!(
        extract_events(&d, DOOR_OPEN_INTERVAL),
        vec![ActionEvent::new(DOOR_OPEN_INTERVAL, at(12, 8, 0), 180)]
    );
    assert!(extract_events(&doc(), DOOR_OPEN_INTERVAL).is_empty());
    assert!(extract_events(&d, "window_open_interval").is_empty());
}

#[test]
fn unmatched_open_is_open_ended() {
    let mut d = doc();
    response(&mut d, "t1", at(12, 8, 0), DOOR_OPENED);
    response(&mut d, "t2", at(12, 8, 30), DOOR_OPENED);
    response(&mut d, "t3", at(12, 8, 33), DOOR_CLOSED);
    response(&mut d, "t4", at(12, 9, 0), DOOR_OPENED);
    response(&mut d, "t5", at(12, 9, 10), "none");
    let events = extract_events(&d, DOOR_OPEN_INTERVAL);
    assert_eq!(events.len(), 3);
    assert!(events[0].open_ended);
    assert_eq!(events[0].duration, 70 * 60);
    assert!(!events[1].open_ended);
    assert_eq!(events[1].duration, 180);
    assert!(events[2].open_ended);
    assert_eq!(events[2].duration, 600);
}

fn find(norms: &[Norm], day: DayClass, minute: u32) -> Option<&Norm> {
    norms
        .iter()
        .find(|n| n.day_class == day && n.window.0 <= minute && minute <= n.window.1)
}

#[test]
fn month_yields_the_expected_norms() {
    let norms = mine_norms(&month_events(), &NormConfig::default());
    let summaries: Vec<String> = norms.iter().map(Norm::summary).collect();
    // Early days are weekday indices 2, 9, 15 (05:0x) and 6, 12, 18 (06:0x),
    // lasting 2 + index % 4 minutes.
    assert_eq!(
        summaries,
        vec![
            "weekdays 05:00–05:30, 3–5 min, support 3",
            "weekdays 06:00–06:30, 2–4 min, support 3",
            "weekdays 07:30–08:30, 2–5 min, support 14",
            "weekdays 17:30–18:30, 2–5 min, support 20",
            "weekends 09:00–22:00, 30–55 min, support 104",
        ]
    );
    let morning = find(&norms, DayClass::Weekday, 8 * 60).unwrap();
    assert!(morning.duration_range.0 >= 120 && morning.duration_range.1 <= 300);
    let weekend = find(&norms, DayClass::Weekend, 22 * 60).unwrap();
    assert_eq!(find(&norms, DayClass::Weekend, 9 * 60), Some(weekend));
    assert!(weekend.duration_range.0 >= 30 * 60);
}

#[test]
fn violations_against_the_month() {
    let config = NormConfig::default();
    let norms = mine_norms(&month_events(), &config);
    let tuesday = |h, m| Timestamp::from_ymd_hms(2024, 4, 2, h, m, 0).unwrap();
    let night = ActionEvent::new(DOOR_OPEN_INTERVAL, tuesday(2, 30), 180);
    let v = check_violation(&night, &norms, &config).unwrap();
    assert_eq!(v.kind, ViolationKind::OutsideWindow);
    assert!(v.matched_norm.is_none());

    let long = ActionEvent::new(DOOR_OPEN_INTERVAL, tuesday(8, 5), 40 * 60);
    let v = check_violation(&long, &norms, &config).unwrap();
    assert_eq!(v.kind, ViolationKind::ExcessiveDuration);
    assert_eq!(v.matched_norm.unwrap().core, (450, 510));

    let normal = ActionEvent::new(DOOR_OPEN_INTERVAL, tuesday(8, 10), 180);
    assert_eq!(check_violation(&normal, &norms, &config), None);

    // A long weekend opening is normal.
    let saturday = ActionEvent::new(
        DOOR_OPEN_INTERVAL,
        Timestamp::from_ymd_hms(2024, 4, 6, 14, 0, 0).unwrap(),
        50 * 60,
    );
    assert_eq!(check_violation(&saturday, &norms, &config), None);
}

#[test]
fn support_threshold() {
    let events = [
        ActionEvent::new(DOOR_OPEN_INTERVAL, at(12, 8, 0), 120),
        ActionEvent::new(DOOR_OPEN_INTERVAL, at(13, 8, 5), 120),
    ];
    assert!(mine_norms(&events, &NormConfig::default()).is_empty());
    assert!(mine_norms(&[], &NormConfig::default()).is_empty());
    let relaxed = NormConfig {
        min_support: 2,
        ..NormConfig::default()
    };
    assert_eq!(mine_norms(&events, &relaxed).len(), 1);
}

#[test]
fn config_and_storage() {
    assert_eq!(NormConfig::from_toml("").unwrap(), NormConfig::default());
    let c = NormConfig::from_toml("bin_width = 15\nduration_factor = 3.0").unwrap();
    assert_eq!((c.bin_width, c.min_support), (15, 3));
    assert!(NormConfig::from_toml("bin_width = 0").is_err());
    assert!(NormConfig::from_toml("bin = 3").is_err());
    assert!(NormConfig::from_toml("duration_factor = -1.0").is_err());

    let norms = mine_norms(&month_events(), &NormConfig::default());
    let text = norms_to_json_lines(&norms);
    assert_eq!(norms_from_json_lines(&text).unwrap(), norms);
    assert!(matches!(
        norms_from_json_lines("{}\n"),
        Err(NormError::Parse { line: 1, .. })
    ));
}

fn events_strategy() -> impl Strategy<Value = Vec<ActionEvent>> {
    prop::collection::vec((0i64..28 * 1440, 0u64..7200, prop::bool::weighted(0.1)), 0..120).prop_map(|raw| {
        raw.into_iter()
            .map(|(minute, duration, open_ended)| ActionEvent {
                open_ended,
                ..ActionEvent::new(DOOR_OPEN_INTERVAL, at(4, 0, 0).plus_seconds(minute * 60), duration)
            })
            .collect()
    })
}

fn config_strategy() -> impl Strategy<Value = NormConfig> {
    (
        prop::sample::select(vec![10u32, 15, 30, 60]),
        1usize..5,
        0u32..90,
        1.0f64..4.0,
    )
        .prop_map(|(bin_width, min_support, window_pad, duration_factor)| NormConfig {
            bin_width,
            min_support,
            window_pad,
            duration_factor,
        })
}

proptest! {
    #[test]
    fn mined_norms_are_supported(events in events_strategy(), config in config_strategy()) {
        for norm in mine_norms(&events, &config) {
            prop_assert!(norm.support >= config.min_support);
            prop_assert!(norm.window.0 < norm.window.1);
            prop_assert!(norm.duration_range.0 <= norm.duration_range.1);
            let members = events.iter().filter(|e| {
                !e.open_ended
                    && DayClass::of(e.start) == norm.day_class
                    && e.start.minute_of_day() >= norm.core.0
                    && e.start.minute_of_day() < norm.core.1
            });
            prop_assert_eq!(members.count(), norm.support);
        }
    }

    #[test]
    fn mining_ignores_event_order(events in events_strategy(), config in config_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = events.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(mine_norms(&events, &config), mine_norms(&shuffled, &config));
    }

    #[test]
    fn check_agrees_with_rescan(events in events_strategy(), probes in events_strategy(), config in config_strategy()) {
        let norms = mine_norms(&events, &config);
        for probe in &probes {
            let day = DayClass::of(probe.start);
            let s = probe.start.seconds_of_day();
            let mut inside = false;
            let mut acceptable = false;
            for n in &norms {
                if n.action_type == probe.action_type && n.day_class == day && n.window.0 * 60 <= s && s <= n.window.1 * 60 {
                    inside = true;
                    if probe.duration as f64 <= config.duration_factor * n.duration_range.1 as f64 {
                        acceptable = true;
                    }
                }
            }
            let got = check_violation(probe, &norms, &config).map(|v| v.kind);
            let want = if !inside {
                Some(ViolationKind::OutsideWindow)
            } else if !acceptable {
                Some(ViolationKind::ExcessiveDuration)
            } else {
                None
            };
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn lower_support_keeps_coverage(events in events_strategy(), config in config_strategy()) {
        prop_assume!(config.min_support > 1);
        let strict = mine_norms(&events, &config);
        let relaxed = mine_norms(&events, &NormConfig { min_support: config.min_support - 1, ..config });
        for norm in &strict {
            let covered = relaxed.iter().any(|r| {
                r.day_class == norm.day_class && r.window.0 <= norm.window.0 && norm.window.1 <= r.window.1
            });
            prop_assert!(covered, "{:?}", norm);
        }
    }
}
