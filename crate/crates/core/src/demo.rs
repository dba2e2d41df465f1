//! Bundled scenarios and the synthetic garage-door month.

use std::fmt::Write as _;

use crate::sim::UserProfiles;
use crate::time::Timestamp;

pub const DEMO_USER: &str = "alice";

pub const WEATHER_SCENARIO: &str = include_str!("../scenarios/weather.scenario");
pub const MIXED_SCENARIO: &str = include_str!("../scenarios/mixed.scenario");
pub const GARAGE_SCENARIO: &str = include_str!("../scenarios/garage-4w.scenario");
pub const GARAGE_ANOMALIES_SCENARIO: &str = include_str!("../scenarios/garage-anomalies.scenario");

/// `(file name, contents)` of every bundled scenario.
pub const BUNDLED_SCENARIOS: [(&str, &str); 4] = [
    ("weather.scenario", WEATHER_SCENARIO),
    ("mixed.scenario", MIXED_SCENARIO),
    ("garage-4w.scenario", GARAGE_SCENARIO),
    ("garage-anomalies.scenario", GARAGE_ANOMALIES_SCENARIO),
];

/// The profile the REPL starts with.
pub fn demo_profiles() -> UserProfiles {
    let mut profiles = UserProfiles::new();
    for (kind, value) in [
        ("geo-location", "51.5128,-0.1168"),
        ("name", "Alice"),
        ("email", "alice@example.org"),
    ] {
        profiles.set(DEMO_USER, kind, value).expect("valid demo profile");
    }
    profiles
}

/// Weekdays (by index within the month) when the owner leaves early, and
/// the hour they leave.
const TRAVEL_DAYS: [(u32, u32); 6] = [(2, 5), (6, 6), (9, 5), (12, 6), (15, 5), (18, 6)];

/// Four weeks of garage use, Monday 2024-03-04 to Sunday 2024-03-31:
///
/// - weekdays: open around 08:00 and around 18:00 for 2 to 5 minutes;
/// - six weekdays leave at 05:0x or 06:0x instead of 08:00;
/// - weekends: open every hour from 09:00 or 09:30 until the evening, for
///   30 to 55 minutes each time.
pub fn garage_month() -> String {
    let mut out = String::from(
        "# Four weeks of garage door use, 2024-03-04 to 2024-03-31.\n\
         # Generated by provaud_core::demo::garage_month.\n\
         @skill garage-door-skill\n\
         @datapoint alice geo-location 51.5128,-0.1168\n",
    );
    let mut push = |open: Timestamp, minutes: u32| {
        let close = open.plus_seconds(i64::from(minutes) * 60);
        writeln!(out, "{open} | {DEMO_USER} | Open the garage door").unwrap();
        writeln!(out, "{close} | {DEMO_USER} | Close the garage door").unwrap();
    };
    let at = |day: u32, minute_of_day: u32| {
        Timestamp::from_ymd_hms(2024, 3, day, minute_of_day / 60, minute_of_day % 60, 0).expect("March date")
    };
    let mut weekday = 0;
    let mut weekend = 0;
    for day in 4..=31 {
        if at(day, 0).is_weekend() {
            let first = if weekend % 2 == 0 { 9 * 60 } else { 9 * 60 + 30 };
            for k in 0..13 {
                push(at(day, first + k * 60), 30 + (weekend * 5 + k * 7) % 26);
            }
            weekend += 1;
            continue;
        }
        let w = weekday;
        let morning = match TRAVEL_DAYS.iter().find(|(d, _)| *d == w) {
            Some((_, hour)) => hour * 60 + w % 8,
            None => 7 * 60 + 50 + (w * 13) % 21,
        };
        push(at(day, morning), 2 + w % 4);
        push(at(day, 17 * 60 + 50 + (w * 11) % 21), 2 + (w + 1) % 4);
        weekday += 1;
    }
    out
}
