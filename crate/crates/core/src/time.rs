//! Second-precision UTC timestamps.
//!
//! Every timestamp in audit logs, bus messages and PROV-N text goes through
//! [`Timestamp`], which always renders as `YYYY-MM-DDTHH:MM:SSZ`.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, NaiveTime, Timelike, Utc, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimestampError {
    #[error("invalid timestamp `{0}`: expected ISO-8601 such as 2024-03-12T08:00:00Z")]
    Invalid(String),
    #[error("timestamp `{0}` has sub-second precision")]
    SubSecond(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub fn from_unix(secs: i64) -> Option<Self> {
        DateTime::<Utc>::from_timestamp(secs, 0).map(|_| Self(secs))
    }

    pub fn from_ymd_hms(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> Option<Self> {
        let date = NaiveDate::from_ymd_opt(y, mo, d)?;
        let time = NaiveTime::from_hms_opt(h, mi, s)?;
        Some(Self(NaiveDateTime::new(date, time).and_utc().timestamp()))
    }

    pub fn unix(self) -> i64 {
        self.0
    }

    fn datetime(self) -> DateTime<Utc> {
        DateTime::<Utc>::from_timestamp(self.0, 0).expect("range checked at construction")
    }

    pub fn plus_seconds(self, secs: i64) -> Self {
        Self(self.0 + secs)
    }

    /// Seconds since midnight UTC.
    pub fn seconds_of_day(self) -> u32 {
        self.datetime().num_seconds_from_midnight()
    }

    pub fn minute_of_day(self) -> u32 {
        self.seconds_of_day() / 60
    }

    pub fn is_weekend(self) -> bool {
        matches!(self.datetime().weekday(), Weekday::Sat | Weekday::Sun)
    }

    pub fn date_string(self) -> String {
        self.datetime().format("%Y-%m-%d").to_string()
    }

    pub fn hm_string(self) -> String {
        self.datetime().format("%H:%M").to_string()
    }

    pub fn hms_string(self) -> String {
        self.datetime().format("%H:%M:%S").to_string()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.datetime().format(FORMAT))
    }
}

impl FromStr for Timestamp {
    type Err = TimestampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed = DateTime::parse_from_rfc3339(s).map_err(|_| TimestampError::Invalid(s.to_string()))?;
        if parsed.timestamp_subsec_nanos() != 0 {
            return Err(TimestampError::SubSecond(s.to_string()));
        }
        Ok(Self(parsed.timestamp()))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_second_precision_utc() {
        let t: Timestamp = "2024-03-12T08:13:00Z".parse().unwrap();
        assert_eq!(t.to_string(), "2024-03-12T08:13:00Z");
        let shifted: Timestamp = "2024-03-12T09:13:00+01:00".parse().unwrap();
        assert_eq!(shifted, t);
        assert_eq!(t.minute_of_day(), 8 * 60 + 13);
    }

    #[test]
    fn rejects_fractional_and_garbage() {
        assert!(matches!(
            "2024-03-12T08:13:00.5Z".parse::<Timestamp>(),
            Err(TimestampError::SubSecond(_))
        ));
        assert!("yesterday".parse::<Timestamp>().is_err());
    }

    #[test]
    fn weekend_detection() {
        // 2024-03-16 was a Saturday.
        assert!(Timestamp::from_ymd_hms(2024, 3, 16, 10, 0, 0).unwrap().is_weekend());
        assert!(!Timestamp::from_ymd_hms(2024, 3, 15, 10, 0, 0).unwrap().is_weekend());
    }
}
