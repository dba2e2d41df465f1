//! Coarsening of times and coordinates before they are shown to anyone.

use thiserror::Error;

use crate::time::Timestamp;

const HALF_HOUR: i64 = 1800;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneralizeError {
    #[error("coordinate out of range: {0}")]
    OutOfRange(String),
    #[error("not a coordinate pair: {0}")]
    Malformed(String),
}

/// Nearest half hour; exactly quarter past or quarter to rounds down.
pub fn generalize_time(t: Timestamp) -> Timestamp {
    let rem = t.unix().rem_euclid(HALF_HOUR);
    if rem <= HALF_HOUR / 2 {
        t.plus_seconds(-rem)
    } else {
        t.plus_seconds(HALF_HOUR - rem)
    }
}

/// Rounds the decimal text of `x` to one place, half away from zero.
/// Working on the digits avoids binary artefacts such as 0.15 -> 0.1.
fn round_one_place(x: f64) -> String {
    let text = format!("{}", x.abs());
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits: Vec<u8> = frac.bytes().map(|b| b - b'0').collect();
    let first = digits.first().copied().unwrap_or(0) as u64;
    let up = digits.get(1).is_some_and(|&d| d >= 5);
    let mut tenths = int.parse::<u64>().expect("finite decimal") * 10 + first;
    if up {
        tenths += 1;
    }
    let sign = if x.is_sign_negative() && tenths != 0 { "-" } else { "" };
    format!("{sign}{}.{}", tenths / 10, tenths % 10)
}

fn check(lat: f64, lon: f64) -> Result<(), GeneralizeError> {
    if !lat.is_finite() || !lon.is_finite() || lat.abs() > 90.0 || lon.abs() > 180.0 {
        return Err(GeneralizeError::OutOfRange(format!("{lat},{lon}")));
    }
    Ok(())
}

/// Both coordinates to one decimal place (about 11 km).
pub fn generalize_location(lat: f64, lon: f64) -> Result<(f64, f64), GeneralizeError> {
    check(lat, lon)?;
    let parse = |s: String| s.parse::<f64>().expect("rounded text parses");
    Ok((parse(round_one_place(lat)), parse(round_one_place(lon))))
}

/// `"51.5128,-0.1168"` becomes `"51.5,-0.1"`.
pub fn generalize_location_text(text: &str) -> Result<String, GeneralizeError> {
    let malformed = || GeneralizeError::Malformed(text.to_string());
    let (lat, lon) = text.split_once(',').ok_or_else(malformed)?;
    let lat: f64 = lat.trim().parse().map_err(|_| malformed())?;
    let lon: f64 = lon.trim().parse().map_err(|_| malformed())?;
    check(lat, lon)?;
    Ok(format!("{},{}", round_one_place(lat), round_one_place(lon)))
}
