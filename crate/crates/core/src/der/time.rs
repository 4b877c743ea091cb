use chrono::{DateTime, Datelike, NaiveDate, TimeZone, Timelike, Utc};

use super::{DerError, DerValue, Tag};

/// A certificate timestamp together with the ASN.1 type it is encoded as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Time {
    Utc(DateTime<Utc>),
    Generalized(DateTime<Utc>),
}

impl Time {
    /// UTCTime for years before 2050, GeneralizedTime from 2050 on.
    /// Sub-second precision is dropped.
    pub fn new(instant: DateTime<Utc>) -> Self {
        let instant = instant.with_nanosecond(0).unwrap_or(instant);
        if (1950..2050).contains(&instant.year()) {
            Time::Utc(instant)
        } else {
            Time::Generalized(instant)
        }
    }

    pub fn instant(&self) -> DateTime<Utc> {
        match *self {
            Time::Utc(t) | Time::Generalized(t) => t,
        }
    }

    pub fn to_der(&self) -> DerValue {
        match self {
            Time::Utc(t) => DerValue::primitive(
                Tag::UTC_TIME,
                t.format("%y%m%d%H%M%SZ").to_string().into_bytes(),
            ),
            Time::Generalized(t) => DerValue::primitive(
                Tag::GENERALIZED_TIME,
                t.format("%Y%m%d%H%M%SZ").to_string().into_bytes(),
            ),
        }
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        let bytes = value
            .bytes()
            .ok_or_else(|| DerError::InvalidTime("constructed time".into()))?;
        match value.tag() {
            Tag::UTC_TIME => {
                let digits = fixed_digits(bytes, 12)?;
                let yy = num(&digits[0..2]) as i32;
                let year = if yy >= 50 { 1900 + yy } else { 2000 + yy };
                Ok(Time::Utc(assemble(year, &digits[2..])?))
            }
            Tag::GENERALIZED_TIME => {
                let digits = fixed_digits(bytes, 14)?;
                let year = num(&digits[0..4]) as i32;
                Ok(Time::Generalized(assemble(year, &digits[4..])?))
            }
            other => Err(DerError::UnexpectedTag {
                expected: "UTCTime or GeneralizedTime".into(),
                found: other,
            }),
        }
    }
}

/// Checks `DDDD..DZ` with exactly `n` digits (seconds mandatory, no fractions).
fn fixed_digits(bytes: &[u8], n: usize) -> Result<&[u8], DerError> {
    if bytes.len() != n + 1 || bytes[n] != b'Z' || !bytes[..n].iter().all(u8::is_ascii_digit) {
        return Err(DerError::InvalidTime(
            String::from_utf8_lossy(bytes).into_owned(),
        ));
    }
    Ok(&bytes[..n])
}

fn num(digits: &[u8]) -> u32 {
    digits.iter().fold(0, |acc, d| acc * 10 + u32::from(d - b'0'))
}

fn assemble(year: i32, rest: &[u8]) -> Result<DateTime<Utc>, DerError> {
    let bad = || DerError::InvalidTime(String::from_utf8_lossy(rest).into_owned());
    let date = NaiveDate::from_ymd_opt(year, num(&rest[0..2]), num(&rest[2..4])).ok_or_else(bad)?;
    let dt = date
        .and_hms_opt(num(&rest[4..6]), num(&rest[6..8]), num(&rest[8..10]))
        .ok_or_else(bad)?;
    Ok(Utc.from_utc_datetime(&dt))
}
