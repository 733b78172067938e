use std::fmt::Write;

use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc};

fn digits(bytes: &[u8]) -> Option<u32> {
    bytes.iter().try_fold(0u32, |acc, b| {
        b.is_ascii_digit().then(|| acc * 10 + u32::from(b - b'0'))
    })
}

/// Parses an ISO-8601 instant. `YYYY-MM-DDTHH:MM:SSZ` takes a fast path; any
/// other RFC 3339 form is accepted and truncated to whole seconds.
pub fn parse_instant(raw: &str) -> Option<DateTime<Utc>> {
    let b = raw.as_bytes();
    if b.len() == 20
        && b[4] == b'-'
        && b[7] == b'-'
        && b[10] == b'T'
        && b[13] == b':'
        && b[16] == b':'
        && b[19] == b'Z'
    {
        let date = NaiveDate::from_ymd_opt(
            digits(&b[0..4])? as i32,
            digits(&b[5..7])?,
            digits(&b[8..10])?,
        )?;
        let time = date.and_hms_opt(
            digits(&b[11..13])?,
            digits(&b[14..16])?,
            digits(&b[17..19])?,
        )?;
        return Some(time.and_utc());
    }
    let parsed = DateTime::parse_from_rfc3339(raw).ok()?.with_timezone(&Utc);
    parsed.with_nanosecond(0)
}

pub fn write_instant(out: &mut String, t: DateTime<Utc>) {
    let _ = write!(
        out,
        "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z",
        t.year(),
        t.month(),
        t.day(),
        t.hour(),
        t.minute(),
        t.second()
    );
}

pub fn format_instant(t: DateTime<Utc>) -> String {
    let mut s = String::with_capacity(20);
    write_instant(&mut s, t);
    s
}

pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").ok()
}
