//! Local-day and scoring-window arithmetic.
//!
//! A participant's day runs from local midnight to the next local midnight in
//! their own timezone. The day is cut into consecutive windows of the
//! configured length starting at local midnight, so an ordinary day has 48
//! half-hour windows, a spring-forward day 46 and a fall-back day 50.

use chrono::{DateTime, Duration, LocalResult, NaiveDate, NaiveTime, TimeZone, Utc};
use chrono_tz::Tz;

use crate::error::Error;

pub fn parse_timezone(name: &str) -> Result<Tz, Error> {
    name.parse::<Tz>()
        .map_err(|_| Error::InvalidTimezone(name.to_owned()))
}

/// First instant of `date` on the local clock of `tz`.
///
/// When midnight itself is skipped by a transition the day begins at the
/// first wall-clock minute that exists.
pub fn local_day_start(date: NaiveDate, tz: Tz) -> DateTime<Utc> {
    let mut wall = date.and_time(NaiveTime::MIN);
    loop {
        match tz.from_local_datetime(&wall) {
            LocalResult::Single(t) => return t.with_timezone(&Utc),
            LocalResult::Ambiguous(earliest, _) => return earliest.with_timezone(&Utc),
            LocalResult::None => wall += Duration::minutes(1),
        }
    }
}

/// Calendar date of an instant on the local clock of `tz`.
pub fn local_date(instant: DateTime<Utc>, tz: Tz) -> NaiveDate {
    instant.with_timezone(&tz).date_naive()
}

pub fn is_weekday(date: NaiveDate) -> bool {
    use chrono::{Datelike, Weekday};
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Half-open interval `[start, end)` of absolute time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Window {
    pub fn contains(&self, instant: DateTime<Utc>) -> bool {
        self.start <= instant && instant < self.end
    }

    pub fn duration(&self) -> Duration {
        self.end - self.start
    }
}

/// The partition of one local day into scoring windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayWindows {
    date: NaiveDate,
    timezone: Tz,
    window_length: Duration,
    windows: Vec<Window>,
}

impl DayWindows {
    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn timezone(&self) -> Tz {
        self.timezone
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn count(&self) -> usize {
        self.windows.len()
    }

    pub fn day_start(&self) -> DateTime<Utc> {
        self.windows[0].start
    }

    pub fn day_end(&self) -> DateTime<Utc> {
        self.windows[self.windows.len() - 1].end
    }

    /// Index of the window holding `instant`, if it falls on this day.
    pub fn index_of(&self, instant: DateTime<Utc>) -> Option<usize> {
        if instant < self.day_start() || instant >= self.day_end() {
            return None;
        }
        let offset = (instant - self.day_start()).num_seconds();
        Some((offset / self.window_length.num_seconds()) as usize)
    }
}

/// Half-hour windows for `date` in `tz`.
pub fn day_windows(date: NaiveDate, tz: Tz) -> DayWindows {
    day_windows_with(date, tz, Duration::minutes(30))
}

/// Windows of `window_length` for `date` in `tz`. The final window is
/// truncated at the day's end if the local day length is not a multiple of
/// the window length.
pub fn day_windows_with(date: NaiveDate, tz: Tz, window_length: Duration) -> DayWindows {
    assert!(window_length > Duration::zero());
    let start = local_day_start(date, tz);
    let end = local_day_start(date.succ_opt().expect("date in range"), tz);
    let mut windows = Vec::with_capacity(50);
    let mut cursor = start;
    while cursor < end {
        let next = (cursor + window_length).min(end);
        windows.push(Window {
            start: cursor,
            end: next,
        });
        cursor = next;
    }
    DayWindows {
        date,
        timezone: tz,
        window_length,
        windows,
    }
}
