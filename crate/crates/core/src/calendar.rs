//! Legislative period calendar.

use std::collections::BTreeMap;

use chrono::NaiveDate;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalendarError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("period {0} overlaps or precedes period {1}")]
    Overlap(u32, u32),
    #[error("period 1 must start in September 1949, starts {0}")]
    FirstPeriod(NaiveDate),
    #[error("calendar is empty")]
    Empty,
}

/// Map from legislative period to its inclusive date interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodCalendar {
    periods: BTreeMap<u32, (NaiveDate, NaiveDate)>,
}

impl PeriodCalendar {
    pub const DEFAULT_SOURCE: &'static str = include_str!("../config/periods.csv");

    /// Parses `period,start,end` rows; `#` lines and the header are skipped.
    pub fn parse(source: &str) -> Result<Self, CalendarError> {
        let mut periods = BTreeMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("period") {
                continue;
            }
            let err = |message: String| CalendarError::Parse { line: i + 1, message };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(err(format!("expected 3 columns, got {}", cols.len())));
            }
            let period: u32 = cols[0].parse().map_err(|_| err(format!("bad period {:?}", cols[0])))?;
            let date =
                |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| err(format!("bad date {s:?}: {e}")));
            let (start, end) = (date(cols[1])?, date(cols[2])?);
            if start > end {
                return Err(err(format!("period {period} ends before it starts")));
            }
            periods.insert(period, (start, end));
        }
        let calendar = Self { periods };
        calendar.check()?;
        Ok(calendar)
    }

    fn check(&self) -> Result<(), CalendarError> {
        let first = self.periods.get(&1).ok_or(CalendarError::Empty)?;
        if first.0 < NaiveDate::from_ymd_opt(1949, 9, 1).unwrap()
            || first.0 > NaiveDate::from_ymd_opt(1949, 9, 30).unwrap()
        {
            return Err(CalendarError::FirstPeriod(first.0));
        }
        let mut prev: Option<(u32, NaiveDate)> = None;
        for (&period, &(start, end)) in &self.periods {
            if let Some((p, prev_end)) = prev {
                if start <= prev_end {
                    return Err(CalendarError::Overlap(period, p));
                }
            }
            prev = Some((period, end));
        }
        Ok(())
    }

    pub fn interval(&self, period: u32) -> Option<(NaiveDate, NaiveDate)> {
        self.periods.get(&period).copied()
    }

    pub fn contains(&self, period: u32, date: NaiveDate) -> bool {
        self.interval(period).is_some_and(|(s, e)| s <= date && date <= e)
    }

    pub fn period_of(&self, date: NaiveDate) -> Option<u32> {
        self.periods
            .iter()
            .find(|(_, &(s, e))| s <= date && date <= e)
            .map(|(&p, _)| p)
    }

    pub fn periods(&self) -> impl Iterator<Item = (u32, NaiveDate, NaiveDate)> + '_ {
        self.periods.iter().map(|(&p, &(s, e))| (p, s, e))
    }
}

impl Default for PeriodCalendar {
    fn default() -> Self {
        Self::parse(Self::DEFAULT_SOURCE).expect("shipped period calendar is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn shipped_calendar_is_ordered_and_starts_1949() {
        let cal = PeriodCalendar::default();
        assert_eq!(cal.interval(1).unwrap().0, d("1949-09-07"));
        assert_eq!(cal.period_of(d("2020-10-02")), Some(19));
        assert_eq!(cal.period_of(d("2021-10-26")), Some(20));
        assert!(cal.contains(19, d("2021-10-25")));
        assert!(!cal.contains(19, d("2021-10-26")));
        assert_eq!(cal.period_of(d("1948-01-01")), None);
    }

    #[test]
    fn overlapping_periods_are_rejected() {
        let src = "1,1949-09-07,1953-10-05\n2,1953-10-01,1957-10-14\n";
        assert_eq!(PeriodCalendar::parse(src), Err(CalendarError::Overlap(2, 1)));
    }

    #[test]
    fn first_period_must_start_september_1949() {
        let src = "1,1950-01-01,1953-10-05\n";
        assert!(matches!(PeriodCalendar::parse(src), Err(CalendarError::FirstPeriod(_))));
    }
}
