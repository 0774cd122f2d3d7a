use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A calendar quarter, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    year: i32,
    q: u8,
}

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Self> {
        if !(1..=4).contains(&q) {
            return Err(Error::Contract(format!("quarter index {q} outside 1..=4")));
        }
        Ok(Quarter { year, q })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn q(self) -> u8 {
        self.q
    }

    /// Quarter containing the given UTC epoch second.
    pub fn from_epoch(created_utc: i64) -> Result<Self> {
        let dt = DateTime::from_timestamp(created_utc, 0)
            .ok_or_else(|| Error::Contract(format!("timestamp {created_utc} out of range")))?;
        Ok(Quarter {
            year: dt.year(),
            q: ((dt.month0() / 3) + 1) as u8,
        })
    }

    pub fn succ(self) -> Self {
        if self.q == 4 {
            Quarter {
                year: self.year + 1,
                q: 1,
            }
        } else {
            Quarter {
                year: self.year,
                q: self.q + 1,
            }
        }
    }

    /// Linear index, handy for distances between quarters.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 4 + (self.q as i64 - 1)
    }
}

/// Shorthand for [`Quarter::from_epoch`].
pub fn to_quarter(created_utc: i64) -> Result<Quarter> {
    Quarter::from_epoch(created_utc)
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse("quarter", format!("`{s}` is not of the form YYYYQn"));
        let (year, q) = s.trim().split_once(['Q', 'q']).ok_or_else(bad)?;
        let year: i32 = year.parse().map_err(|_| bad())?;
        let q: u8 = q.parse().map_err(|_| bad())?;
        Quarter::new(year, q).map_err(|_| bad())
    }
}

impl Serialize for Quarter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quarter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive range of quarters, written `2014Q1:2022Q2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuarterRange {
    pub start: Quarter,
    pub end: Quarter,
}

impl QuarterRange {
    pub fn new(start: Quarter, end: Quarter) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!("window start {start} is after end {end}")));
        }
        Ok(QuarterRange { start, end })
    }

    /// 2014Q1 through 2022Q2, the 34-quarter default reporting window.
    pub fn default_window() -> Self {
        QuarterRange {
            start: Quarter { year: 2014, q: 1 },
            end: Quarter { year: 2022, q: 2 },
        }
    }

    pub fn contains(&self, q: Quarter) -> bool {
        self.start <= q && q <= self.end
    }

    pub fn len(&self) -> usize {
        (self.end.ordinal() - self.start.ordinal() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = Quarter> {
        let end = self.end;
        std::iter::successors(Some(self.start), move |q| {
            let next = q.succ();
            (next <= end).then_some(next)
        })
    }
}

impl Default for QuarterRange {
    fn default() -> Self {
        Self::default_window()
    }
}

impl FromStr for QuarterRange {
    type Err = Error;

    /// `2014Q1:2022Q2`
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once([':', '-'])
            .ok_or_else(|| Error::parse("quarter range", format!("`{s}` is not START:END")))?;
        QuarterRange::new(a.parse()?, b.parse()?)
    }
}

impl fmt::Display for QuarterRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl Serialize for QuarterRange {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuarterRange {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(y: i32, n: u8) -> Quarter {
        Quarter::new(y, n).unwrap()
    }

    #[test]
    fn epoch_mapping() {
        // 2014-02-15T00:00:00Z
        assert_eq!(to_quarter(1_392_422_400).unwrap(), q(2014, 1));
        assert_eq!(to_quarter(1_577_836_800).unwrap(), q(2020, 1));
        // 2022-06-30T23:59:59Z and one second later
        assert_eq!(to_quarter(1_656_633_599).unwrap(), q(2022, 2));
        assert_eq!(to_quarter(1_656_633_600).unwrap(), q(2022, 3));
        // 2019-12-31T23:59:59Z
        assert_eq!(to_quarter(1_577_836_799).unwrap(), q(2019, 4));
    }

    #[test]
    fn successor_and_order() {
        assert_eq!(q(2019, 4).succ(), q(2020, 1));
        assert_eq!(q(2019, 2).succ(), q(2019, 3));
        assert!(q(2019, 4) < q(2020, 1));
        assert!(q(2020, 1) < q(2020, 2));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("2014Q1".parse::<Quarter>().unwrap(), q(2014, 1));
        assert_eq!(q(2022, 2).to_string(), "2022Q2");
        assert!("2014Q5".parse::<Quarter>().is_err());
        assert!("2014".parse::<Quarter>().is_err());
    }

    #[test]
    fn default_window_has_34_quarters() {
        let w = QuarterRange::default_window();
        assert_eq!(w.len(), 34);
        assert_eq!(w.iter().count(), 34);
        assert_eq!(w.iter().last(), Some(q(2022, 2)));
        assert!("2015Q1:2014Q4".parse::<QuarterRange>().is_err());
    }
}
