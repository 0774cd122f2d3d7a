use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::fmt_float;
use crate::quarter::{Quarter, QuarterRange};

/// A quarterly series; `None` marks a gap.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    quarters: Vec<Quarter>,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    pub fn new(quarters: Vec<Quarter>, values: Vec<Option<f64>>) -> Result<Self> {
        if quarters.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: quarters.len(),
                right: values.len(),
            });
        }
        if quarters.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(
                "series quarters must be strictly increasing".into(),
            ));
        }
        Ok(TimeSeries { quarters, values })
    }

    /// Gap-free series from `(quarter, value)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Quarter, f64)>) -> Result<Self> {
        let (quarters, values): (Vec<_>, Vec<_>) =
            pairs.into_iter().map(|(q, v)| (q, Some(v))).unzip();
        Self::new(quarters, values)
    }

    pub fn quarters(&self) -> &[Quarter] {
        &self.quarters
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    pub fn get(&self, q: Quarter) -> Option<f64> {
        self.quarters
            .binary_search(&q)
            .ok()
            .and_then(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Quarter, Option<f64>)> + '_ {
        self.quarters.iter().copied().zip(self.values.iter().copied())
    }

    /// Defined values only.
    pub fn defined(&self) -> impl Iterator<Item = (Quarter, f64)> + '_ {
        self.iter().filter_map(|(q, v)| v.map(|v| (q, v)))
    }

    pub fn restrict(&self, window: &QuarterRange) -> TimeSeries {
        let (quarters, values) = self.iter().filter(|(q, _)| window.contains(*q)).unzip();
        TimeSeries { quarters, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TimeSeries {
        TimeSeries {
            quarters: self.quarters.clone(),
            values: self.values.iter().map(|v| v.map(&f)).collect(),
        }
    }

    /// Values for quarters defined in both series, in quarter order.
    pub fn align(&self, other: &TimeSeries) -> (Vec<Quarter>, Vec<f64>, Vec<f64>) {
        let mut quarters = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (q, a) in self.defined() {
            if let Some(b) = other.get(q) {
                quarters.push(q);
                left.push(a);
                right.push(b);
            }
        }
        (quarters, left, right)
    }

    /// Gap-free values, or an error naming the first gap.
    pub fn dense_values(&self) -> Result<Vec<f64>> {
        self.iter()
            .map(|(q, v)| v.ok_or_else(|| Error::GapInSeries(q.to_string())))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::parse("series csv", e);
        w.write_record(["quarter", "value"]).map_err(io)?;
        for (q, v) in self.iter() {
            let v = v.map(fmt_float).unwrap_or_default();
            w.write_record([q.to_string(), v]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::parse("series csv", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut quarters = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::parse("series csv", e))?;
            let q: Quarter = rec
                .get(0)
                .ok_or_else(|| Error::parse("series csv", "missing quarter column"))?
                .parse()?;
            let raw = rec.get(1).unwrap_or("").trim();
            let v = if raw.is_empty() {
                None
            } else {
                Some(
                    raw.parse::<f64>()
                        .map_err(|e| Error::parse("series csv value", e))?,
                )
            };
            quarters.push(q);
            values.push(v);
        }
        TimeSeries::new(quarters, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_unordered_quarters() {
        let err = TimeSeries::new(vec![q("2015Q2"), q("2015Q1")], vec![Some(0.0), None]);
        assert!(err.is_err());
        let err = TimeSeries::new(vec![q("2015Q1")], vec![]);
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn align_drops_gaps_pairwise() {
        let a = TimeSeries::new(
            vec![q("2015Q1"), q("2015Q2"), q("2015Q3")],
            vec![Some(1.0), None, Some(3.0)],
        )
        .unwrap();
        let b = TimeSeries::new(
            vec![q("2015Q1"), q("2015Q2"), q("2015Q3"), q("2015Q4")],
            vec![Some(-1.0), Some(2.0), Some(-3.0), Some(4.0)],
        )
        .unwrap();
        let (qs, x, y) = a.align(&b);
        assert_eq!(qs, vec![q("2015Q1"), q("2015Q3")]);
        assert_eq!(x, vec![1.0, 3.0]);
        assert_eq!(y, vec![-1.0, -3.0]);
        assert!(matches!(a.dense_values(), Err(Error::GapInSeries(g)) if g == "2015Q2"));
    }

    #[test]
    fn csv_round_trip_keeps_gaps() {
        let s = TimeSeries::new(
            vec![q("2015Q1"), q("2015Q2")],
            vec![Some(0.1 + 0.2), None],
        )
        .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "quarter,value\n2015Q1,0.30000000000000004\n2015Q2,\n"
        );
        assert_eq!(TimeSeries::read_csv(buf.as_slice()).unwrap(), s);
    }
}
