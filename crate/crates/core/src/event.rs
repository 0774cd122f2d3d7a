use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quarter::Quarter;

/// Stance label with its −1/0/+1 score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Against,
    Neutral,
    Supportive,
}

impl Stance {
    pub fn score(self) -> i64 {
        match self {
            Stance::Against => -1,
            Stance::Neutral => 0,
            Stance::Supportive => 1,
        }
    }
}

pub const DELETED_AUTHOR: &str = "[deleted]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cohort {
    Year(i32),
    Unknown,
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cohort::Year(y) => write!(f, "{y}"),
            Cohort::Unknown => f.write_str("Unknown"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohortSource {
    FirstActivity,
    DatasetFallback,
    MissingAuthor,
}

/// One labeled comment, ready for aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct CommentEvent {
    pub id: String,
    pub quarter: Quarter,
    pub author: String,
    pub community: String,
    pub stance: Stance,
    pub topics: BTreeSet<String>,
    pub cohort: Option<Cohort>,
    pub cohort_source: Option<CohortSource>,
}

impl CommentEvent {
    pub fn new(
        id: impl Into<String>,
        quarter: Quarter,
        author: impl Into<String>,
        community: impl Into<String>,
        stance: Stance,
        topics: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        CommentEvent {
            id: id.into(),
            quarter,
            author: author.into(),
            community: community.into(),
            stance,
            topics: topics.into_iter().map(Into::into).collect(),
            cohort: None,
            cohort_source: None,
        }
    }
}

/// Wire form of a labeled comment (newline-delimited JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub id: String,
    #[serde(deserialize_with = "crate::filter::de_epoch")]
    pub created_utc: i64,
    pub author: String,
    pub subreddit: String,
    pub stance: Stance,
    #[serde(default)]
    pub topics: Vec<String>,
}

impl LabeledRecord {
    pub fn into_event(self) -> Result<CommentEvent> {
        if self.created_utc <= 0 {
            return Err(Error::Contract(format!(
                "record {}: created_utc must be positive",
                self.id
            )));
        }
        let quarter = Quarter::from_epoch(self.created_utc)?;
        let community = self
            .subreddit
            .strip_prefix("r/")
            .unwrap_or(&self.subreddit)
            .to_string();
        Ok(CommentEvent::new(
            self.id,
            quarter,
            self.author,
            community,
            self.stance,
            self.topics,
        ))
    }
}

/// Reads labeled events; any malformed line is a contract violation.
pub fn read_labeled_jsonl<R: BufRead>(reader: R) -> Result<Vec<CommentEvent>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<labeled events>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LabeledRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(format!("labeled event on line {}", i + 1), e))?;
        out.push(rec.into_event()?);
    }
    Ok(out)
}

fn is_missing_author(author: &str) -> bool {
    let a = author.trim();
    a.is_empty() || a == DELETED_AUTHOR
}

/// Sets each event's cohort to its author's first-activity year, falling
/// back to the author's earliest year in `events` when no mapping entry
/// exists.
pub fn assign_cohorts(events: &mut [CommentEvent], first_activity: Option<&HashMap<String, i32>>) {
    let mut earliest: HashMap<&str, i32> = HashMap::new();
    for e in events.iter() {
        let y = e.quarter.year();
        earliest
            .entry(e.author.as_str())
            .and_modify(|m| *m = (*m).min(y))
            .or_insert(y);
    }
    let resolved: Vec<(Cohort, CohortSource)> = events
        .iter()
        .map(|e| {
            if is_missing_author(&e.author) {
                return (Cohort::Unknown, CohortSource::MissingAuthor);
            }
            match first_activity.and_then(|m| m.get(&e.author)) {
                Some(&y) => (Cohort::Year(y), CohortSource::FirstActivity),
                None => (
                    Cohort::Year(earliest[e.author.as_str()]),
                    CohortSource::DatasetFallback,
                ),
            }
        })
        .collect();
    for (e, (cohort, source)) in events.iter_mut().zip(resolved) {
        e.cohort = Some(cohort);
        e.cohort_source = Some(source);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(author: &str, year: i32) -> CommentEvent {
        CommentEvent::new(
            "id",
            Quarter::new(year, 2).unwrap(),
            author,
            "c",
            Stance::Neutral,
            Vec::<String>::new(),
        )
    }

    #[test]
    fn scores() {
        assert_eq!(Stance::Against.score(), -1);
        assert_eq!(Stance::Neutral.score(), 0);
        assert_eq!(Stance::Supportive.score(), 1);
    }

    #[test]
    fn cohort_from_mapping_fallback_and_deleted() {
        let mut events = vec![ev("mapped", 2018), ev("free", 2019), ev("free", 2016), ev(DELETED_AUTHOR, 2020)];
        let map: HashMap<String, i32> = [("mapped".to_string(), 2012)].into();
        assign_cohorts(&mut events, Some(&map));
        assert_eq!(events[0].cohort, Some(Cohort::Year(2012)));
        assert_eq!(events[0].cohort_source, Some(CohortSource::FirstActivity));
        assert_eq!(events[1].cohort, Some(Cohort::Year(2016)));
        assert_eq!(events[1].cohort_source, Some(CohortSource::DatasetFallback));
        assert_eq!(events[2].cohort, Some(Cohort::Year(2016)));
        assert_eq!(events[3].cohort, Some(Cohort::Unknown));
    }

    #[test]
    fn fallback_never_after_event_year() {
        let mut events: Vec<_> = (0..30).map(|i| ev(["a", "b", "c"][i % 3], 2014 + (i as i32 * 7) % 9)).collect();
        assign_cohorts(&mut events, None);
        for e in &events {
            if let Some(Cohort::Year(y)) = e.cohort {
                assert!(y <= e.quarter.year());
            }
        }
    }

    #[test]
    fn labeled_record_parses() {
        let line = r#"{"id":"a","created_utc":1577836800,"author":"x","subreddit":"r/Futurology","stance":"against","topics":["Automation"]}"#;
        let events = read_labeled_jsonl(line.as_bytes()).unwrap();
        assert_eq!(events[0].quarter.to_string(), "2020Q1");
        assert_eq!(events[0].community, "Futurology");
        assert_eq!(events[0].stance, Stance::Against);
        let bad = r#"{"id":"a","created_utc":1,"author":"x","subreddit":"s","stance":"meh"}"#;
        assert!(read_labeled_jsonl(bad.as_bytes()).is_err());
    }
}
