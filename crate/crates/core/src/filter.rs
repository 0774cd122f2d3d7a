//! Keyword selection and exclusion rules for raw comment dumps.
//!
//! A comment is selected when its body mentions "basic income" (any case) or
//! a standalone, case-sensitive "UBI". Selected comments are then screened by
//! four exclusion rules, checked in a fixed order so reason tallies are
//! deterministic: Ubisoft mentions, UBI-only comments in gaming subreddits,
//! known bot authors, and anything posted before 2014.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// 2014-01-01T00:00:00Z
pub const CUTOFF_UTC: i64 = 1_388_534_400;

pub const GAMING_SUBREDDITS: [&str; 6] = [
    "Rainbow6",
    "forhonor",
    "thedivision",
    "GhostRecon",
    "Thread_crawler",
    "assassinscreed",
];

pub const BOT_AUTHORS: [&str; 8] = [
    "AutoModerator",
    "assessment_bot",
    "subredditsummarybot",
    "transcribot",
    "SnapshillBot",
    "sneakpeekbot",
    "twitterInfo_bot",
    "autowikibot",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawComment {
    pub id: String,
    #[serde(deserialize_with = "de_epoch")]
    pub created_utc: i64,
    pub author: String,
    pub subreddit: String,
    pub body: String,
}

impl RawComment {
    fn validate(&self) -> std::result::Result<(), &'static str> {
        if self.id.is_empty() {
            return Err("empty id");
        }
        if self.created_utc <= 0 {
            return Err("non-positive created_utc");
        }
        if self.subreddit.is_empty() {
            return Err("empty subreddit");
        }
        Ok(())
    }
}

/// Dumps carry `created_utc` as either a number or a numeric string.
pub(crate) fn de_epoch<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Epoch {
        Int(i64),
        Float(f64),
        Text(String),
    }
    match Epoch::deserialize(d)? {
        Epoch::Int(v) => Ok(v),
        Epoch::Float(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => Ok(v as i64),
        Epoch::Float(v) => Err(serde::de::Error::custom(format!("non-integral epoch {v}"))),
        Epoch::Text(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FilterReason {
    Kept,
    NoKeyword,
    UbisoftPhrase,
    GamingSubredditUbiOnly,
    BotAuthor,
    BeforeCutoff,
}

impl FilterReason {
    pub const ALL: [FilterReason; 6] = [
        FilterReason::Kept,
        FilterReason::NoKeyword,
        FilterReason::UbisoftPhrase,
        FilterReason::GamingSubredditUbiOnly,
        FilterReason::BotAuthor,
        FilterReason::BeforeCutoff,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterDecision {
    pub kept: bool,
    pub reason: FilterReason,
}

impl FilterDecision {
    fn of(reason: FilterReason) -> Self {
        FilterDecision {
            kept: reason == FilterReason::Kept,
            reason,
        }
    }
}

/// Per-reason tallies, plus records that could not be parsed at all.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub counts: BTreeMap<FilterReason, u64>,
    #[serde(rename = "MalformedInput")]
    pub malformed: u64,
    pub total: u64,
}

impl FilterStats {
    pub fn new() -> Self {
        FilterStats {
            counts: FilterReason::ALL.iter().map(|r| (*r, 0)).collect(),
            malformed: 0,
            total: 0,
        }
    }

    pub fn count(&self, reason: FilterReason) -> u64 {
        self.counts.get(&reason).copied().unwrap_or(0)
    }

    fn record(&mut self, reason: FilterReason) {
        *self.counts.entry(reason).or_insert(0) += 1;
        self.total += 1;
    }

    fn record_malformed(&mut self) {
        self.malformed += 1;
        self.total += 1;
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self).map_err(|e| Error::parse("filter stats", e))
    }
}

fn is_alnum(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_ascii_alphanumeric())
}

/// ASCII case-insensitive substring search.
fn contains_ignore_case(haystack: &str, needle: &str) -> bool {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    n.is_empty() || h.windows(n.len()).any(|w| w.eq_ignore_ascii_case(n))
}

fn has_basic_income(body: &str) -> bool {
    contains_ignore_case(body, "basic income")
}

/// True when some "UBI" in `body` is not glued to an ASCII letter or digit.
pub fn has_standalone_ubi(body: &str) -> bool {
    body.match_indices("UBI").any(|(start, m)| {
        let before = body[..start].chars().next_back();
        let after = body[start + m.len()..].chars().next();
        !is_alnum(before) && !is_alnum(after)
    })
}

pub fn match_keywords(body: &str) -> bool {
    has_basic_income(body) || has_standalone_ubi(body)
}

fn strip_prefix<'a>(name: &'a str, prefix: &str) -> &'a str {
    name.strip_prefix(prefix).unwrap_or(name)
}

/// Exclusion rules for a comment that already matched the keywords.
pub fn apply_exclusions(comment: &RawComment) -> FilterDecision {
    let subreddit = strip_prefix(&comment.subreddit, "r/");
    let author = strip_prefix(&comment.author, "u/");
    let reason = if contains_ignore_case(&comment.body, "ubisoft") {
        FilterReason::UbisoftPhrase
    } else if GAMING_SUBREDDITS.contains(&subreddit) && !has_basic_income(&comment.body) {
        FilterReason::GamingSubredditUbiOnly
    } else if BOT_AUTHORS.contains(&author) {
        FilterReason::BotAuthor
    } else if comment.created_utc < CUTOFF_UTC {
        FilterReason::BeforeCutoff
    } else {
        FilterReason::Kept
    };
    FilterDecision::of(reason)
}

/// Keyword match followed by exclusions.
pub fn decide(comment: &RawComment) -> FilterDecision {
    if match_keywords(&comment.body) {
        apply_exclusions(comment)
    } else {
        FilterDecision::of(FilterReason::NoKeyword)
    }
}

/// Filters already-parsed comments, preserving order.
pub fn filter_stream<I>(comments: I) -> (Vec<RawComment>, FilterStats)
where
    I: IntoIterator<Item = RawComment>,
{
    let mut stats = FilterStats::new();
    let mut kept = Vec::new();
    for c in comments {
        if c.validate().is_err() {
            stats.record_malformed();
            continue;
        }
        let d = decide(&c);
        stats.record(d.reason);
        if d.kept {
            kept.push(c);
        }
    }
    (kept, stats)
}

/// Parses one dump line. `Err` means the record is malformed.
pub fn parse_line(line: &str) -> std::result::Result<RawComment, String> {
    let c: RawComment = serde_json::from_str(line).map_err(|e| e.to_string())?;
    c.validate().map_err(str::to_string)?;
    Ok(c)
}

/// Streaming filter over newline-delimited JSON. Kept records are copied
/// through verbatim so fields beyond the five the rules read survive.
pub fn filter_jsonl<R: BufRead, W: Write>(input: R, mut output: W) -> Result<FilterStats> {
    let mut stats = FilterStats::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match parse_line(trimmed) {
            Ok(c) => {
                let d = decide(&c);
                stats.record(d.reason);
                if d.kept {
                    writeln!(output, "{trimmed}").map_err(|e| Error::io("<output>", e))?;
                }
            }
            Err(_) => stats.record_malformed(),
        }
    }
    output.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comment(body: &str, subreddit: &str, author: &str, created_utc: i64) -> RawComment {
        RawComment {
            id: "x".into(),
            created_utc,
            author: author.into(),
            subreddit: subreddit.into(),
            body: body.into(),
        }
    }

    const T2018: i64 = 1_530_000_000;

    /// Independent scan: every "UBI" must have a non-alphanumeric (or no)
    /// neighbour on both sides, checked by walking characters.
    fn ubi_oracle(body: &str) -> bool {
        let chars: Vec<char> = body.chars().collect();
        (0..chars.len().saturating_sub(2)).any(|i| {
            chars[i] == 'U'
                && chars[i + 1] == 'B'
                && chars[i + 2] == 'I'
                && (i == 0 || !chars[i - 1].is_ascii_alphanumeric())
                && (i + 3 == chars.len() || !chars[i + 3].is_ascii_alphanumeric())
        })
    }

    #[test]
    fn keyword_examples() {
        assert!(match_keywords("I support Basic Income today"));
        assert!(!match_keywords("RUBIN said so"));
        assert!(!ubi_oracle("RUBIN said so"));
        assert!(match_keywords("UBI: yes please"));
        assert!(ubi_oracle("UBI: yes please"));
        assert!(!match_keywords("I bought ubi stock"));
    }

    #[test]
    fn boundary_cases() {
        assert!(match_keywords("UBI"));
        assert!(match_keywords("we need UBI"));
        assert!(match_keywords("(UBI)"));
        assert!(match_keywords("UBIs? no: UBI."));
        assert!(!match_keywords("UBIs are great"));
        assert!(!match_keywords("xUBI"));
        assert!(!match_keywords("UBI2"));
        assert!(match_keywords("é UBI é"));
        assert!(match_keywords("éUBIé"));
        assert!(match_keywords("BASIC INCOME"));
        assert!(match_keywords("basic incomes"));
        assert!(!match_keywords("basic  income"));
    }

    #[test]
    fn exclusion_examples() {
        let d = apply_exclusions(&comment("UBI in Ubisoft games", "technology", "a", T2018));
        assert_eq!(d, FilterDecision { kept: false, reason: FilterReason::UbisoftPhrase });
        let d = apply_exclusions(&comment("UBI nerf when", "Rainbow6", "a", T2018));
        assert_eq!(d.reason, FilterReason::GamingSubredditUbiOnly);
        let d = apply_exclusions(&comment("basic income rocks", "Rainbow6", "a", T2018));
        assert_eq!(d, FilterDecision { kept: true, reason: FilterReason::Kept });
        let d = apply_exclusions(&comment("UBI thread", "politics", "AutoModerator", T2018));
        assert_eq!(d.reason, FilterReason::BotAuthor);
    }

    #[test]
    fn exclusion_order_and_prefixes() {
        // Ubisoft wins over everything else
        let d = apply_exclusions(&comment("ubisoft UBI", "r/Rainbow6", "u/AutoModerator", 1));
        assert_eq!(d.reason, FilterReason::UbisoftPhrase);
        let d = apply_exclusions(&comment("UBI", "r/forhonor", "AutoModerator", 1));
        assert_eq!(d.reason, FilterReason::GamingSubredditUbiOnly);
        let d = apply_exclusions(&comment("UBI", "politics", "u/sneakpeekbot", 1));
        assert_eq!(d.reason, FilterReason::BotAuthor);
        let d = apply_exclusions(&comment("UBI", "politics", "someone", CUTOFF_UTC - 1));
        assert_eq!(d.reason, FilterReason::BeforeCutoff);
        let d = apply_exclusions(&comment("UBI", "politics", "someone", CUTOFF_UTC));
        assert_eq!(d.reason, FilterReason::Kept);
        // names compare case-sensitively
        let d = apply_exclusions(&comment("UBI", "rainbow6", "automoderator", T2018));
        assert_eq!(d.reason, FilterReason::Kept);
    }

    #[test]
    fn stream_counts() {
        let (kept, stats) = filter_stream(Vec::new());
        assert!(kept.is_empty());
        assert_eq!(stats.total, 0);
        assert!(stats.counts.values().all(|&c| c == 0));

        let input = vec![
            comment("nothing here", "a", "x", T2018),
            comment("we need UBI now", "a", "x", T2018),
            comment("RUBIN", "a", "x", T2018),
        ];
        let (kept, stats) = filter_stream(input.clone());
        assert_eq!(kept, vec![input[1].clone()]);
        assert_eq!(stats.count(FilterReason::Kept), 1);
        assert_eq!(stats.count(FilterReason::NoKeyword), 2);
        let (again, _) = filter_stream(kept.clone());
        assert_eq!(again, kept);
    }

    #[test]
    fn jsonl_skips_malformed_and_keeps_extra_fields() {
        let input = concat!(
            r#"{"id":"1","created_utc":1530000000,"author":"a","subreddit":"s","body":"UBI!","stance":"supportive"}"#,
            "\n",
            "not json\n",
            r#"{"id":"","created_utc":1530000000,"author":"a","subreddit":"s","body":"UBI"}"#,
            "\n",
            r#"{"id":"2","created_utc":"1530000000","author":"a","subreddit":"s","body":"no"}"#,
            "\n\n",
        );
        let mut out = Vec::new();
        let stats = filter_jsonl(input.as_bytes(), &mut out).unwrap();
        assert_eq!(stats.malformed, 2);
        assert_eq!(stats.count(FilterReason::Kept), 1);
        assert_eq!(stats.count(FilterReason::NoKeyword), 1);
        assert_eq!(stats.total, 4);
        let out = String::from_utf8(out).unwrap();
        assert!(out.contains("\"stance\":\"supportive\""));
        assert_eq!(out.lines().count(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn body() -> impl Strategy<Value = String> {
            proptest::collection::vec(
                prop_oneof![
                    Just("UBI".to_string()),
                    Just("basic income".to_string()),
                    Just("Ubisoft".to_string()),
                    "[a-zA-Z0-9 .:!é]{0,4}",
                ],
                0..6,
            )
            .prop_map(|parts| parts.concat())
        }

        fn raw() -> impl Strategy<Value = RawComment> {
            (
                body(),
                prop_oneof![Just("politics"), Just("Rainbow6"), Just("r/GhostRecon")],
                prop_oneof![Just("alice"), Just("AutoModerator"), Just("u/autowikibot")],
                prop_oneof![Just(1_300_000_000i64), Just(1_500_000_000i64)],
            )
                .prop_map(|(body, s, a, t)| comment(&body, s, a, t))
        }

        proptest! {
            #[test]
            fn ubi_rule_matches_oracle(b in body()) {
                prop_assert_eq!(has_standalone_ubi(&b), ubi_oracle(&b));
            }

            #[test]
            fn filter_is_idempotent_and_sound(input in proptest::collection::vec(raw(), 0..20)) {
                let (kept, stats) = filter_stream(input.clone());
                prop_assert_eq!(stats.total as usize, input.len());
                prop_assert_eq!(stats.counts.values().sum::<u64>() + stats.malformed, stats.total);
                for k in &kept {
                    prop_assert!(match_keywords(&k.body));
                }
                // kept is a subsequence of input
                let mut it = input.iter();
                for k in &kept {
                    prop_assert!(it.any(|c| c == k));
                }
                let (again, _) = filter_stream(kept.clone());
                prop_assert_eq!(again, kept);
            }

            #[test]
            fn glued_ubi_never_matches(prefix in "[a-zA-Z0-9]{1,3}", suffix in "[a-zA-Z0-9]{1,3}") {
                let b = format!("{prefix}UBI{suffix}");
                prop_assert!(!has_standalone_ubi(&b));
            }
        }
    }
}
