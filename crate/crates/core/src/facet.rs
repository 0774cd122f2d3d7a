use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Cohort, CommentEvent};

/// Weights are accumulated as integer multiples of `1 / WEIGHT_UNITS` so that
/// aggregation is exact and independent of event order. 144 is divisible by
/// every product of two topic counts in `1..=4`.
pub const WEIGHT_UNITS: u64 = 144;

pub const MAX_TOPICS: usize = 4;
pub const NONE_GROUP: &str = "None";
pub const UNKNOWN_GROUP: &str = "Unknown";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicWeighting {
    /// An event with k topics adds 1/k to each.
    #[default]
    Fractional,
    /// An event adds 1 to every topic it carries.
    Occurrence,
}

/// Community-to-quintile assignment along one social dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFacet {
    pub name: String,
    pub bins: HashMap<String, u8>,
    pub labels: [String; 5],
}

impl DimensionFacet {
    pub fn bin_of(&self, community: &str) -> Option<u8> {
        let c = community.strip_prefix("r/").unwrap_or(community);
        self.bins.get(c).copied()
    }

    pub fn label_of(&self, community: &str) -> &str {
        match self.bin_of(community) {
            Some(b) => &self.labels[b as usize],
            None => UNKNOWN_GROUP,
        }
    }
}

/// A way of partitioning events into groups.
#[derive(Debug, Clone, PartialEq)]
pub enum Facet {
    Topic,
    Cohort,
    Dimension(DimensionFacet),
    /// Cross-product of two facets, e.g. one topic within one cohort.
    Cross(Box<Facet>, Box<Facet>),
}

/// Orders groups within a panel: natural order first, catch-all groups last.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct GroupKey(Vec<(i64, String)>);

#[derive(Debug, Clone)]
pub(crate) struct Membership {
    pub key: GroupKey,
    pub label: String,
    pub units: u64,
}

impl Facet {
    pub fn name(&self) -> String {
        match self {
            Facet::Topic => "topic".into(),
            Facet::Cohort => "cohort".into(),
            Facet::Dimension(d) => d.name.clone(),
            Facet::Cross(a, b) => format!("{}x{}", a.name(), b.name()),
        }
    }

    pub(crate) fn memberships(
        &self,
        event: &CommentEvent,
        weighting: TopicWeighting,
    ) -> Result<Vec<Membership>> {
        let single = |key: (i64, String), label: String| {
            vec![Membership {
                key: GroupKey(vec![key]),
                label,
                units: WEIGHT_UNITS,
            }]
        };
        Ok(match self {
            Facet::Topic => {
                let k = event.topics.len();
                if k > MAX_TOPICS {
                    return Err(Error::Contract(format!(
                        "event {} carries {k} topics; at most {MAX_TOPICS} are allowed",
                        event.id
                    )));
                }
                if k == 0 {
                    single((1, NONE_GROUP.into()), NONE_GROUP.into())
                } else {
                    let units = match weighting {
                        TopicWeighting::Fractional => WEIGHT_UNITS / k as u64,
                        TopicWeighting::Occurrence => WEIGHT_UNITS,
                    };
                    event
                        .topics
                        .iter()
                        .map(|t| Membership {
                            key: GroupKey(vec![(0, t.clone())]),
                            label: t.clone(),
                            units,
                        })
                        .collect()
                }
            }
            Facet::Cohort => match event.cohort {
                Some(Cohort::Year(y)) => single((y as i64, String::new()), y.to_string()),
                Some(Cohort::Unknown) => single((i64::MAX, String::new()), UNKNOWN_GROUP.into()),
                None => {
                    return Err(Error::Contract(format!(
                        "event {} has no cohort assigned; run cohort assignment first",
                        event.id
                    )))
                }
            },
            Facet::Dimension(d) => match d.bin_of(&event.community) {
                Some(b) => single((b as i64, String::new()), d.labels[b as usize].clone()),
                None => single((i64::MAX, String::new()), UNKNOWN_GROUP.into()),
            },
            Facet::Cross(a, b) => {
                let left = a.memberships(event, weighting)?;
                let right = b.memberships(event, weighting)?;
                let mut out = Vec::with_capacity(left.len() * right.len());
                for l in &left {
                    for r in &right {
                        let product = l.units * r.units;
                        if product % WEIGHT_UNITS != 0 {
                            return Err(Error::Contract(format!(
                                "cross-facet weight for event {} is not representable",
                                event.id
                            )));
                        }
                        let mut key = l.key.0.clone();
                        key.extend(r.key.0.iter().cloned());
                        out.push(Membership {
                            key: GroupKey(key),
                            label: format!("{} | {}", l.label, r.label),
                            units: product / WEIGHT_UNITS,
                        });
                    }
                }
                out
            }
        })
    }
}
