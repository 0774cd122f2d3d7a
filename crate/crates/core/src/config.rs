use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::counterfactual::RankMetric;
use crate::dims::{DimensionSpec, SgnsParams};
use crate::error::{Error, Result};
use crate::facet::TopicWeighting;
use crate::panel::AvgMode;
use crate::quarter::QuarterRange;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "STANCEDRIFT_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FacetSelector {
    Topic,
    Cohort,
    Dimension(String),
}

impl FacetSelector {
    /// Name used for artifact files.
    pub fn slug(&self) -> &str {
        match self {
            FacetSelector::Topic => "topic",
            FacetSelector::Cohort => "cohort",
            FacetSelector::Dimension(name) => name,
        }
    }

    /// Capitalized name for report tables, e.g. `Partisan`.
    pub fn title(&self) -> String {
        let slug = match self {
            FacetSelector::Topic => "subtopic",
            other => other.slug(),
        };
        let mut chars = slug.chars();
        match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    }
}

impl fmt::Display for FacetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FacetSelector::Topic => f.write_str("topic"),
            FacetSelector::Cohort => f.write_str("cohort"),
            FacetSelector::Dimension(n) => write!(f, "dimension:{n}"),
        }
    }
}

impl FromStr for FacetSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topic" => Ok(FacetSelector::Topic),
            "cohort" => Ok(FacetSelector::Cohort),
            _ => match s.strip_prefix("dimension:") {
                Some(name) if !name.is_empty() => Ok(FacetSelector::Dimension(name.to_string())),
                _ => Err(Error::parse(
                    "facet",
                    format!("`{s}` is not topic, cohort, or dimension:<name>"),
                )),
            },
        }
    }
}

impl Serialize for FacetSelector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FacetSelector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    /// CSV `community,author,count`.
    pub cooccurrence: PathBuf,
    #[serde(default)]
    pub params: SgnsParams,
}

/// Full-pipeline configuration, stored as a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Labeled comments, newline-delimited JSON.
    pub input: PathBuf,
    pub output_dir: PathBuf,
    /// Run the keyword/exclusion filter first (needs a `body` field).
    #[serde(default = "default_true")]
    pub apply_filter: bool,
    /// JSON object mapping author to first-activity year.
    #[serde(default)]
    pub first_activity: Option<PathBuf>,
    /// Precomputed embedding in the text vector format.
    #[serde(default)]
    pub embedding: Option<PathBuf>,
    /// Train an embedding when no file is given.
    #[serde(default)]
    pub training: Option<TrainingConfig>,
    #[serde(default)]
    pub dimensions: Vec<DimensionSpec>,
    #[serde(default = "default_facets")]
    pub facets: Vec<FacetSelector>,
    #[serde(default)]
    pub topic_weighting: TopicWeighting,
    #[serde(default)]
    pub avg_mode: AvgMode,
    /// `None` renormalizes only when some group is absent in some quarter.
    #[serde(default)]
    pub renormalize: Option<bool>,
    #[serde(default)]
    pub window: QuarterRange,
    #[serde(default)]
    pub rank_metric: RankMetric,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub svg: bool,
}

fn default_true() -> bool {
    true
}

fn default_facets() -> Vec<FacetSelector> {
    vec![FacetSelector::Topic, FacetSelector::Cohort]
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            output_dir: output_dir.into(),
            apply_filter: true,
            first_activity: None,
            embedding: None,
            training: None,
            dimensions: Vec::new(),
            facets: default_facets(),
            topic_weighting: TopicWeighting::default(),
            avg_mode: AvgMode::default(),
            renormalize: None,
            window: QuarterRange::default(),
            rank_metric: RankMetric::default(),
            seed: 0,
            svg: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn dimension(&self, name: &str) -> Option<&DimensionSpec> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    /// Checks internal consistency and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        QuarterRange::new(self.window.start, self.window.end)?;
        let must_exist = |p: &Path| -> Result<()> {
            if p.exists() {
                Ok(())
            } else {
                Err(Error::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file does not exist"),
                ))
            }
        };
        must_exist(&self.input)?;
        if let Some(p) = &self.first_activity {
            must_exist(p)?;
        }
        if let Some(p) = &self.embedding {
            must_exist(p)?;
        }
        if let Some(t) = &self.training {
            must_exist(&t.cooccurrence)?;
        }
        for f in &self.facets {
            if let FacetSelector::Dimension(name) = f {
                if self.dimension(name).is_none() {
                    return Err(Error::Config(format!("facet `{f}` has no dimension spec")));
                }
                if self.embedding.is_none() && self.training.is_none() {
                    return Err(Error::Config(format!(
                        "facet `{f}` needs an embedding file or a training section"
                    )));
                }
            }
        }
        if self.facets.is_empty() {
            return Err(Error::Config("no facets selected".into()));
        }
        Ok(())
    }
}
