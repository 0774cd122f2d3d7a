//! Decomposes aggregate stance change in a labeled comment corpus into
//! shifts in group proportions and shifts in within-group stance.
//!
//! The pipeline: [`filter`] selects comments, [`panel`] aggregates labeled
//! events into per-quarter proportions and stances for a [`facet`],
//! [`counterfactual`] evaluates proportion-only / stance-only worlds and
//! ranks them with [`metrics`], and [`dims`] supplies community social
//! dimensions as an extra facet.

pub mod config;
pub mod counterfactual;
pub mod dims;
pub mod error;
pub mod event;
pub mod facet;
pub mod filter;
pub mod fmt;
pub mod metrics;
pub mod panel;
pub mod pipeline;
pub mod plot;
pub mod quarter;
pub mod series;

pub use config::{FacetSelector, RunConfig};
pub use counterfactual::{
    evaluate_scenario, proportion_only, rank_drivers, stance_only, DriverReport, Mode, RankMetric,
    ScenarioSpec,
};
pub use error::{Error, Result};
pub use event::{assign_cohorts, Cohort, CommentEvent, Stance};
pub use facet::{Facet, TopicWeighting};
pub use metrics::SimilarityReport;
pub use panel::{build_panel, AvgMode, Panel};
pub use quarter::{Quarter, QuarterRange};
pub use series::TimeSeries;
