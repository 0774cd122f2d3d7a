//! Counterfactual stance series and driver ranking.
//!
//! Every group of a panel is assigned one of four modes. For quarter t the
//! counterfactual stance is
//!
//! ```text
//!   Σ_{VaryBoth} P_t·L_t + Σ_{ProportionOnly} P_t·L̄ + Σ_{StanceOnly} P̄·L_t + Σ_{Fixed} P̄·L̄
//! ```
//!
//! With renormalization on, the effective proportions of a quarter (P_t or
//! P̄ by mode, zero for StanceOnly/Fixed groups absent that quarter) are
//! rescaled to sum to one before weighting the stances.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SimilarityReport;
use crate::panel::{AvgMode, Panel};
use crate::quarter::Quarter;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    VaryBoth,
    ProportionOnly,
    StanceOnly,
    Fixed,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empirical" | "vary-both" | "vary_both" => Ok(Mode::VaryBoth),
            "proportion-only" | "proportion_only" => Ok(Mode::ProportionOnly),
            "stance-only" | "stance_only" => Ok(Mode::StanceOnly),
            "fixed" => Ok(Mode::Fixed),
            other => Err(Error::parse("scenario mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Mode per group plus evaluation options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub modes: BTreeMap<String, Mode>,
    pub renormalize: bool,
    #[serde(default)]
    pub avg_mode: AvgMode,
}

impl ScenarioSpec {
    /// Same mode for every active group. Groups that never carry weight are
    /// left out of the scenario (they are given `VaryBoth`, which contributes
    /// nothing for a group that is never present).
    pub fn uniform(panel: &Panel, mode: Mode, renormalize: bool) -> Self {
        let inactive = panel.inactive_groups();
        let modes = panel
            .groups()
            .iter()
            .map(|g| {
                let m = if inactive.contains(g) { Mode::VaryBoth } else { mode };
                (g.clone(), m)
            })
            .collect();
        ScenarioSpec {
            modes,
            renormalize,
            avg_mode: AvgMode::default(),
        }
    }

    pub fn with_avg_mode(mut self, avg_mode: AvgMode) -> Self {
        self.avg_mode = avg_mode;
        self
    }
}

/// Effective proportion and stance of each group in one quarter.
/// `None` marks a group that contributes nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFrame {
    pub quarter: Quarter,
    pub entries: Option<Vec<Option<(f64, f64)>>>,
}

impl ScenarioFrame {
    pub fn value(&self) -> Option<f64> {
        self.entries
            .as_ref()
            .map(|e| e.iter().flatten().map(|(p, l)| p * l).sum())
    }
}

/// Per-quarter effective proportions and stances under `spec`. A quarter
/// whose value is undefined has `entries == None`.
pub fn scenario_frames(panel: &Panel, spec: &ScenarioSpec) -> Result<Vec<ScenarioFrame>> {
    if panel.is_empty() {
        return Ok(Vec::new());
    }
    let modes: Vec<Mode> = panel
        .groups()
        .iter()
        .map(|g| {
            spec.modes
                .get(g)
                .copied()
                .ok_or_else(|| Error::Contract(format!("group `{g}` has no scenario mode")))
        })
        .collect::<Result<_>>()?;
    if let Some(extra) = spec.modes.keys().find(|g| panel.group_index(g).is_none()) {
        return Err(Error::Contract(format!("scenario names unknown group `{extra}`")));
    }
    let averages = panel.time_averages(spec.avg_mode)?;
    for (avg, mode) in averages.iter().zip(&modes) {
        if matches!(mode, Mode::ProportionOnly | Mode::Fixed) && avg.l_bar.is_none() {
            return Err(Error::UndefinedStanceAverage(avg.group.clone()));
        }
    }
    let all_fixed = modes.iter().all(|m| *m == Mode::Fixed);

    let frames = panel
        .quarters()
        .iter()
        .enumerate()
        .map(|(t, &quarter)| {
            let empty = panel.quarter_is_empty(t);
            if empty && !(all_fixed && !spec.renormalize) {
                return ScenarioFrame {
                    quarter,
                    entries: None,
                };
            }
            let mut entries: Vec<Option<(f64, f64)>> = modes
                .iter()
                .enumerate()
                .map(|(g, mode)| {
                    let present = panel.mean_stance(t, g);
                    let avg = &averages[g];
                    match mode {
                        Mode::VaryBoth => Some((panel.proportion(t, g)?, present?)),
                        Mode::ProportionOnly => Some((panel.proportion(t, g)?, avg.l_bar?)),
                        Mode::StanceOnly => Some((avg.p_bar, present?)),
                        Mode::Fixed if spec.renormalize => {
                            present.map(|_| (avg.p_bar, avg.l_bar.unwrap_or(0.0)))
                        }
                        Mode::Fixed => Some((avg.p_bar, avg.l_bar?)),
                    }
                })
                .collect();
            if spec.renormalize {
                let total: f64 = entries.iter().flatten().map(|(p, _)| p).sum();
                if total <= 0.0 {
                    return ScenarioFrame {
                        quarter,
                        entries: None,
                    };
                }
                for (p, _) in entries.iter_mut().flatten() {
                    *p /= total;
                }
            }
            ScenarioFrame {
                quarter,
                entries: Some(entries),
            }
        })
        .collect();
    Ok(frames)
}

/// Counterfactual stance series for `spec`.
pub fn evaluate_scenario(panel: &Panel, spec: &ScenarioSpec) -> Result<TimeSeries> {
    let frames = scenario_frames(panel, spec)?;
    let (quarters, values) = frames.iter().map(|f| (f.quarter, f.value())).unzip();
    TimeSeries::new(quarters, values)
}

/// Renormalization default for the convenience wrappers.
pub fn default_renormalize(panel: &Panel) -> bool {
    panel.has_absences()
}

pub fn empirical(panel: &Panel) -> Result<TimeSeries> {
    evaluate_scenario(panel, &ScenarioSpec::uniform(panel, Mode::VaryBoth, false))
}

/// Proportions vary, each group's stance is frozen at its average.
pub fn proportion_only(panel: &Panel) -> Result<TimeSeries> {
    let renorm = default_renormalize(panel);
    evaluate_scenario(panel, &ScenarioSpec::uniform(panel, Mode::ProportionOnly, renorm))
}

/// Stances vary, each group's proportion is frozen at its average.
pub fn stance_only(panel: &Panel) -> Result<TimeSeries> {
    let renorm = default_renormalize(panel);
    evaluate_scenario(panel, &ScenarioSpec::uniform(panel, Mode::StanceOnly, renorm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMetric {
    #[default]
    Pearson,
    L1Loss,
    Euclidean,
    Dtw,
}

impl FromStr for RankMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(RankMetric::Pearson),
            "l1" | "loss" | "l1_loss" | "l1-loss" => Ok(RankMetric::L1Loss),
            "euclidean" => Ok(RankMetric::Euclidean),
            "dtw" => Ok(RankMetric::Dtw),
            other => Err(Error::parse("rank metric", format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverRow {
    pub rank: usize,
    pub scenario: String,
    #[serde(flatten)]
    pub report: SimilarityReport,
}

/// Scenarios ordered best-first by the chosen metric.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverReport {
    pub metric: RankMetric,
    pub rows: Vec<DriverRow>,
}

impl DriverReport {
    pub fn row(&self, scenario: &str) -> Option<&DriverRow> {
        self.rows.iter().find(|r| r.scenario == scenario)
    }

    /// JSON array of rows in rank order.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.rows).map_err(|e| Error::parse("driver report", e))
    }
}

/// Scores every scenario against the empirical series and ranks them.
/// Pearson ranks descending (undefined last); distances rank ascending.
pub fn rank_drivers(
    empirical: &TimeSeries,
    scenarios: &[(String, TimeSeries)],
    metric: RankMetric,
) -> Result<DriverReport> {
    let mut rows: Vec<DriverRow> = scenarios
        .iter()
        .map(|(name, series)| {
            let (_, x, y) = empirical.align(series);
            Ok(DriverRow {
                rank: 0,
                scenario: name.clone(),
                report: SimilarityReport::from_aligned(&x, &y)?,
            })
        })
        .collect::<Result<_>>()?;
    let key = |r: &DriverRow| -> f64 {
        match metric {
            RankMetric::Pearson => r.report.pearson_r.map_or(f64::INFINITY, |v| -v),
            RankMetric::L1Loss => r.report.l1_loss,
            RankMetric::Euclidean => r.report.euclidean,
            RankMetric::Dtw => r.report.dtw,
        }
    };
    rows.sort_by(|a, b| key(a).total_cmp(&key(b)));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(DriverReport { metric, rows })
}
