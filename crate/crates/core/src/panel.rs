//! Per-quarter, per-group proportion and mean-stance panels.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::CommentEvent;
use crate::facet::{Facet, GroupKey, TopicWeighting, WEIGHT_UNITS};
use crate::fmt::fmt_float;
use crate::quarter::{Quarter, QuarterRange};
use crate::series::TimeSeries;

const SUM_TOLERANCE: f64 = 1e-9;

/// How the all-time average proportion of a group is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvgMode {
    /// Mean of the quarterly proportions (absent quarters count as 0).
    #[default]
    MeanOfQuarters,
    /// Total group weight over total weight, pooling every quarter.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub weight: f64,
    /// `None` when the whole quarter is empty.
    pub proportion: Option<f64>,
    /// `None` when the cell has zero weight.
    pub mean_stance: Option<f64>,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupAverage {
    pub group: String,
    pub p_bar: f64,
    /// Undefined for groups with no weight in any quarter.
    pub l_bar: Option<f64>,
}

/// Immutable quarter × group table. Every group has a cell in every quarter.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    facet: String,
    quarters: Vec<Quarter>,
    groups: Vec<String>,
    cells: Vec<Vec<Cell>>,
}

#[derive(Default, Clone, Copy)]
struct Acc {
    units: u64,
    stance_units: i64,
    n: u64,
}

impl Panel {
    /// Builds a panel from raw cell weights and mean stances, indexed
    /// `[quarter][group]`; proportions are derived from the weights.
    pub fn from_weights(
        facet: impl Into<String>,
        quarters: Vec<Quarter>,
        groups: Vec<String>,
        cells: Vec<Vec<(f64, Option<f64>, u64)>>,
    ) -> Result<Self> {
        if cells.len() != quarters.len() || cells.iter().any(|row| row.len() != groups.len()) {
            return Err(Error::Contract("panel cell grid does not match its axes".into()));
        }
        let cells = cells
            .into_iter()
            .map(|row| {
                let total: f64 = row.iter().map(|c| c.0).sum();
                row.into_iter()
                    .map(|(weight, mean, n)| Cell {
                        weight,
                        proportion: (total > 0.0).then(|| weight / total),
                        mean_stance: if weight > 0.0 { mean } else { None },
                        n,
                    })
                    .collect()
            })
            .collect();
        let panel = Panel {
            facet: facet.into(),
            quarters,
            groups,
            cells,
        };
        panel.validate()?;
        Ok(panel)
    }

    fn validate(&self) -> Result<()> {
        if self.quarters.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("panel quarters must be strictly increasing".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.groups.iter().find(|g| !seen.insert(g.as_str())) {
            return Err(Error::Contract(format!("duplicate group `{dup}`")));
        }
        for (q, row) in self.quarters.iter().zip(&self.cells) {
            for (g, c) in self.groups.iter().zip(row) {
                if !c.weight.is_finite() || c.weight < 0.0 {
                    return Err(Error::Contract(format!("negative weight at {q}/{g}")));
                }
                if let Some(m) = c.mean_stance {
                    if !(-1.0..=1.0).contains(&m) {
                        return Err(Error::Contract(format!("mean stance {m} outside [-1, 1] at {q}/{g}")));
                    }
                }
                if c.weight > 0.0 && c.mean_stance.is_none() {
                    return Err(Error::Contract(format!("missing mean stance at {q}/{g}")));
                }
            }
            let defined: Vec<f64> = row.iter().filter_map(|c| c.proportion).collect();
            if !defined.is_empty() {
                let sum: f64 = defined.iter().sum();
                if (sum - 1.0).abs() > SUM_TOLERANCE || defined.len() != row.len() {
                    return Err(Error::Contract(format!(
                        "proportions in {q} sum to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn facet(&self) -> &str {
        &self.facet
    }

    pub fn quarters(&self) -> &[Quarter] {
        &self.quarters
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty() || self.groups.is_empty()
    }

    pub fn cell(&self, t: usize, g: usize) -> &Cell {
        &self.cells[t][g]
    }

    pub fn group_index(&self, group: &str) -> Option<usize> {
        self.groups.iter().position(|g| g == group)
    }

    pub fn quarter_total(&self, t: usize) -> f64 {
        self.cells[t].iter().map(|c| c.weight).sum()
    }

    pub fn quarter_is_empty(&self, t: usize) -> bool {
        self.cells[t].iter().all(|c| c.proportion.is_none())
    }

    /// P_t(g); `None` for an empty quarter.
    pub fn proportion(&self, t: usize, g: usize) -> Option<f64> {
        self.cells[t][g].proportion
    }

    /// L_t(g); `None` when the group has no weight in the quarter.
    pub fn mean_stance(&self, t: usize, g: usize) -> Option<f64> {
        self.cells[t][g].mean_stance
    }

    /// True when some group has zero weight in some non-empty quarter.
    pub fn has_absences(&self) -> bool {
        (0..self.quarters.len())
            .filter(|&t| !self.quarter_is_empty(t))
            .any(|t| self.cells[t].iter().any(|c| c.weight <= 0.0))
    }

    /// P̄ and L̄ for every group, in panel order. P̄ is taken over the
    /// non-empty quarters; L̄ over the quarters where the group is present.
    pub fn time_averages(&self, mode: AvgMode) -> Result<Vec<GroupAverage>> {
        let active: Vec<usize> = (0..self.quarters.len())
            .filter(|&t| !self.quarter_is_empty(t))
            .collect();
        if self.groups.is_empty() || active.is_empty() {
            return Err(Error::Contract("time averages need a non-empty panel".into()));
        }
        let grand_total: f64 = active.iter().map(|&t| self.quarter_total(t)).sum();
        Ok(self
            .groups
            .iter()
            .enumerate()
            .map(|(g, name)| {
                let p_bar = match mode {
                    AvgMode::MeanOfQuarters => {
                        active
                            .iter()
                            .map(|&t| self.cells[t][g].proportion.unwrap_or(0.0))
                            .sum::<f64>()
                            / active.len() as f64
                    }
                    AvgMode::Pooled => {
                        active.iter().map(|&t| self.cells[t][g].weight).sum::<f64>() / grand_total
                    }
                };
                let stances: Vec<f64> = active
                    .iter()
                    .filter_map(|&t| self.cells[t][g].mean_stance)
                    .collect();
                let l_bar = (!stances.is_empty())
                    .then(|| stances.iter().sum::<f64>() / stances.len() as f64);
                GroupAverage {
                    group: name.clone(),
                    p_bar,
                    l_bar,
                }
            })
            .collect())
    }

    /// Groups that never carry weight; their L̄ is undefined.
    pub fn inactive_groups(&self) -> Vec<String> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(g, _)| self.cells.iter().all(|row| row[*g].weight <= 0.0))
            .map(|(_, name)| name.clone())
            .collect()
    }

    /// Σ_g P_t(g)·L_t(g) per quarter; empty quarters are gaps.
    pub fn overall_series(&self) -> TimeSeries {
        let values = self
            .cells
            .iter()
            .map(|row| {
                if row.iter().all(|c| c.proportion.is_none()) {
                    return None;
                }
                Some(
                    row.iter()
                        .filter_map(|c| Some(c.proportion? * c.mean_stance?))
                        .sum(),
                )
            })
            .collect();
        TimeSeries::new(self.quarters.clone(), values).expect("panel quarters are ordered")
    }

    /// CSV with header `quarter,group,weight,proportion,mean_stance,n`.
    /// Undefined proportions and stances are written as empty fields.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let err = |e: csv::Error| Error::parse("panel csv", e);
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["quarter", "group", "weight", "proportion", "mean_stance", "n"])
            .map_err(err)?;
        for (q, row) in self.quarters.iter().zip(&self.cells) {
            for (g, c) in self.groups.iter().zip(row) {
                w.write_record([
                    q.to_string(),
                    g.clone(),
                    fmt_float(c.weight),
                    c.proportion.map(fmt_float).unwrap_or_default(),
                    c.mean_stance.map(fmt_float).unwrap_or_default(),
                    c.n.to_string(),
                ])
                .map_err(err)?;
            }
        }
        w.flush().map_err(|e| Error::parse("panel csv", e))?;
        Ok(())
    }

    /// Reads a panel CSV. Missing (quarter, group) rows are zero-weight cells.
    pub fn read_csv<R: Read>(facet: impl Into<String>, reader: R) -> Result<Self> {
        let err = |e: csv::Error| Error::parse("panel csv", e);
        let mut r = csv::Reader::from_reader(reader);
        let mut groups: Vec<String> = Vec::new();
        let mut group_idx: HashMap<String, usize> = HashMap::new();
        let mut rows: BTreeMap<Quarter, HashMap<usize, Cell>> = BTreeMap::new();
        let opt = |s: &str, what: &str| -> Result<Option<f64>> {
            let s = s.trim();
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| Error::parse(format!("panel csv {what}"), e))
            }
        };
        for rec in r.records() {
            let rec = rec.map_err(err)?;
            if rec.len() < 6 {
                return Err(Error::parse("panel csv", "expected 6 columns"));
            }
            let q: Quarter = rec[0].parse()?;
            let g = rec[1].to_string();
            let idx = *group_idx.entry(g.clone()).or_insert_with(|| {
                groups.push(g.clone());
                groups.len() - 1
            });
            let cell = Cell {
                weight: opt(&rec[2], "weight")?.unwrap_or(0.0),
                proportion: opt(&rec[3], "proportion")?,
                mean_stance: opt(&rec[4], "mean_stance")?,
                n: rec[5]
                    .trim()
                    .parse()
                    .map_err(|e| Error::parse("panel csv n", e))?,
            };
            if rows.entry(q).or_default().insert(idx, cell).is_some() {
                return Err(Error::Contract(format!("duplicate panel row {q}/{g}")));
            }
        }
        let quarters: Vec<Quarter> = match (rows.keys().next(), rows.keys().next_back()) {
            (Some(&a), Some(&b)) => QuarterRange::new(a, b)?.iter().collect(),
            _ => Vec::new(),
        };
        let cells = quarters
            .iter()
            .map(|q| {
                let row = rows.get(q);
                let any_defined = row.is_some_and(|r| r.values().any(|c| c.proportion.is_some()));
                (0..groups.len())
                    .map(|g| match row.and_then(|r| r.get(&g)) {
                        Some(c) => *c,
                        None => Cell {
                            proportion: any_defined.then_some(0.0),
                            ..Cell::default()
                        },
                    })
                    .collect()
            })
            .collect();
        let panel = Panel {
            facet: facet.into(),
            quarters,
            groups,
            cells,
        };
        panel.validate()?;
        Ok(panel)
    }
}

/// Aggregates events over the contiguous quarter span they cover.
pub fn build_panel(
    events: &[CommentEvent],
    facet: &Facet,
    weighting: TopicWeighting,
) -> Result<Panel> {
    let span = match (
        events.iter().map(|e| e.quarter).min(),
        events.iter().map(|e| e.quarter).max(),
    ) {
        (Some(a), Some(b)) => Some(QuarterRange::new(a, b)?),
        _ => None,
    };
    build_panel_inner(events, facet, weighting, span)
}

/// Aggregates events over a fixed window; events outside it are ignored and
/// every quarter of the window gets a row.
pub fn build_panel_over(
    events: &[CommentEvent],
    facet: &Facet,
    weighting: TopicWeighting,
    window: QuarterRange,
) -> Result<Panel> {
    build_panel_inner(events, facet, weighting, Some(window))
}

fn build_panel_inner(
    events: &[CommentEvent],
    facet: &Facet,
    weighting: TopicWeighting,
    span: Option<QuarterRange>,
) -> Result<Panel> {
    let name = facet.name();
    let Some(span) = span else {
        return Ok(Panel {
            facet: name,
            quarters: Vec::new(),
            groups: Vec::new(),
            cells: Vec::new(),
        });
    };
    let quarters: Vec<Quarter> = span.iter().collect();
    let first = span.start.ordinal();

    let mut labels: BTreeMap<GroupKey, String> = BTreeMap::new();
    let mut acc: HashMap<(usize, GroupKey), Acc> = HashMap::new();
    for e in events.iter().filter(|e| span.contains(e.quarter)) {
        let t = (e.quarter.ordinal() - first) as usize;
        let score = e.stance.score();
        for m in facet.memberships(e, weighting)? {
            labels.entry(m.key.clone()).or_insert(m.label);
            let a = acc.entry((t, m.key)).or_default();
            a.units += m.units;
            a.stance_units += score * m.units as i64;
            a.n += 1;
        }
    }

    let keys: Vec<GroupKey> = labels.keys().cloned().collect();
    let groups: Vec<String> = labels.into_values().collect();
    let cells = (0..quarters.len())
        .map(|t| {
            let row: Vec<Acc> = keys
                .iter()
                .map(|k| acc.get(&(t, k.clone())).copied().unwrap_or_default())
                .collect();
            let total: u64 = row.iter().map(|a| a.units).sum();
            row.into_iter()
                .map(|a| Cell {
                    weight: a.units as f64 / WEIGHT_UNITS as f64,
                    proportion: (total > 0).then(|| a.units as f64 / total as f64),
                    mean_stance: (a.units > 0).then(|| a.stance_units as f64 / a.units as f64),
                    n: a.n,
                })
                .collect()
        })
        .collect();
    let panel = Panel {
        facet: name,
        quarters,
        groups,
        cells,
    };
    panel.validate()?;
    Ok(panel)
}

/// Per-quarter mean stance straight from the events, over the span they
/// cover. Quarters without events are gaps.
pub fn overall_series_from_events(events: &[CommentEvent]) -> TimeSeries {
    let (Some(a), Some(b)) = (
        events.iter().map(|e| e.quarter).min(),
        events.iter().map(|e| e.quarter).max(),
    ) else {
        return TimeSeries::default();
    };
    let span = QuarterRange { start: a, end: b };
    overall_series_over(events, span)
}

pub fn overall_series_over(events: &[CommentEvent], window: QuarterRange) -> TimeSeries {
    let mut sums: BTreeMap<Quarter, (i64, u64)> = BTreeMap::new();
    for e in events.iter().filter(|e| window.contains(e.quarter)) {
        let s = sums.entry(e.quarter).or_default();
        s.0 += e.stance.score();
        s.1 += 1;
    }
    let quarters: Vec<Quarter> = window.iter().collect();
    let values = quarters
        .iter()
        .map(|q| sums.get(q).map(|&(s, n)| s as f64 / n as f64))
        .collect();
    TimeSeries::new(quarters, values).expect("window quarters are ordered")
}
