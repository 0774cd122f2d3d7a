//! End-to-end run: filter, panels, scenarios, ranking, plot data.
//!
//! Every intermediate artifact is written under the output directory so a
//! stage can be re-run or audited on its own. A `.partial` marker stays in
//! the directory if the run fails part-way.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{FacetSelector, RunConfig};
use crate::counterfactual::{
    default_renormalize, rank_drivers, scenario_frames, DriverReport, DriverRow, Mode, ScenarioFrame,
    ScenarioSpec,
};
use crate::dims::{
    bin_facet, build_dimension, score_communities, train_embedding, write_scores_csv, read_cooccurrence_csv,
    EmbeddingMatrix,
};
use crate::error::{Error, Result};
use crate::event::{assign_cohorts, read_labeled_jsonl, CohortSource, CommentEvent};
use crate::facet::{DimensionFacet, Facet};
use crate::filter::{filter_jsonl, FilterStats};
use crate::fmt::{fmt_sci6, fmt_sig6};
use crate::panel::{build_panel_over, overall_series_over};
use crate::plot::{
    render_line_svg, render_stacked_svg, write_grid_csv, write_multi_series_csv, write_wide_csv, Quantity,
};
use crate::series::TimeSeries;

pub const PARTIAL_MARKER: &str = ".partial";
pub const LOCK_FILE: &str = ".lock";
pub const DRIVER_REPORT: &str = "driver_report.json";

/// Holds the output-directory lock for the lifetime of a run.
struct OutputLock(PathBuf);

impl OutputLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutputLock(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_with(path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e)))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FacetSummary {
    pub facet: String,
    pub groups: usize,
    pub renormalized: bool,
    /// Groups with no comments in the window; left out of the scenarios.
    pub excluded_groups: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub filter: Option<FilterStats>,
    pub events: usize,
    pub events_in_window: usize,
    pub cohort_from_first_activity: usize,
    pub cohort_from_dataset: usize,
    pub cohort_unknown: usize,
    pub dropped_communities: Vec<String>,
    pub dropped_authors: Vec<String>,
    pub facets: Vec<FacetSummary>,
    #[serde(skip)]
    pub report: Option<DriverReport>,
}

/// Runs every stage and writes all artifacts. The output directory is
/// locked for the duration; on failure a `.partial` marker is left behind.
pub fn run_pipeline(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let _lock = OutputLock::acquire(out)?;
    let marker = out.join(PARTIAL_MARKER);
    write_text(&marker, "run in progress or failed\n")?;
    let summary = run_stages(config)?;
    fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    Ok(summary)
}

fn run_stages(config: &RunConfig) -> Result<RunSummary> {
    let out = &config.output_dir;
    let mut summary = RunSummary::default();

    // filter
    let events_path = if config.apply_filter {
        let filtered = out.join("filtered.jsonl");
        let stats = {
            let mut w = create(&filtered)?;
            let stats = filter_jsonl(open(&config.input)?, &mut w)?;
            w.flush().map_err(|e| Error::io(&filtered, e))?;
            stats
        };
        write_with(&out.join("filter_stats.json"), |w| stats.write_json(w))?;
        summary.filter = Some(stats);
        filtered
    } else {
        config.input.clone()
    };

    // events and cohorts
    let mut events = read_labeled_jsonl(open(&events_path)?)?;
    let first_activity: Option<HashMap<String, i32>> = match &config.first_activity {
        Some(p) => Some(
            serde_json::from_reader(open(p)?).map_err(|e| Error::parse("first-activity map", e))?,
        ),
        None => None,
    };
    assign_cohorts(&mut events, first_activity.as_ref());
    summary.events = events.len();
    for e in &events {
        match e.cohort_source {
            Some(CohortSource::FirstActivity) => summary.cohort_from_first_activity += 1,
            Some(CohortSource::DatasetFallback) => summary.cohort_from_dataset += 1,
            _ => summary.cohort_unknown += 1,
        }
    }
    let window = config.window;
    let events: Vec<CommentEvent> = events.into_iter().filter(|e| window.contains(e.quarter)).collect();
    summary.events_in_window = events.len();

    // community dimensions
    let dimension_facets = build_dimension_facets(config, &mut summary)?;

    // panels and scenarios
    let empirical = overall_series_over(&events, window);
    write_with(&out.join("series/empirical.csv"), |w| empirical.write_csv(w))?;
    write_with(&out.join("plots/overall_stance.csv"), |w| empirical.write_csv(w))?;
    if config.svg {
        write_text(
            &out.join("plots/overall_stance.svg"),
            &render_line_svg("overall stance", &[("empirical", &empirical)]),
        )?;
    }

    let mut scenarios: Vec<(String, TimeSeries)> = Vec::new();
    for selector in &config.facets {
        let facet = match selector {
            FacetSelector::Topic => Facet::Topic,
            FacetSelector::Cohort => Facet::Cohort,
            FacetSelector::Dimension(name) => Facet::Dimension(
                dimension_facets
                    .get(name)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("no scores for dimension `{name}`")))?,
            ),
        };
        let slug = selector.slug();
        let panel = build_panel_over(&events, &facet, config.topic_weighting, window)?;
        write_with(&out.join(format!("panels/{slug}.csv")), |w| panel.write_csv(w))?;

        let renorm = config.renormalize.unwrap_or_else(|| default_renormalize(&panel));
        let spec = |mode: Mode, renorm: bool| {
            ScenarioSpec::uniform(&panel, mode, renorm).with_avg_mode(config.avg_mode)
        };
        let actual = scenario_frames(&panel, &spec(Mode::VaryBoth, false))?;
        let prop_only = scenario_frames(&panel, &spec(Mode::ProportionOnly, renorm))?;
        let stance_only = scenario_frames(&panel, &spec(Mode::StanceOnly, renorm))?;
        let to_series = |frames: &[ScenarioFrame]| {
            TimeSeries::new(
                frames.iter().map(|f| f.quarter).collect(),
                frames.iter().map(ScenarioFrame::value).collect(),
            )
        };
        let (actual_s, prop_s, stance_s) =
            (to_series(&actual)?, to_series(&prop_only)?, to_series(&stance_only)?);
        for (name, s) in [("empirical", &actual_s), ("proportion_only", &prop_s), ("stance_only", &stance_s)] {
            write_with(&out.join(format!("series/{slug}_{name}.csv")), |w| s.write_csv(w))?;
        }

        let plots = out.join("plots");
        write_with(&plots.join(format!("{slug}_proportions.csv")), |w| {
            write_wide_csv(&panel, Quantity::Proportion, w)
        })?;
        write_with(&plots.join(format!("{slug}_stances.csv")), |w| {
            write_wide_csv(&panel, Quantity::Stance, w)
        })?;
        write_with(&plots.join(format!("{slug}_grid.csv")), |w| {
            write_grid_csv(
                &panel,
                &[("actual", &actual), ("proportion_only", &prop_only), ("stance_only", &stance_only)],
                w,
            )
        })?;
        write_with(&plots.join(format!("{slug}_scenarios.csv")), |w| {
            write_multi_series_csv(
                &[("empirical", &empirical), ("proportion_only", &prop_s), ("stance_only", &stance_s)],
                w,
            )
        })?;
        if config.svg {
            write_text(
                &plots.join(format!("{slug}_proportions.svg")),
                &render_stacked_svg(&format!("{slug} proportions"), &panel),
            )?;
            write_text(
                &plots.join(format!("{slug}_scenarios.svg")),
                &render_line_svg(
                    &format!("{slug} counterfactuals"),
                    &[("empirical", &empirical), ("proportion_only", &prop_s), ("stance_only", &stance_s)],
                ),
            )?;
        }

        summary.facets.push(FacetSummary {
            facet: slug.to_string(),
            groups: panel.groups().len(),
            renormalized: renorm,
            excluded_groups: panel.inactive_groups(),
        });
        let title = selector.title();
        scenarios.push((format!("{title} Proportion"), prop_s));
        scenarios.push((format!("{title} Stance"), stance_s));
    }

    // ranking
    let report = if empirical.defined().next().is_some() {
        rank_drivers(&empirical, &scenarios, config.rank_metric)?
    } else {
        DriverReport {
            metric: config.rank_metric,
            rows: Vec::new(),
        }
    };
    write_text(&out.join(DRIVER_REPORT), &(report.to_json()? + "\n"))?;
    write_text(&out.join("driver_table.csv"), &driver_table_csv(&report, &scenarios))?;
    write_text(
        &out.join("run_summary.json"),
        &(serde_json::to_string_pretty(&summary).map_err(|e| Error::parse("run summary", e))? + "\n"),
    )?;
    summary.report = Some(report);
    Ok(summary)
}

fn build_dimension_facets(
    config: &RunConfig,
    summary: &mut RunSummary,
) -> Result<BTreeMap<String, DimensionFacet>> {
    let wanted: Vec<&str> = config
        .facets
        .iter()
        .filter_map(|f| match f {
            FacetSelector::Dimension(n) => Some(n.as_str()),
            _ => None,
        })
        .collect();
    let mut facets = BTreeMap::new();
    if wanted.is_empty() && config.dimensions.is_empty() {
        return Ok(facets);
    }
    let embedding = match (&config.embedding, &config.training) {
        (Some(path), _) => EmbeddingMatrix::read_text(open(path)?)?,
        (None, Some(training)) => {
            let pairs = read_cooccurrence_csv(open(&training.cooccurrence)?)?;
            let mut params = training.params.clone();
            params.seed = config.seed;
            let outcome = train_embedding(&pairs, &params)?;
            summary.dropped_communities = outcome.dropped_communities;
            summary.dropped_authors = outcome.dropped_authors;
            write_with(&config.output_dir.join("dims/embedding.vec"), |w| {
                outcome.embedding.write_text(w)
            })?;
            outcome.embedding
        }
        (None, None) => return Err(Error::Config("dimensions need an embedding".into())),
    };
    for spec in &config.dimensions {
        let dimension = build_dimension(&embedding, spec)?;
        let scores = score_communities(&embedding, &dimension)?;
        write_with(
            &config.output_dir.join(format!("dims/{}_scores.csv", spec.name)),
            |w| write_scores_csv(&scores, w),
        )?;
        facets.insert(spec.name.clone(), bin_facet(&scores, &spec.name));
    }
    Ok(facets)
}

/// Table in scenario order: `varying_property,pearson_r,p_value,loss,euclidean,dtw`.
fn driver_table_csv(report: &DriverReport, scenarios: &[(String, TimeSeries)]) -> String {
    let mut s = String::from("varying_property,pearson_r,p_value,loss,euclidean,dtw\n");
    for (name, _) in scenarios {
        let Some(row) = report.row(name) else { continue };
        let r = &row.report;
        s.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            r.pearson_r.map(fmt_sig6).unwrap_or_default(),
            r.p_value.map(fmt_sci6).unwrap_or_default(),
            fmt_sig6(r.l1_loss),
            fmt_sig6(r.euclidean),
            fmt_sig6(r.dtw),
        ));
    }
    s
}

pub fn load_driver_report(path: &Path) -> Result<Vec<DriverRow>> {
    serde_json::from_reader(open(path)?).map_err(|e| Error::parse("driver report", e))
}

/// Plain-text table of a driver report, best first.
pub fn format_report(rows: &[DriverRow]) -> String {
    let width = rows.iter().map(|r| r.scenario.len()).max().unwrap_or(8).max(8);
    let mut s = format!(
        "{:>4}  {:<width$}  {:>9}  {:>12}  {:>9}  {:>9}  {:>9}\n",
        "rank", "scenario", "pearson_r", "p_value", "loss", "euclidean", "dtw"
    );
    for r in rows {
        let rep = &r.report;
        s.push_str(&format!(
            "{:>4}  {:<width$}  {:>9}  {:>12}  {:>9}  {:>9}  {:>9}\n",
            r.rank,
            r.scenario,
            rep.pearson_r.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into()),
            rep.p_value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "n/a".into()),
            format!("{:.3}", rep.l1_loss),
            format!("{:.3}", rep.euclidean),
            format!("{:.3}", rep.dtw),
        ));
    }
    s
}
