use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stancedrift::config::CONFIG_ENV;
use stancedrift::counterfactual::{default_renormalize, rank_drivers};
use stancedrift::dims::{
    bin_facet, build_dimension, read_cooccurrence_csv, read_scores_csv, score_communities,
    train_embedding, write_scores_csv, DimensionSpec, EmbeddingMatrix, SgnsParams,
};
use stancedrift::event::read_labeled_jsonl;
use stancedrift::filter::filter_jsonl;
use stancedrift::fmt::{fmt_sci6, fmt_sig6};
use stancedrift::metrics::compare;
use stancedrift::panel::build_panel_over;
use stancedrift::pipeline::{format_report, load_driver_report, run_pipeline, DRIVER_REPORT};
use stancedrift::{
    assign_cohorts, evaluate_scenario, AvgMode, Error, Facet, FacetSelector, Mode, Panel,
    QuarterRange, RankMetric, Result, RunConfig, ScenarioSpec, SimilarityReport, TimeSeries,
    TopicWeighting,
};

#[derive(Parser)]
#[command(name = "stancedrift", version, about = "Counterfactual drivers of aggregate stance change")]
struct Cli {
    /// Seed for every randomized stage
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Keyword selection and exclusion over a JSONL dump
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Where to write per-reason counts (stdout when omitted)
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Build a quarter x group panel from labeled comments
    Panel(PanelArgs),
    /// Evaluate one counterfactual scenario over a panel
    Scenario(ScenarioArgs),
    /// Rank scenario series against the empirical series
    Rank {
        #[arg(long)]
        empirical: PathBuf,
        /// `name=path` of a scenario series CSV; repeatable
        #[arg(long = "scenario", value_parser = parse_named_path, required = true)]
        scenarios: Vec<(String, PathBuf)>,
        #[arg(long, default_value = "pearson")]
        metric: RankMetric,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Community embeddings and social dimensions
    #[command(subcommand)]
    Dims(DimsCommand),
    /// Similarity metrics between two series CSVs
    Compare { left: PathBuf, right: PathBuf },
    /// Full pipeline from a JSON config
    Run {
        #[arg(long, env = CONFIG_ENV)]
        config: PathBuf,
        /// Overrides the configured output directory
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print a driver report as a table
    Report {
        /// Run directory or driver report JSON
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct PanelArgs {
    /// Labeled comments, JSONL
    #[arg(long)]
    input: PathBuf,
    /// topic, cohort or dimension:<name>
    #[arg(long, default_value = "topic")]
    facet: FacetSelector,
    /// Community scores CSV, required for a dimension facet
    #[arg(long)]
    scores: Option<PathBuf>,
    /// JSON object of author to first-activity year
    #[arg(long)]
    first_activity: Option<PathBuf>,
    #[arg(long, default_value = "2014Q1:2022Q2")]
    window: QuarterRange,
    #[arg(long, value_enum, default_value_t = Weighting::Fractional)]
    weighting: Weighting,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    panel: PathBuf,
    /// Mode for every group: empirical, proportion-only, stance-only, fixed
    #[arg(long, default_value = "empirical")]
    mode: Mode,
    /// Per-group override `group=mode`; repeatable
    #[arg(long = "group-mode", value_parser = parse_group_mode)]
    group_modes: Vec<(String, Mode)>,
    /// Defaults to renormalizing when some group is absent in some quarter
    #[arg(long)]
    renormalize: Option<bool>,
    #[arg(long, value_enum, default_value_t = Averaging::MeanOfQuarters)]
    avg_mode: Averaging,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DimsCommand {
    /// Train community vectors from `community,author,count` rows
    Train {
        #[arg(long)]
        cooccurrence: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 150)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 0.025)]
        learning_rate: f64,
        #[arg(long, default_value_t = 1)]
        min_count: u64,
    },
    /// Score communities along a dimension built from seed pairs
    Score {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        name: String,
        /// `negative:positive` community pair; repeatable
        #[arg(long = "pair", value_parser = parse_pair, required = true)]
        pairs: Vec<(String, String)>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Weighting {
    Fractional,
    Occurrence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Averaging {
    MeanOfQuarters,
    Pooled,
}

fn parse_named_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected name=path")?;
    Ok((name.to_string(), PathBuf::from(path)))
}

fn parse_group_mode(s: &str) -> std::result::Result<(String, Mode), String> {
    let (group, mode) = s.rsplit_once('=').ok_or("expected group=mode")?;
    Ok((group.to_string(), mode.parse().map_err(|e: Error| e.to_string())?))
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    let (neg, pos) = s.split_once(':').ok_or("expected negative:positive")?;
    Ok((neg.to_string(), pos.to_string()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `f` against the named file, or stdout.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush().map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush().map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    TimeSeries::read_csv(open(path)?)
}

fn json_number(x: Option<f64>, fmt: fn(f64) -> String) -> String {
    match x {
        Some(v) if v.is_finite() => fmt(v),
        _ => "null".into(),
    }
}

fn compare_json(r: &SimilarityReport) -> String {
    let fields = [
        ("pearson_r", json_number(r.pearson_r, fmt_sig6)),
        ("p_value", json_number(r.p_value, fmt_sci6)),
        ("euclidean", json_number(Some(r.euclidean), fmt_sig6)),
        ("dtw", json_number(Some(r.dtw), fmt_sig6)),
        ("l1_loss", json_number(Some(r.l1_loss), fmt_sig6)),
        ("n", r.n.to_string()),
    ];
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("  \"{k}\": {v}")).collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}

fn panel(args: &PanelArgs) -> Result<()> {
    let mut events = read_labeled_jsonl(open(&args.input)?)?;
    let first_activity: Option<HashMap<String, i32>> = match &args.first_activity {
        Some(p) => Some(serde_json::from_reader(open(p)?).map_err(|e| Error::Parse {
            what: "first-activity map".into(),
            message: e.to_string(),
        })?),
        None => None,
    };
    assign_cohorts(&mut events, first_activity.as_ref());
    let facet = match &args.facet {
        FacetSelector::Topic => Facet::Topic,
        FacetSelector::Cohort => Facet::Cohort,
        FacetSelector::Dimension(name) => {
            let path = args
                .scores
                .as_ref()
                .ok_or_else(|| Error::Config(format!("facet dimension:{name} needs --scores")))?;
            Facet::Dimension(bin_facet(&read_scores_csv(open(path)?)?, name))
        }
    };
    let weighting = match args.weighting {
        Weighting::Fractional => TopicWeighting::Fractional,
        Weighting::Occurrence => TopicWeighting::Occurrence,
    };
    let panel = build_panel_over(&events, &facet, weighting, args.window)?;
    with_output(args.output.as_deref(), |w| panel.write_csv(w))
}

fn scenario(args: &ScenarioArgs) -> Result<()> {
    let panel = Panel::read_csv("panel", open(&args.panel)?)?;
    let renormalize = args.renormalize.unwrap_or_else(|| default_renormalize(&panel));
    let avg_mode = match args.avg_mode {
        Averaging::MeanOfQuarters => AvgMode::MeanOfQuarters,
        Averaging::Pooled => AvgMode::Pooled,
    };
    let mut spec = ScenarioSpec::uniform(&panel, args.mode, renormalize).with_avg_mode(avg_mode);
    for (group, mode) in &args.group_modes {
        if panel.group_index(group).is_none() {
            return Err(Error::Contract(format!("panel has no group `{group}`")));
        }
        spec.modes.insert(group.clone(), *mode);
    }
    let series = evaluate_scenario(&panel, &spec)?;
    with_output(args.output.as_deref(), |w| series.write_csv(w))
}

fn dims(command: &DimsCommand, seed: Option<u64>) -> Result<()> {
    match command {
        DimsCommand::Train {
            cooccurrence,
            output,
            dim,
            epochs,
            negatives,
            learning_rate,
            min_count,
        } => {
            let pairs = read_cooccurrence_csv(open(cooccurrence)?)?;
            let params = SgnsParams {
                dim: *dim,
                epochs: *epochs,
                negatives: *negatives,
                learning_rate: *learning_rate,
                min_count: *min_count,
                seed: seed.unwrap_or(0),
                ..SgnsParams::default()
            };
            let outcome = train_embedding(&pairs, &params)?;
            if !outcome.dropped_communities.is_empty() {
                eprintln!("dropped {} communities below min count", outcome.dropped_communities.len());
            }
            with_output(Some(output), |w| outcome.embedding.write_text(w))
        }
        DimsCommand::Score {
            embedding,
            name,
            pairs,
            output,
        } => {
            let m = EmbeddingMatrix::read_text(open(embedding)?)?;
            let dimension = build_dimension(&m, &DimensionSpec::new(name.clone(), pairs.clone()))?;
            let scores = score_communities(&m, &dimension)?;
            with_output(output.as_deref(), |w| write_scores_csv(&scores, w))
        }
    }
}

fn report(path: &Path, json: bool) -> Result<()> {
    let file = if path.is_dir() { path.join(DRIVER_REPORT) } else { path.to_path_buf() };
    if json {
        let mut text = String::new();
        open(&file)?.read_to_string(&mut text).map_err(|e| io_err(&file, e))?;
        print!("{text}");
        return Ok(());
    }
    print!("{}", format_report(&load_driver_report(&file)?));
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Filter { input, output, stats } => {
            let mut w = create(&output)?;
            let counts = filter_jsonl(open(&input)?, &mut w)?;
            with_output(stats.as_deref(), |w| {
                counts.write_json(&mut *w)?;
                writeln!(w).map_err(|e| io_err(Path::new("<stats>"), e))
            })
        }
        Command::Panel(args) => panel(&args),
        Command::Scenario(args) => scenario(&args),
        Command::Rank {
            empirical,
            scenarios,
            metric,
            output,
        } => {
            let empirical = read_series(&empirical)?;
            let series = scenarios
                .iter()
                .map(|(name, path)| Ok((name.clone(), read_series(path)?)))
                .collect::<Result<Vec<_>>>()?;
            let report = rank_drivers(&empirical, &series, metric)?;
            let text = report.to_json()? + "\n";
            with_output(output.as_deref(), |w| {
                w.write_all(text.as_bytes()).map_err(|e| io_err(Path::new("<report>"), e))
            })
        }
        Command::Dims(command) => dims(&command, cli.seed),
        Command::Compare { left, right } => {
            let r = compare(&read_series(&left)?, &read_series(&right)?)?;
            print!("{}", compare_json(&r));
            Ok(())
        }
        Command::Run { config, output_dir } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            if let Some(dir) = output_dir {
                config.output_dir = dir;
            }
            let summary = run_pipeline(&config)?;
            eprintln!(
                "{} events in window, {} facets; artifacts in {}",
                summary.events_in_window,
                summary.facets.len(),
                config.output_dir.display()
            );
            if let Some(report) = &summary.report {
                print!("{}", format_report(&report.rows));
            }
            Ok(())
        }
        Command::Report { path, json } => report(&path, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
