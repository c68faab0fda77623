//! Command-line front end.
//!
//! Exit status: 0 success, 2 usage/validation/configuration error, 3 input
//! parse error, 4 empty result.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gridmap_core::analytics::count_alert_criteria;
use gridmap_core::{
    aggregate_stage, category_counts, cause_share, cell_share, emit_flow_data,
    sensitivity_compare, timeline, top_categories_share, AnalyticsError, Axis, Cause, Cell,
    Direction, EventDataset, Measure, SentinelValue, StageDistribution,
};

use crate::config::{sha256_hex, ConfigError, ConfigPaths, ConfigText, Configuration};
use crate::ingest::{dataset_to_json, read_dataset, IngestMode, LoadError, LoadOptions};
use crate::render::{Format, Report, Table, Value, TOOL_NAME, TOOL_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "gridmap",
    version,
    about = "Map electric disturbance reports onto disruption sources and propagation paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize annual summary CSV files into a dataset.
    Ingest(IngestArgs),
    /// Event counts per canonical category.
    Categories(CategoriesArgs),
    /// Stage distributions over the scope, direction and domain axes.
    Map(MapArgs),
    /// Per-year totals and nonzero-customer counts per category.
    Timeline(TimelineArgs),
    /// Event-type mapping against alert-criteria mapping.
    Sensitivity(CommonArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Canonical dataset JSON, or one or more annual summary CSV files.
    #[arg(long = "dataset", required = true, num_args = 1..)]
    datasets: Vec<PathBuf>,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    overrides: Option<PathBuf>,
    /// Directory holding taxonomy.json, profile.json and overrides.json.
    #[arg(long, env = "GRIDMAP_CONFIG_DIR")]
    config_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MeasureArg::All)]
    measure: MeasureArg,
    /// Inclusive report-year range, `YYYY-YYYY` or `YYYY`.
    #[arg(long, value_parser = parse_years)]
    years: Option<(i32, i32)>,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// categories: show only rows whose count exceeds N. Display only.
    #[arg(long, default_value_t = 0)]
    min_count: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abort on the first bad row (default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip bad rows and report them as warnings.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct CategoriesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also report the combined share of the K largest categories.
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args, Debug)]
struct MapArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Single axis; all three when omitted.
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    /// Apply the alert-criteria overrides (implied by --overrides).
    #[arg(long)]
    with_overrides: bool,
}

#[derive(Args, Debug)]
struct TimelineArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Category to chart; repeatable. Defaults to the three largest.
    #[arg(long = "category")]
    categories: Vec<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MeasureArg {
    All,
    Demand,
    Customers,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::All => Measure::AllEvents,
            MeasureArg::Demand => Measure::NonzeroDemandLoss,
            MeasureArg::Customers => Measure::NonzeroCustomersAffected,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AxisArg {
    Scope,
    Direction,
    Domain,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Scope => Axis::Scope,
            AxisArg::Direction => Axis::Direction,
            AxisArg::Domain => Axis::Domain,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn parse_years(raw: &str) -> Result<(i32, i32), String> {
    let year = |s: &str| {
        s.trim()
            .parse::<i32>()
            .map_err(|_| format!("invalid year {s:?} (expected YYYY-YYYY)"))
    };
    let (lo, hi) = match raw.split_once('-') {
        Some((a, b)) => (year(a)?, year(b)?),
        None => {
            let y = year(raw)?;
            (y, y)
        }
    };
    if lo > hi {
        return Err(format!("year range {lo}-{hi} is reversed"));
    }
    Ok((lo, hi))
}

/// A failed run: exit status plus message for standard error.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: err.to_string(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(err: LoadError) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: err.to_string(),
        }
    }
}

impl From<AnalyticsError> for Failure {
    fn from(err: AnalyticsError) -> Self {
        let code = match err {
            AnalyticsError::EmptyDistribution => EXIT_EMPTY,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status. Output goes to `out` unless `--out` names a file.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
            return code;
        }
    };
    match execute(cli.command, err) {
        Ok((text, None)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            EXIT_OK
        }
        Ok((text, Some(path))) => match fs::write(&path, text) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                EXIT_USAGE
            }
        },
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

struct Session {
    config: Configuration,
    dataset: EventDataset,
    dataset_sha256: String,
    measure: Measure,
    format: Format,
}

impl Session {
    fn open(common: &CommonArgs) -> Result<Self, Failure> {
        let config = Configuration::load(&ConfigPaths {
            dir: common.config_dir.clone(),
            taxonomy: common.taxonomy.clone(),
            profile: common.profile.clone(),
            overrides: common.overrides.clone(),
        })?;
        let options = LoadOptions {
            mode: if common.lenient {
                IngestMode::Lenient
            } else {
                IngestMode::Strict
            },
            ..LoadOptions::default()
        };
        let mut dataset = read_dataset(&common.datasets, &options)?;
        if let Some((lo, hi)) = common.years {
            dataset = dataset.subset(|e| (lo..=hi).contains(&e.year));
        }
        let dataset_sha256 = sha256_hex(dataset_to_json(&dataset).as_bytes());
        Ok(Session {
            config,
            dataset,
            dataset_sha256,
            measure: common.measure.into(),
            format: common.format.into(),
        })
    }

    fn report(&self, command: &str, common: &CommonArgs) -> Report {
        let stamp = |text: &ConfigText| (text.origin(), text.sha256());
        let (tax_src, tax_sha) = stamp(&self.config.taxonomy_text);
        let (prof_src, prof_sha) = stamp(&self.config.profile_text);
        let (ovr_src, ovr_sha) = stamp(&self.config.overrides_text);
        let mut request = vec![("measure".to_string(), self.measure.name().to_string())];
        if let Some((lo, hi)) = common.years {
            request.push(("years".into(), format!("{lo}-{hi}")));
        }
        if common.min_count > 0 {
            request.push(("min_count".into(), common.min_count.to_string()));
        }
        Report {
            command: command.to_string(),
            provenance: vec![
                ("tool".into(), TOOL_NAME.into()),
                ("tool_version".into(), TOOL_VERSION.into()),
                ("dataset_sha256".into(), self.dataset_sha256.clone()),
                ("dataset_events".into(), self.dataset.len().to_string()),
                ("taxonomy".into(), tax_src),
                ("taxonomy_sha256".into(), tax_sha),
                ("profile".into(), prof_src),
                ("profile_sha256".into(), prof_sha),
                ("overrides".into(), ovr_src),
                ("overrides_sha256".into(), ovr_sha),
            ],
            request,
            ..Report::default()
        }
    }
}

type Output = (String, Option<PathBuf>);

fn execute(command: Command, err: &mut dyn Write) -> Result<Output, Failure> {
    match command {
        Command::Ingest(args) => run_ingest(&args.common, err),
        Command::Categories(args) => run_categories(&args),
        Command::Map(args) => run_map(&args),
        Command::Timeline(args) => run_timeline(&args),
        Command::Sensitivity(common) => run_sensitivity(&common),
    }
}

fn sentinel_cell(value: &SentinelValue) -> Value {
    match value {
        SentinelValue::Positive(x) => Value::Num(*x),
        SentinelValue::Zero => Value::Num(0.0),
        SentinelValue::Unknown => "unknown".into(),
        SentinelValue::NotApplicable => "n/a".into(),
        SentinelValue::NoneEntry => "none".into(),
        SentinelValue::Missing => "".into(),
    }
}

fn run_ingest(common: &CommonArgs, err: &mut dyn Write) -> Result<Output, Failure> {
    let session = Session::open(common)?;
    for warning in session.dataset.ingest_warnings() {
        let _ = writeln!(err, "warning: {warning}");
    }
    if session.format == Format::Json {
        return Ok((dataset_to_json(&session.dataset), common.out.clone()));
    }
    let mut report = session.report("ingest", common);
    let mut table = Table::new([
        "event_id",
        "year",
        "began",
        "restored",
        "area",
        "nerc_region",
        "event_type",
        "alert_criteria",
        "demand_loss_mw",
        "customers_affected",
    ]);
    let stamp = |t: &Option<gridmap_core::Timestamp>| t.map(|t| t.to_string()).unwrap_or_default();
    for e in session.dataset.events() {
        table.push(vec![
            e.event_id.as_str().into(),
            e.year.into(),
            stamp(&e.began).into(),
            stamp(&e.restored).into(),
            e.area.as_str().into(),
            e.nerc_region.as_str().into(),
            e.raw_event_type.as_str().into(),
            e.alert_criteria.clone().unwrap_or_default().into(),
            sentinel_cell(&e.demand_loss),
            sentinel_cell(&e.customers_affected),
        ]);
    }
    report.table = table;
    let rows: usize = session.dataset.provenance().iter().map(|f| f.rows).sum();
    let rejected: usize = session.dataset.provenance().iter().map(|f| f.rejected).sum();
    report.summary = vec![
        ("events".into(), (session.dataset.len() as u64).into()),
        ("rows_read".into(), (rows as u64).into()),
        ("rows_rejected".into(), (rejected as u64).into()),
        ("warnings".into(), (session.dataset.ingest_warnings().len() as u64).into()),
    ];
    Ok((report.render(session.format), common.out.clone()))
}

fn run_categories(args: &CategoriesArgs) -> Result<Output, Failure> {
    let common = &args.common;
    let session = Session::open(common)?;
    let counts = category_counts(&session.dataset, &session.config.taxonomy, session.measure);
    let total: u64 = counts.iter().map(|(_, n)| n).sum();
    let mut report = session.report("categories", common);
    let mut table = Table::new(["category", "count", "share"]);
    for (category, count) in &counts {
        if *count > common.min_count {
            let share = if total == 0 { 0.0 } else { *count as f64 / total as f64 };
            table.push(vec![category.name.as_str().into(), (*count).into(), share.into()]);
        }
    }
    report.table = table;
    report.summary = vec![
        ("events".into(), total.into()),
        ("categories".into(), (counts.len() as u64).into()),
    ];
    if let Some(k) = args.top {
        let (top, share) = top_categories_share(&session.dataset, &session.config.taxonomy, session.measure, k)?;
        let names: Vec<&str> = top.iter().map(|c| c.name.as_str()).collect();
        report.request.push(("top".into(), k.to_string()));
        report.summary.push(("top_categories".into(), names.join("; ").into()));
        report.summary.push(("top_share".into(), share.into()));
    }
    Ok((report.render(session.format), common.out.clone()))
}

fn share_summary(dist: &StageDistribution) -> Result<Vec<(String, Value)>, AnalyticsError> {
    let axis = dist.axis().name();
    let mut out = vec![(format!("{axis}.event_count"), dist.event_count().into())];
    if dist.axis() != Axis::Domain {
        for cause in [Cause::Human, Cause::Nature] {
            out.push((format!("{axis}.{}_share", cause.name()), cause_share(dist, cause)?.into()));
        }
    }
    if dist.axis() == Axis::Direction {
        let downstream = cell_share(dist, |c| matches!(c, Cell::Direction(_, Direction::Downstream)))?;
        out.push((format!("{axis}.downstream_share"), downstream.into()));
    }
    Ok(out)
}

fn run_map(args: &MapArgs) -> Result<Output, Failure> {
    let common = &args.common;
    let session = Session::open(common)?;
    let config = &session.config;
    let apply = args.with_overrides || common.overrides.is_some();
    let overrides = apply.then_some(config.overrides.as_slice());
    let axes: Vec<Axis> = match args.axis {
        Some(a) => vec![a.into()],
        None => Axis::ALL.to_vec(),
    };
    let mut distributions = Vec::new();
    for axis in &axes {
        let dist = aggregate_stage(
            &session.dataset,
            &config.taxonomy,
            &config.profile,
            overrides,
            session.measure,
            *axis,
        )?;
        if dist.event_count() == 0 {
            return Err(AnalyticsError::EmptyDistribution.into());
        }
        distributions.push(dist);
    }
    let mut report = session.report("map", common);
    if let Some(a) = args.axis {
        report.request.push(("axis".into(), Axis::from(a).name().into()));
    }
    report
        .request
        .push(("overrides_applied".into(), apply.to_string()));
    let mut table = Table::new(["axis", "cell", "mass", "share"]);
    for dist in &distributions {
        let total = dist.total_mass();
        for (cell, mass) in dist.cells() {
            table.push(vec![
                dist.axis().name().into(),
                cell.key().into(),
                mass.into(),
                (mass / total).into(),
            ]);
        }
        report.summary.extend(share_summary(dist)?);
    }
    report.table = table;
    let flow = emit_flow_data(&distributions)?;
    report.extra = vec![
        ("distributions".into(), to_json(&distributions)),
        ("flow".into(), to_json(&flow)),
    ];
    Ok((report.render(session.format), common.out.clone()))
}

fn run_timeline(args: &TimelineArgs) -> Result<Output, Failure> {
    let common = &args.common;
    let session = Session::open(common)?;
    let taxonomy = &session.config.taxonomy;
    let names: Vec<String> = if args.categories.is_empty() {
        category_counts(&session.dataset, taxonomy, Measure::AllEvents)
            .into_iter()
            .take(3)
            .map(|(c, _)| c.name)
            .collect()
    } else {
        args.categories.clone()
    };
    if names.is_empty() {
        return Err(AnalyticsError::EmptyDistribution.into());
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let series = timeline(&session.dataset, taxonomy, &refs, common.years)?;
    let mut report = session.report("timeline", common);
    report.request.retain(|(k, _)| k != "measure");
    report.request.push(("categories".into(), names.join("; ")));
    let mut table = Table::new(["category", "year", "total", "nonzero_customers"]);
    for s in &series {
        for p in &s.points {
            table.push(vec![
                s.category.as_str().into(),
                p.year.into(),
                p.total.into(),
                p.nonzero_customers.into(),
            ]);
        }
    }
    report.table = table;
    report.extra = vec![("series".into(), to_json(&series))];
    Ok((report.render(session.format), common.out.clone()))
}

fn run_sensitivity(common: &CommonArgs) -> Result<Output, Failure> {
    let session = Session::open(common)?;
    let config = &session.config;
    if config.overrides.is_empty() {
        return Err(usage("no alert-criteria overrides configured"));
    }
    let subset = session.dataset.subset(|e| e.alert_criteria.is_some());
    let result = sensitivity_compare(
        &subset,
        &config.taxonomy,
        &config.profile,
        &config.overrides,
        session.measure,
    )?;
    let mut report = session.report("sensitivity", common);
    let mut table = Table::new([
        "category",
        "axis",
        "cell",
        "event_type_mass",
        "alert_criteria_mass",
        "difference",
    ]);
    for category in &result.categories {
        for axis in &category.axes {
            for cell in &axis.cells {
                table.push(vec![
                    category.category.as_str().into(),
                    axis.axis.name().into(),
                    cell.cell.key().into(),
                    cell.event_type_mass.into(),
                    cell.alert_criteria_mass.into(),
                    cell.difference.into(),
                ]);
            }
        }
    }
    report.table = table;
    report.summary.push(("events".into(), result.event_count.into()));
    match &result.largest_discrepancy {
        Some(d) => {
            report.summary.push((
                "largest_discrepancy".into(),
                format!("{} / {} / {}", d.category, d.axis.name(), d.cell.key()).into(),
            ));
            report.summary.push(("largest_difference".into(), d.difference.into()));
        }
        None => report
            .summary
            .push(("largest_discrepancy".into(), "none".into())),
    }
    let mut matches = Vec::new();
    for (i, rule) in config.overrides.iter().enumerate() {
        let n = count_alert_criteria(&subset, &config.taxonomy, rule.category(), rule.criteria_pattern());
        report.summary.push((
            format!("override.{i}"),
            format!("{}: {}", rule.category(), rule.criteria_pattern()).into(),
        ));
        report.summary.push((format!("override.{i}.events"), n.into()));
        matches.push(json!({
            "category": rule.category(),
            "criteria_contains": rule.criteria_pattern(),
            "events": n,
        }));
    }
    report.extra = vec![
        ("sensitivity".into(), to_json(&result)),
        ("override_matches".into(), serde_json::Value::Array(matches)),
    ];
    Ok((report.render(session.format), common.out.clone()))
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("report data serializes")
}

