//! The `commute-frontier` command surface.
//!
//! [`run`] takes an argument vector and returns the exit code plus whatever
//! would have gone to stdout and stderr, so the whole command line can be
//! driven from tests without spawning a process. Exit codes: 0 success,
//! 1 data or computation error, 2 usage error.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dataset::{self, CommunityTable, Field, ValidationReport};
use crate::drivecost::{self, DrivingCostParams};
use crate::frontier::{self, BudgetConstraint, CurveBasis, DriveBasis, TotalCostCurve, Window};
use crate::plot;
use crate::regress::{self, sig4, PolynomialModel};
use crate::stats;
use crate::{Error, Year};

/// Environment variable consulted when `--input` is not given.
pub const INPUT_ENV: &str = "COMMUTE_FRONTIER_INPUT";

/// Columns diagnosed when `--columns` is not given.
pub const DEFAULT_DIAGNOSE_COLUMNS: [&str; 10] = [
    "income_2011",
    "income_2016",
    "shelter_2011",
    "shelter_2016",
    "drive_annual_2011",
    "drive_annual_2016",
    "total_2011",
    "total_2016",
    "pct_2011",
    "pct_2016",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum YearArg {
    #[value(name = "2011")]
    Y2011,
    #[value(name = "2016")]
    Y2016,
    Both,
}

impl YearArg {
    fn years(self) -> Vec<Year> {
        match self {
            YearArg::Y2011 => vec![Year::Y2011],
            YearArg::Y2016 => vec![Year::Y2016],
            YearArg::Both => Year::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriveArg {
    /// Closed-form component model.
    Model,
    /// Linear regression of the component model over the table's distances.
    Regression,
}

impl From<DriveArg> for DriveBasis {
    fn from(d: DriveArg) -> Self {
        match d {
            DriveArg::Model => DriveBasis::CostModel,
            DriveArg::Regression => DriveBasis::Regression,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    /// Shelter, driving and total cost curves with budget guidelines.
    Cost,
    /// Shelter-plus-driving share of income with percentage guidelines.
    Percent,
}

#[derive(Debug, Parser)]
#[command(name = "commute-frontier", version, about = "Income-constrained commuting distance model")]
struct Cli {
    /// Community table CSV, or `builtin` for the embedded sample.
    #[arg(long, global = true, env = INPUT_ENV, default_value = "builtin")]
    input: String,
    /// Output format; defaults to text (svg for `plot`).
    #[arg(long, global = true, value_enum)]
    output: Option<OutputFormat>,
    /// Largest admissible distance in the table, km.
    #[arg(long, global = true)]
    domain_max: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a community table against its invariants.
    Validate,
    /// Fit the per-km tire rate and reconstruct observed driving costs.
    Calibrate {
        #[arg(long, value_enum, default_value = "both")]
        year: YearArg,
    },
    /// Monthly and annual driving cost by component.
    DriveCost(DriveCostArgs),
    /// Polynomial regression of one column on distance.
    Fit {
        #[arg(long, default_value = "shelter_2011")]
        response: String,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        degree: Vec<usize>,
    },
    /// Ryan-Joiner normality and Moran's I per column.
    Diagnose {
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// `name,x_km,y_km` CSV; Moran's I is skipped without it.
        #[arg(long)]
        coords: Option<String>,
        #[arg(long, default_value = "knn:4")]
        weights: String,
        #[arg(long, default_value_t = 999)]
        permutations: usize,
        #[arg(long, default_value_t = 20_110_516)]
        seed: u64,
    },
    /// Feasibility boundaries d1, d2 and the indifference point.
    Frontier {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_delimiter = ',', default_value = "60000")]
        income: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.30,0.35,0.42,0.45")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10,156")]
        window: Vec<f64>,
    },
    /// Commuting-limit table over incomes and budget shares.
    Limits {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_delimiter = ',', default_value = "30000,40000,50000,60000")]
        income: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.42,0.45")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,250")]
        window: Vec<f64>,
    },
    /// Side-by-side 2011 and 2016 quantities with signed deltas.
    CompareYears {
        #[arg(long, default_value_t = 60_000.0)]
        income: f64,
        #[arg(long, default_value_t = 0.42)]
        p: f64,
    },
    /// SVG figure, or its underlying series as CSV/JSON.
    Plot {
        #[arg(long, value_enum, default_value = "cost")]
        figure: FigureArg,
        #[arg(long, default_value_t = 60_000.0)]
        income: f64,
        #[arg(long, value_enum, default_value = "both")]
        year: YearArg,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, value_enum, default_value = "model")]
        drive: DriveArg,
        #[arg(long, value_delimiter = ',', default_value = "10,156")]
        window: Vec<f64>,
    },
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, value_enum, default_value = "both")]
    year: YearArg,
    /// Shelter polynomial degree.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, value_enum)]
    drive: Option<DriveArg>,
    /// Monthly second-mode cost.
    #[arg(long, default_value_t = 0.0)]
    second_mode: f64,
    /// Monthly parking cost.
    #[arg(long, default_value_t = 0.0)]
    parking: f64,
}

#[derive(Debug, Args)]
struct DriveCostArgs {
    #[arg(long, value_enum, default_value = "2011")]
    year: YearArg,
    #[arg(long, value_delimiter = ',', default_value = "10,50,100,156")]
    distance: Vec<f64>,
    /// JSON parameter document keyed by year.
    #[arg(long)]
    params: Option<String>,
    /// Replace the tire rate with the least-squares calibration on the table.
    #[arg(long)]
    calibrate: bool,
    #[arg(long)]
    fuel_price: Option<f64>,
    #[arg(long)]
    fuel_economy: Option<f64>,
    #[arg(long)]
    insurance: Option<f64>,
    #[arg(long)]
    licence: Option<f64>,
    #[arg(long)]
    finance: Option<f64>,
    #[arg(long)]
    maintenance_rate: Option<f64>,
    #[arg(long)]
    tire_rate: Option<f64>,
    #[arg(long)]
    dep_flat: Option<f64>,
    #[arg(long)]
    dep_rate: Option<f64>,
    #[arg(long)]
    dep_threshold_km: Option<f64>,
    #[arg(long)]
    workdays_per_week: Option<u32>,
    #[arg(long)]
    weeks_per_year: Option<u32>,
}

enum Failure {
    Usage(String),
    Data { message: String, report: Option<ValidationReport> },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Data {
                message: other.to_string(),
                report: None,
            },
        }
    }
}

type CmdResult = std::result::Result<String, Failure>;

/// Parses `argv` (program name first) and executes one subcommand.
pub fn run<I, T>(argv: I) -> RunOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => RunOutcome {
                    code: 0,
                    stdout: rendered,
                    stderr: String::new(),
                },
                _ => RunOutcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: rendered,
                },
            };
        }
    };
    match execute(&cli) {
        Ok(stdout) => RunOutcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => RunOutcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Data { message, report }) => {
            let mut stderr = format!("error: {message}\n");
            if let Some(r) = report {
                stderr.push_str(&r.to_text());
            }
            RunOutcome {
                code: 1,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Validate => cmd_validate(cli),
        Command::Calibrate { year } => cmd_calibrate(cli, *year),
        Command::DriveCost(args) => cmd_drive_cost(cli, args),
        Command::Fit { response, degree } => cmd_fit(cli, response, degree),
        Command::Diagnose {
            columns,
            coords,
            weights,
            permutations,
            seed,
        } => cmd_diagnose(cli, columns, coords.as_deref(), weights, *permutations, *seed),
        Command::Frontier { curve, income, p, window } => cmd_frontier(cli, curve, income, p, window),
        Command::Limits { curve, income, p, window } => cmd_limits(cli, curve, income, p, window),
        Command::CompareYears { income, p } => cmd_compare(cli, *income, *p),
        Command::Plot {
            figure,
            income,
            year,
            degree,
            drive,
            window,
        } => cmd_plot(cli, *figure, *income, *year, *degree, *drive, window),
    }
}

fn read_table(cli: &Cli) -> std::result::Result<CommunityTable, Failure> {
    let table = if cli.input == "builtin" {
        CommunityTable::builtin()
    } else {
        dataset::load_path(&cli.input)?
    };
    Ok(match cli.domain_max {
        Some(km) if !(km.is_finite() && km > 0.0) => {
            return Err(Failure::Usage(format!("--domain-max must be > 0, got {km}")));
        }
        Some(km) => table.with_domain_max(km),
        None => table,
    })
}

/// Loads the table and refuses to go on if validation finds errors.
fn usable_table(cli: &Cli) -> std::result::Result<CommunityTable, Failure> {
    let table = read_table(cli)?;
    let report = dataset::validate_table(&table);
    if !report.is_usable() {
        return Err(Failure::Data {
            message: "input table failed validation".into(),
            report: Some(report),
        });
    }
    Ok(table)
}

fn format_of(cli: &Cli, default: OutputFormat, allowed: &[OutputFormat]) -> std::result::Result<OutputFormat, Failure> {
    let f = cli.output.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Usage(format!(
            "this subcommand does not support --output {}",
            f.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
        )))
    }
}

fn to_json(v: &Value) -> CmdResult {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn csv_doc(header: &[&str], rows: Vec<Vec<String>>) -> CmdResult {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Data {
        message: e.to_string(),
        report: None,
    };
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Data {
        message: e.to_string(),
        report: None,
    })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn opt_str(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_km(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

fn window_arg(v: &[f64]) -> std::result::Result<Window, Failure> {
    match v {
        [lo, hi] => Window::new(*lo, *hi).map_err(|e| Failure::Usage(e.to_string())),
        _ => Err(Failure::Usage(format!("--window takes `lo,hi`, got {} value(s)", v.len()))),
    }
}

fn check_degree(d: usize) -> std::result::Result<usize, Failure> {
    if (1..=3).contains(&d) {
        Ok(d)
    } else {
        Err(Failure::Usage(format!("--degree must be 1, 2 or 3, got {d}")))
    }
}

fn cmd_validate(cli: &Cli) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let table = read_table(cli)?;
    let report = dataset::validate_table(&table);
    if !report.is_usable() {
        return Err(Failure::Data {
            message: format!("{} error(s) in {}", report.errors.len(), cli.input),
            report: Some(report),
        });
    }
    match format {
        OutputFormat::Json => to_json(&json!({
            "command": "validate",
            "input": cli.input,
            "records": table.len(),
            "usable": true,
            "errors": report.errors,
            "warnings": report.warnings,
        })),
        OutputFormat::Csv => csv_doc(
            &["kind", "record", "field", "message"],
            report
                .warnings
                .iter()
                .map(|f| vec!["warning".into(), f.record.clone(), f.field.clone(), f.message.clone()])
                .collect(),
        ),
        _ => Ok(format!("{} record(s) in {}\n{}", table.len(), cli.input, report.to_text())),
    }
}

struct Reconstruction {
    year: Year,
    tire_rate: f64,
    rows: Vec<(String, f64, f64, f64)>,
    fit: PolynomialModel,
}

fn reconstruct(table: &CommunityTable, year: Year) -> crate::Result<Reconstruction> {
    let base = DrivingCostParams::for_year(year);
    let rate = drivecost::calibrate_tire_rate(table, &base, year)?;
    let params = base.with_tire_rate(rate);
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for r in &table.records {
        let model = drivecost::monthly_driving_cost(r.distance_km, &params)?;
        pairs.push((r.distance_km, model));
        if let Some(obs) = r.drive(year) {
            rows.push((r.name.clone(), r.distance_km, obs, model));
        }
    }
    Ok(Reconstruction {
        year,
        tire_rate: rate,
        rows,
        fit: regress::fit_pairs(&pairs, 1)?,
    })
}

fn rel_error(obs: f64, model: f64) -> f64 {
    (model - obs) / obs
}

fn cmd_calibrate(cli: &Cli, year: YearArg) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let table = usable_table(cli)?;
    let recs = year
        .years()
        .into_iter()
        .map(|y| reconstruct(&table, y))
        .collect::<crate::Result<Vec<_>>>()?;
    match format {
        OutputFormat::Json => {
            let years: Vec<Value> = recs
                .iter()
                .map(|r| {
                    let max_err = r.rows.iter().map(|(_, _, o, m)| rel_error(*o, *m).abs()).fold(0.0, f64::max);
                    json!({
                        "year": r.year,
                        "tire_rate": r.tire_rate,
                        "max_abs_relative_error": max_err,
                        "monthly_cost_fit": r.fit,
                        "rows": r.rows.iter().map(|(name, d, o, m)| json!({
                            "name": name,
                            "distance_km": d,
                            "observed_monthly": o,
                            "model_monthly": m,
                            "relative_error": rel_error(*o, *m),
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            to_json(&json!({ "command": "calibrate", "years": years }))
        }
        OutputFormat::Csv => csv_doc(
            &["year", "name", "distance_km", "observed_monthly", "model_monthly", "relative_error"],
            recs.iter()
                .flat_map(|r| {
                    r.rows.iter().map(move |(name, d, o, m)| {
                        vec![
                            r.year.to_string(),
                            name.clone(),
                            d.to_string(),
                            o.to_string(),
                            m.to_string(),
                            rel_error(*o, *m).to_string(),
                        ]
                    })
                })
                .collect(),
        ),
        _ => {
            let mut out = String::new();
            for r in &recs {
                let max_err = r.rows.iter().map(|(_, _, o, m)| rel_error(*o, *m).abs()).fold(0.0, f64::max);
                let _ = writeln!(out, "{}: tire rate {} $/km", r.year, sig4(r.tire_rate));
                let _ = writeln!(out, "  max |relative error| {:.2}% over {} rows", 100.0 * max_err, r.rows.len());
                let _ = writeln!(
                    out,
                    "  monthly cost = {} + {} d  (r2 {})",
                    sig4(r.fit.coefficients[0]),
                    sig4(r.fit.coefficients[1]),
                    sig4(r.fit.r2)
                );
                let _ = writeln!(out, "  {:<24}{:>10}{:>12}{:>12}{:>9}", "community", "km", "observed", "model", "err %");
                for (name, d, o, m) in &r.rows {
                    let _ = writeln!(
                        out,
                        "  {:<24}{:>10.1}{:>12.2}{:>12.2}{:>9.2}",
                        name,
                        d,
                        o,
                        m,
                        100.0 * rel_error(*o, *m)
                    );
                }
            }
            Ok(out)
        }
    }
}

fn drive_params(args: &DriveCostArgs, year: Year, table: Option<&CommunityTable>) -> crate::Result<DrivingCostParams> {
    let mut p = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let set = drivecost::params_from_json(&text)?;
            set.get(year.label())
                .cloned()
                .ok_or_else(|| Error::Config(format!("parameter file {path} has no entry for {year}")))?
        }
        None => DrivingCostParams::for_year(year),
    };
    macro_rules! apply {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field { p.$field = v; })*
        };
    }
    apply!(
        fuel_price,
        fuel_economy,
        insurance,
        licence,
        finance,
        maintenance_rate,
        tire_rate,
        dep_flat,
        dep_rate,
        dep_threshold_km,
        workdays_per_week,
        weeks_per_year
    );
    p.validate().map_err(|e| Error::Config(e.to_string()))?;
    if args.calibrate {
        let table = table.expect("table loaded when calibrating");
        let rate = drivecost::calibrate_tire_rate(table, &p, year)?;
        p = p.with_tire_rate(rate);
    }
    Ok(p)
}

fn cmd_drive_cost(cli: &Cli, args: &DriveCostArgs) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let table = if args.calibrate { Some(usable_table(cli)?) } else { None };
    let mut blocks = Vec::new();
    for y in args.year.years() {
        let params = drive_params(args, y, table.as_ref())?;
        let rows = args
            .distance
            .iter()
            .map(|&d| Ok((d, drivecost::annual_driving_cost(d, &params)?)))
            .collect::<crate::Result<Vec<_>>>()?;
        blocks.push((params, rows));
    }
    match format {
        OutputFormat::Json => to_json(&json!({
            "command": "drive-cost",
            "years": blocks.iter().map(|(p, rows)| json!({
                "params": p,
                "depreciation_kink_km": p.depreciation_kink_km(),
                "costs": rows.iter().map(|(d, b)| json!({ "distance_km": d, "breakdown": b })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => csv_doc(
            &[
                "year",
                "distance_km",
                "annual_km",
                "gas",
                "insurance",
                "licence",
                "depreciation",
                "finance",
                "maintenance",
                "tires",
                "total_annual",
                "total_monthly",
            ],
            blocks
                .iter()
                .flat_map(|(p, rows)| {
                    rows.iter().map(move |(d, b)| {
                        vec![
                            p.year_label.clone(),
                            d.to_string(),
                            b.annual_km.to_string(),
                            b.gas.to_string(),
                            b.insurance.to_string(),
                            b.licence.to_string(),
                            b.depreciation.to_string(),
                            b.finance.to_string(),
                            b.maintenance.to_string(),
                            b.tires.to_string(),
                            b.total_annual.to_string(),
                            b.total_monthly.to_string(),
                        ]
                    })
                })
                .collect(),
        ),
        _ => {
            let mut out = String::new();
            for (p, rows) in &blocks {
                let _ = writeln!(
                    out,
                    "{}: tire rate {} $/km, depreciation kink at {:.2} km",
                    p.year_label,
                    sig4(p.tire_rate),
                    p.depreciation_kink_km()
                );
                let _ = writeln!(
                    out,
                    "{:>8}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>11}{:>10}",
                    "km", "gas", "insur.", "licence", "deprec.", "finance", "maint.", "tires", "annual", "km/yr", "monthly"
                );
                for (d, b) in rows {
                    let _ = writeln!(
                        out,
                        "{:>8.1}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>11.0}{:>10.2}",
                        d,
                        b.gas,
                        b.insurance,
                        b.licence,
                        b.depreciation,
                        b.finance,
                        b.maintenance,
                        b.tires,
                        b.total_annual,
                        b.annual_km,
                        b.total_monthly
                    );
                }
            }
            Ok(out)
        }
    }
}

fn cmd_fit(cli: &Cli, response: &str, degrees: &[usize]) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let field: Field = response.parse()?;
    for &d in degrees {
        check_degree(d)?;
    }
    let table = usable_table(cli)?;
    let pairs = table.against_distance(field);
    let models = degrees
        .iter()
        .map(|&d| regress::fit_pairs(&pairs, d))
        .collect::<crate::Result<Vec<_>>>()?;
    match format {
        OutputFormat::Json => to_json(&json!({
            "command": "fit",
            "response": field.to_string(),
            "regressor": "distance_km",
            "models": models,
        })),
        OutputFormat::Csv => {
            let mut rows = Vec::new();
            for m in &models {
                for j in 0..m.coefficients.len() {
                    rows.push(vec![
                        field.to_string(),
                        m.degree.to_string(),
                        j.to_string(),
                        m.coefficients[j].to_string(),
                        m.coef_se[j].to_string(),
                        m.coef_p[j].to_string(),
                        m.r2.to_string(),
                        m.f_statistic.to_string(),
                        m.overall_p.to_string(),
                        m.n.to_string(),
                    ]);
                }
            }
            csv_doc(
                &["response", "degree", "power", "coefficient", "std_error", "p_value", "r2", "f_statistic", "overall_p", "n"],
                rows,
            )
        }
        _ => {
            let mut out = String::new();
            for m in &models {
                let _ = writeln!(out, "{} on distance_km, degree {}", field, m.degree);
                out.push_str(&m.to_table_text());
                out.push('\n');
            }
            Ok(out)
        }
    }
}

struct DiagnoseRow {
    column: String,
    n: usize,
    mean: f64,
    rj: stats::DiagnosticResult,
    moran: Option<stats::DiagnosticResult>,
}

fn cmd_diagnose(
    cli: &Cli,
    columns: &[String],
    coords: Option<&str>,
    weights: &str,
    permutations: usize,
    seed: u64,
) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let fields = if columns.is_empty() {
        DEFAULT_DIAGNOSE_COLUMNS.iter().map(|c| c.parse()).collect::<crate::Result<Vec<Field>>>()?
    } else {
        columns.iter().map(|c| c.parse()).collect::<crate::Result<Vec<Field>>>()?
    };
    let spec: stats::WeightsSpec = weights.parse()?;
    if permutations == 0 {
        return Err(Failure::Usage("--permutations must be >= 1".into()));
    }
    let table = usable_table(cli)?;
    let w = match coords {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(Error::from)?;
            let c = dataset::load_coordinates(file)?;
            let pts = dataset::align_coordinates(&table, &c)?;
            Some(stats::build_weights(&pts, &spec.to_string())?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for f in fields {
        let values = table.column(f);
        if values.len() != table.len() {
            return Err(Failure::Data {
                message: format!("column `{f}` has missing values"),
                report: None,
            });
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let rj = stats::ryan_joiner(&values)?;
        let moran = match &w {
            Some(w) => Some(stats::morans_i(&values, w, permutations, seed)?),
            None => None,
        };
        rows.push(DiagnoseRow {
            column: f.to_string(),
            n: values.len(),
            mean,
            rj,
            moran,
        });
    }
    match format {
        OutputFormat::Json => to_json(&json!({
            "command": "diagnose",
            "weights": w.as_ref().map(|w| w.spec_label.clone()),
            "permutations": permutations,
            "seed": seed,
            "rows": rows.iter().map(|r| json!({
                "column": r.column,
                "n": r.n,
                "mean": r.mean,
                "ryan_joiner": r.rj,
                "morans_i": r.moran,
            })).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => csv_doc(
            &["column", "n", "mean", "ryan_joiner", "ryan_joiner_p", "ryan_joiner_band", "morans_i", "morans_i_p"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.column.clone(),
                        r.n.to_string(),
                        r.mean.to_string(),
                        r.rj.statistic.to_string(),
                        r.rj.p_value.to_string(),
                        r.rj.detail.clone(),
                        opt_str(r.moran.as_ref().map(|m| m.statistic)),
                        opt_str(r.moran.as_ref().map(|m| m.p_value)),
                    ]
                })
                .collect(),
        ),
        _ => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<20}{:>14}{:>24}{:>22}",
                "Variable", "Mean", "Global Moran's I (p)", "Ryan-Joiner (p)"
            );
            for r in &rows {
                let moran = match &r.moran {
                    Some(m) => format!("{} ({:.3})", sig4(m.statistic), m.p_value),
                    None => "n/a".into(),
                };
                let _ = writeln!(
                    out,
                    "{:<20}{:>14.2}{:>24}{:>22}",
                    r.column,
                    r.mean,
                    moran,
                    format!("{:.3} ({})", r.rj.statistic, r.rj.detail)
                );
            }
            match &w {
                Some(w) => {
                    let _ = writeln!(out, "weights {}, {} permutations, seed {}", w.spec_label, permutations, seed);
                }
                None => out.push_str("Moran's I not computed: no --coords file\n"),
            }
            Ok(out)
        }
    }
}

fn curves_for(
    table: &CommunityTable,
    args: &CurveArgs,
    default: CurveBasis,
) -> std::result::Result<Vec<TotalCostCurve>, Failure> {
    let basis = CurveBasis {
        shelter_degree: check_degree(args.degree.unwrap_or(default.shelter_degree))?,
        drive: args.drive.map(DriveBasis::from).unwrap_or(default.drive),
    };
    let mut curves = frontier::build_year_curves(table, &args.year.years(), basis)?;
    for c in curves.iter_mut() {
        *c = c
            .clone()
            .with_second_mode(args.second_mode)
            .and_then(|c| c.with_parking(args.parking))
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(curves)
}

fn cmd_frontier(cli: &Cli, args: &CurveArgs, incomes: &[f64], ps: &[f64], window: &[f64]) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let window = window_arg(window)?;
    let budgets = incomes
        .iter()
        .flat_map(|&i| ps.iter().map(move |&p| (p, i)))
        .map(|(p, i)| BudgetConstraint::new(p, i).map_err(|e| Failure::Usage(e.to_string())))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let table = usable_table(cli)?;
    let curves = curves_for(&table, args, CurveBasis::COMPOSED_CUBIC)?;
    let mut zones = Vec::new();
    for c in &curves {
        let indifference = frontier::indifference_distance(c, window)?;
        let mut per = Vec::new();
        for b in &budgets {
            per.push((*b, frontier::feasibility_zone(c, b, window)?));
        }
        zones.push((c, indifference, per));
    }
    match format {
        OutputFormat::Json => to_json(&json!({
            "command": "frontier",
            "window": window,
            "curves": zones.iter().map(|(c, ind, per)| json!({
                "label": c.label,
                "curve": c,
                "indifference_km": ind,
                "zones": per.iter().map(|(b, z)| json!({ "budget": b, "zone": z })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => csv_doc(
            &["label", "income_annual", "p", "level_monthly", "d1_km", "d2_km", "indifference_km", "verdict", "extrapolated"],
            zones
                .iter()
                .flat_map(|(c, ind, per)| {
                    per.iter().map(move |(b, z)| {
                        vec![
                            c.label.clone(),
                            b.income_annual.to_string(),
                            b.p.to_string(),
                            z.level_monthly.to_string(),
                            opt_str(z.d1_km()),
                            opt_str(z.d2_km()),
                            opt_str(*ind),
                            verdict_name(z.verdict).into(),
                            z.extrapolated.to_string(),
                        ]
                    })
                })
                .collect(),
        ),
        _ => {
            let mut out = String::new();
            for (c, ind, per) in &zones {
                let _ = writeln!(
                    out,
                    "{}: window [{}, {}] km, R = T at {} km",
                    c.label,
                    window.lo,
                    window.hi,
                    opt_km(*ind)
                );
                let _ = writeln!(
                    out,
                    "  {:>10}{:>6}{:>12}{:>10}{:>10}  verdict",
                    "income", "p", "budget/mo", "d1 km", "d2 km"
                );
                for (b, z) in per {
                    let _ = writeln!(
                        out,
                        "  {:>10}{:>6.2}{:>12.2}{:>10}{:>10}  {}{}",
                        frontier::thousands(b.income_annual),
                        b.p,
                        z.level_monthly,
                        opt_km(z.d1_km()),
                        opt_km(z.d2_km()),
                        verdict_name(z.verdict),
                        if z.extrapolated { " (extrapolated)" } else { "" }
                    );
                }
            }
            Ok(out)
        }
    }
}

fn verdict_name(v: frontier::Verdict) -> &'static str {
    match v {
        frontier::Verdict::FeasibleBand => "feasible_band",
        frontier::Verdict::InfeasibleEverywhere => "infeasible_everywhere",
        frontier::Verdict::FeasibleEverywhereInDomain => "feasible_everywhere_in_domain",
    }
}

fn cmd_limits(cli: &Cli, args: &CurveArgs, incomes: &[f64], ps: &[f64], window: &[f64]) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let window = window_arg(window)?;
    for &p in ps {
        BudgetConstraint::new(p, 1.0).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    for &i in incomes {
        BudgetConstraint::new(0.5, i).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let table = usable_table(cli)?;
    let curves = curves_for(&table, args, CurveBasis::LINEAR_TOTAL)?;
    let limits = frontier::commuting_limits(&curves, incomes, ps, window)?;
    match format {
        OutputFormat::Json => to_json(&json!({ "command": "limits", "table": limits })),
        OutputFormat::Csv => Ok(limits.to_csv()),
        _ => Ok(limits.to_text()),
    }
}

/// One compared quantity.
struct Compared {
    quantity: String,
    unit: &'static str,
    v2011: Option<f64>,
    v2016: Option<f64>,
}

impl Compared {
    fn delta(&self) -> Option<f64> {
        Some(self.v2016? - self.v2011?)
    }
}

fn cmd_compare(cli: &Cli, income: f64, p: f64) -> CmdResult {
    let format = format_of(cli, OutputFormat::Text, &[OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv])?;
    let budget = BudgetConstraint::new(p, income).map_err(|e| Failure::Usage(e.to_string()))?;
    let table = usable_table(cli)?;
    let mut per_year: Vec<Vec<(String, &'static str, Option<f64>)>> = Vec::new();
    for y in Year::ALL {
        let mut q: Vec<(String, &'static str, Option<f64>)> = Vec::new();
        let mean = |f: Field| {
            let v = table.column(f);
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        q.push(("mean income".into(), "$/yr", mean(Field::Income(y))));
        q.push(("mean shelter cost".into(), "$/mo", mean(Field::Shelter(y))));
        q.push(("mean driving cost".into(), "$/mo", mean(Field::Drive(y))));
        q.push(("mean total cost".into(), "$/mo", mean(Field::Total(y))));
        q.push(("mean share of income".into(), "%", mean(Field::Pct(y))));
        for degree in [1, 3] {
            let m = regress::fit_pairs(&table.against_distance(Field::Shelter(y)), degree)?;
            q.push((format!("shelter deg{degree} constant"), "$/mo", Some(m.coefficients[0])));
            if degree == 1 {
                q.push(("shelter deg1 slope".into(), "$/mo/km", Some(m.coefficients[1])));
            }
            q.push((format!("shelter deg{degree} r2"), "", Some(m.r2)));
        }
        let inc = regress::fit_pairs(&table.against_distance(Field::Income(y)), 1)?;
        q.push(("income constant".into(), "$/yr", Some(inc.coefficients[0])));
        q.push(("income slope".into(), "$/yr/km", Some(inc.coefficients[1])));
        let rec = reconstruct(&table, y)?;
        q.push(("tire rate".into(), "$/km", Some(rec.tire_rate)));
        q.push(("driving cost constant".into(), "$/mo", Some(rec.fit.coefficients[0])));
        q.push(("driving cost slope".into(), "$/mo/km", Some(rec.fit.coefficients[1])));
        for (basis, name) in [(CurveBasis::LINEAR_TOTAL, "linear"), (CurveBasis::COMPOSED_CUBIC, "cubic")] {
            let curve = frontier::build_curve(&table, y, basis, &DrivingCostParams::for_year(y))?;
            let zone = frontier::feasibility_zone(&curve, &budget, Window::LIMITS)?;
            q.push((format!("d2 ({name} basis)"), "km", zone.d2_km()));
            q.push((format!("d1 ({name} basis)"), "km", zone.d1_km()));
            q.push((
                format!("indifference ({name} basis)"),
                "km",
                frontier::indifference_distance(&curve, Window::DATA)?,
            ));
        }
        per_year.push(q);
    }
    let rows: Vec<Compared> = per_year[0]
        .iter()
        .zip(&per_year[1])
        .map(|((name, unit, a), (_, _, b))| Compared {
            quantity: name.clone(),
            unit,
            v2011: *a,
            v2016: *b,
        })
        .collect();
    match format {
        OutputFormat::Json => to_json(&json!({
            "command": "compare-years",
            "budget": budget,
            "rows": rows.iter().map(|r| json!({
                "quantity": r.quantity,
                "unit": r.unit,
                "2011": r.v2011,
                "2016": r.v2016,
                "delta": r.delta(),
            })).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => csv_doc(
            &["quantity", "unit", "2011", "2016", "delta"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.quantity.clone(),
                        r.unit.into(),
                        opt_str(r.v2011),
                        opt_str(r.v2016),
                        opt_str(r.delta()),
                    ]
                })
                .collect(),
        ),
        _ => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "budget: {:.0}% of {} = {:.2} $/mo",
                100.0 * budget.p,
                frontier::thousands(budget.income_annual),
                budget.level()
            );
            let _ = writeln!(out, "{:<30}{:>10}{:>14}{:>14}{:>14}", "quantity", "unit", "2011", "2016", "delta");
            let cell = |v: Option<f64>, unit: &str| match v {
                None => "-".to_string(),
                Some(x) if unit.starts_with('$') && !unit.contains("km") => format!("{x:.2}"),
                Some(x) => sig4(x),
            };
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<30}{:>10}{:>14}{:>14}{:>14}",
                    r.quantity,
                    r.unit,
                    cell(r.v2011, r.unit),
                    cell(r.v2016, r.unit),
                    cell(r.delta(), r.unit)
                );
            }
            Ok(out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_plot(
    cli: &Cli,
    figure: FigureArg,
    income: f64,
    year: YearArg,
    degree: usize,
    drive: DriveArg,
    window: &[f64],
) -> CmdResult {
    let format = format_of(cli, OutputFormat::Svg, &[OutputFormat::Svg, OutputFormat::Json, OutputFormat::Csv])?;
    let window = window_arg(window)?;
    let degree = check_degree(degree)?;
    BudgetConstraint::new(0.5, income).map_err(|e| Failure::Usage(e.to_string()))?;
    let table = usable_table(cli)?;
    let spec = match figure {
        FigureArg::Cost => {
            let basis = CurveBasis {
                shelter_degree: degree,
                drive: drive.into(),
            };
            let curves = frontier::build_year_curves(&table, &year.years(), basis)?;
            plot::cost_curves_figure(&curves, income, window)?
        }
        FigureArg::Percent => plot::percent_curves_figure(&table, &year.years(), degree, window)?,
    };
    match format {
        OutputFormat::Json => to_json(&json!({ "command": "plot", "figure": spec })),
        OutputFormat::Csv => Ok(plot::series_csv(&spec)),
        _ => Ok(plot::render_plot(&spec)?),
    }
}
