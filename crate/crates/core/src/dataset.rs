//! Community cost table: loading, validation and the embedded sample.
//!
//! The interchange format is comma-separated text with a header row:
//!
//! ```text
//! name,distance_km,drive_time_min,income_2011,income_2016,shelter_2011,shelter_2016,
//! drive_2011,drive_2016,total_2011,total_2016,pct_2011,pct_2016,lone_drivers_2016
//! ```
//!
//! Columns after `shelter_2016` are optional; an empty cell (or a missing
//! column) means "not observed", which is kept distinct from zero.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Year};

/// Default dataset cut-off: beyond this distance lone-driver commuting to the
/// core is negligible.
pub const DEFAULT_DOMAIN_MAX_KM: f64 = 156.0;

/// Derived-column tolerance for `total = shelter + drive`, in currency.
pub const TOTAL_TOLERANCE: f64 = 0.01;

/// Derived-column tolerance for `pct = 100 * 12 * total / income`, in
/// percentage points.
pub const PCT_TOLERANCE: f64 = 0.05;

/// Minimum number of records for a cubic fit with one residual degree of freedom.
pub const MIN_RECORDS: usize = 4;

const BUILTIN_CSV: &str = include_str!("../data/ontario_2011_2016.csv");

/// Column names, in canonical output order.
pub const COLUMNS: [&str; 14] = [
    "name",
    "distance_km",
    "drive_time_min",
    "income_2011",
    "income_2016",
    "shelter_2011",
    "shelter_2016",
    "drive_2011",
    "drive_2016",
    "total_2011",
    "total_2016",
    "pct_2011",
    "pct_2016",
    "lone_drivers_2016",
];

const MANDATORY: [&str; 7] = [
    "name",
    "distance_km",
    "drive_time_min",
    "income_2011",
    "income_2016",
    "shelter_2011",
    "shelter_2016",
];

/// One census geography.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityRecord {
    pub name: String,
    /// One-way driving distance to the core. The core itself is recorded at a
    /// conventional 10 km because a routing service cannot measure a place to itself.
    pub distance_km: f64,
    pub drive_time_min: f64,
    pub income_2011: f64,
    pub income_2016: f64,
    pub shelter_2011: f64,
    pub shelter_2016: f64,
    pub drive_2011: Option<f64>,
    pub drive_2016: Option<f64>,
    pub total_2011: Option<f64>,
    pub total_2016: Option<f64>,
    pub pct_2011: Option<f64>,
    pub pct_2016: Option<f64>,
    pub lone_drivers_2016: Option<u64>,
}

impl CommunityRecord {
    pub fn income(&self, year: Year) -> f64 {
        match year {
            Year::Y2011 => self.income_2011,
            Year::Y2016 => self.income_2016,
        }
    }

    pub fn shelter(&self, year: Year) -> f64 {
        match year {
            Year::Y2011 => self.shelter_2011,
            Year::Y2016 => self.shelter_2016,
        }
    }

    /// Observed monthly driving cost.
    pub fn drive(&self, year: Year) -> Option<f64> {
        match year {
            Year::Y2011 => self.drive_2011,
            Year::Y2016 => self.drive_2016,
        }
    }

    pub fn total(&self, year: Year) -> Option<f64> {
        match year {
            Year::Y2011 => self.total_2011,
            Year::Y2016 => self.total_2016,
        }
    }

    pub fn pct(&self, year: Year) -> Option<f64> {
        match year {
            Year::Y2011 => self.pct_2011,
            Year::Y2016 => self.pct_2016,
        }
    }
}

/// A numeric column that can serve as a regression response or diagnostic input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    DistanceKm,
    DriveTimeMin,
    Income(Year),
    Shelter(Year),
    /// Observed monthly driving cost.
    Drive(Year),
    /// Observed driving cost annualised (`12 * drive`).
    DriveAnnual(Year),
    Total(Year),
    Pct(Year),
    LoneDrivers2016,
}

impl Field {
    pub fn value(self, r: &CommunityRecord) -> Option<f64> {
        match self {
            Field::DistanceKm => Some(r.distance_km),
            Field::DriveTimeMin => Some(r.drive_time_min),
            Field::Income(y) => Some(r.income(y)),
            Field::Shelter(y) => Some(r.shelter(y)),
            Field::Drive(y) => r.drive(y),
            Field::DriveAnnual(y) => r.drive(y).map(|m| 12.0 * m),
            Field::Total(y) => r.total(y),
            Field::Pct(y) => r.pct(y),
            Field::LoneDrivers2016 => r.lone_drivers_2016.map(|v| v as f64),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::DistanceKm => f.write_str("distance_km"),
            Field::DriveTimeMin => f.write_str("drive_time_min"),
            Field::Income(y) => write!(f, "income_{y}"),
            Field::Shelter(y) => write!(f, "shelter_{y}"),
            Field::Drive(y) => write!(f, "drive_{y}"),
            Field::DriveAnnual(y) => write!(f, "drive_annual_{y}"),
            Field::Total(y) => write!(f, "total_{y}"),
            Field::Pct(y) => write!(f, "pct_{y}"),
            Field::LoneDrivers2016 => f.write_str("lone_drivers_2016"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "distance_km" => return Ok(Field::DistanceKm),
            "drive_time_min" => return Ok(Field::DriveTimeMin),
            "lone_drivers_2016" => return Ok(Field::LoneDrivers2016),
            _ => {}
        }
        let (stem, year) = s
            .rsplit_once('_')
            .ok_or_else(|| Error::Config(format!("unknown field `{s}`")))?;
        let year: Year = year.parse().map_err(|_| Error::Config(format!("unknown field `{s}`")))?;
        match stem {
            "income" => Ok(Field::Income(year)),
            "shelter" => Ok(Field::Shelter(year)),
            "drive" => Ok(Field::Drive(year)),
            "drive_annual" => Ok(Field::DriveAnnual(year)),
            "total" => Ok(Field::Total(year)),
            "pct" => Ok(Field::Pct(year)),
            _ => Err(Error::Config(format!("unknown field `{s}`"))),
        }
    }
}

/// Ordered set of community records plus the dataset distance cut-off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityTable {
    pub records: Vec<CommunityRecord>,
    pub domain_max_km: f64,
}

impl CommunityTable {
    pub fn new(records: Vec<CommunityRecord>) -> Self {
        CommunityTable {
            records,
            domain_max_km: DEFAULT_DOMAIN_MAX_KM,
        }
    }

    /// The 23 Ontario CMAs and CAs within 156 km of Toronto, 2011 and 2016.
    pub fn builtin() -> Self {
        load_table(BUILTIN_CSV.as_bytes()).expect("embedded table is well-formed")
    }

    pub fn with_domain_max(mut self, km: f64) -> Self {
        self.domain_max_km = km;
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&CommunityRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn distances(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.distance_km).collect()
    }

    /// Values of `field` for every record that has it, in table order.
    pub fn column(&self, field: Field) -> Vec<f64> {
        self.records.iter().filter_map(|r| field.value(r)).collect()
    }

    /// `(distance_km, value)` pairs for every record that has `field`.
    pub fn against_distance(&self, field: Field) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| field.value(r).map(|v| (r.distance_km, v)))
            .collect()
    }

    /// Observed `[min, max]` distance.
    pub fn distance_range(&self) -> Option<[f64; 2]> {
        let mut it = self.records.iter().map(|r| r.distance_km);
        let first = it.next()?;
        Some(it.fold([first, first], |[lo, hi], d| [lo.min(d), hi.max(d)]))
    }

    /// Serialises to the interchange CSV format.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for r in &self.records {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                r.name.clone(),
                r.distance_km.to_string(),
                r.drive_time_min.to_string(),
                r.income_2011.to_string(),
                r.income_2016.to_string(),
                r.shelter_2011.to_string(),
                r.shelter_2016.to_string(),
                opt(r.drive_2011),
                opt(r.drive_2016),
                opt(r.total_2011),
                opt(r.total_2016),
                opt(r.pct_2011),
                opt(r.pct_2016),
                r.lone_drivers_2016.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Parses a community table from CSV text. Records are returned in file order;
/// no row is dropped. Invariants are checked separately by [`validate_table`].
pub fn load_table<R: Read>(source: R) -> Result<CommunityTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Schema("no records".into()));
    }

    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for col in MANDATORY {
        if !index.contains_key(col) {
            return Err(Error::Schema(format!("missing mandatory column `{col}`")));
        }
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_no,
            column: "*".into(),
            message: e.to_string(),
        })?;
        let cell = |col: &str| -> &str { index.get(col).and_then(|&j| row.get(j)).unwrap_or("") };
        let required = |col: &str| -> Result<f64> {
            parse_number(cell(col), row_no, col)?.ok_or_else(|| Error::Parse {
                row: row_no,
                column: col.into(),
                message: "missing value".into(),
            })
        };
        let optional = |col: &str| parse_number(cell(col), row_no, col);

        let name = cell("name").to_string();
        if name.is_empty() {
            return Err(Error::Parse {
                row: row_no,
                column: "name".into(),
                message: "missing value".into(),
            });
        }
        let lone = match cell("lone_drivers_2016") {
            "" => None,
            s => Some(s.parse::<u64>().map_err(|e| Error::Parse {
                row: row_no,
                column: "lone_drivers_2016".into(),
                message: format!("`{s}`: {e}"),
            })?),
        };
        records.push(CommunityRecord {
            name,
            distance_km: required("distance_km")?,
            drive_time_min: required("drive_time_min")?,
            income_2011: required("income_2011")?,
            income_2016: required("income_2016")?,
            shelter_2011: required("shelter_2011")?,
            shelter_2016: required("shelter_2016")?,
            drive_2011: optional("drive_2011")?,
            drive_2016: optional("drive_2016")?,
            total_2011: optional("total_2011")?,
            total_2016: optional("total_2016")?,
            pct_2011: optional("pct_2011")?,
            pct_2016: optional("pct_2016")?,
            lone_drivers_2016: lone,
        });
    }
    if records.is_empty() {
        return Err(Error::Schema("no records".into()));
    }
    Ok(CommunityTable::new(records))
}

pub fn load_path(path: impl AsRef<Path>) -> Result<CommunityTable> {
    let file = std::fs::File::open(path.as_ref())?;
    load_table(file)
}

fn parse_number(s: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        row,
        column: column.into(),
        message: format!("`{s}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column: column.into(),
            message: format!("`{s}` is not finite"),
        });
    }
    Ok(Some(v))
}

/// One invariant violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub record: String,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_usable(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, record: &str, field: &str, message: impl Into<String>) {
        self.errors.push(Finding {
            record: record.into(),
            field: field.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, record: &str, field: &str, message: impl Into<String>) {
        self.warnings.push(Finding {
            record: record.into(),
            field: field.into(),
            message: message.into(),
        });
    }

    /// Line-oriented rendering: one `error:` / `warning:` line per finding and
    /// a closing summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (kind, list) in [("error", &self.errors), ("warning", &self.warnings)] {
            for f in list {
                out.push_str(&format!("{kind}: {}: {}: {}\n", f.record, f.field, f.message));
            }
        }
        out.push_str(&format!(
            "{} error(s), {} warning(s)\n",
            self.errors.len(),
            self.warnings.len()
        ));
        out
    }
}

/// Enumerates every invariant violation. Hard violations are errors; derived
/// column inconsistencies are warnings.
pub fn validate_table(table: &CommunityTable) -> ValidationReport {
    let mut report = ValidationReport::default();
    if table.records.len() < MIN_RECORDS {
        report.error(
            "*",
            "records",
            format!("{} record(s); at least {MIN_RECORDS} required", table.records.len()),
        );
    }
    if !(table.domain_max_km > 0.0) {
        report.error("*", "domain_max_km", "must be > 0");
    }

    let mut seen = HashSet::new();
    for r in &table.records {
        let name = r.name.as_str();
        if !seen.insert(name) {
            report.error(name, "name", "duplicate name");
        }
        if !(r.distance_km > 0.0) {
            report.error(name, "distance_km", format!("must be > 0, got {}", r.distance_km));
        } else if r.distance_km > table.domain_max_km {
            report.error(
                name,
                "distance_km",
                format!("{} exceeds dataset cut-off {}", r.distance_km, table.domain_max_km),
            );
        }
        if r.drive_time_min < 0.0 {
            report.error(name, "drive_time_min", "must be >= 0");
        }
        for year in Year::ALL {
            if !(r.income(year) > 0.0) {
                report.error(name, &format!("income_{year}"), "must be > 0");
            }
            if !(r.shelter(year) > 0.0) {
                report.error(name, &format!("shelter_{year}"), "must be > 0");
            }
            if let Some(d) = r.drive(year) {
                if d < 0.0 {
                    report.error(name, &format!("drive_{year}"), "must be >= 0");
                }
            }
            if let Some(t) = r.total(year) {
                if !(t > 0.0) {
                    report.error(name, &format!("total_{year}"), "must be > 0");
                }
            }
            if let Some(p) = r.pct(year) {
                if !(p > 0.0 && p < 100.0) {
                    report.error(name, &format!("pct_{year}"), format!("{p} outside (0, 100)"));
                }
            }

            if let (Some(t), Some(d)) = (r.total(year), r.drive(year)) {
                let expected = r.shelter(year) + d;
                if (t - expected).abs() > TOTAL_TOLERANCE + 1e-9 {
                    report.warn(
                        name,
                        &format!("total_{year}"),
                        format!("{t} differs from shelter + drive = {expected:.2}"),
                    );
                }
            }
            if let (Some(p), Some(t)) = (r.pct(year), r.total(year)) {
                if r.income(year) > 0.0 {
                    let expected = 100.0 * 12.0 * t / r.income(year);
                    if (p - expected).abs() > PCT_TOLERANCE + 1e-9 {
                        report.warn(
                            name,
                            &format!("pct_{year}"),
                            format!("{p} differs from 100*12*total/income = {expected:.3}"),
                        );
                    }
                }
            }
        }
    }
    report
}

/// Planar coordinates for one community, used to build spatial weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub name: String,
    pub x_km: f64,
    pub y_km: f64,
}

/// Reads a `name,x_km,y_km` coordinates file.
pub fn load_coordinates<R: Read>(source: R) -> Result<Vec<Coordinate>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing mandatory column `{name}`")))
    };
    let (ni, xi, yi) = (col("name")?, col("x_km")?, col("y_km")?);
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_no,
            column: "*".into(),
            message: e.to_string(),
        })?;
        let num = |j: usize, c: &str| {
            parse_number(row.get(j).unwrap_or(""), row_no, c)?.ok_or_else(|| Error::Parse {
                row: row_no,
                column: c.into(),
                message: "missing value".into(),
            })
        };
        out.push(Coordinate {
            name: row.get(ni).unwrap_or("").to_string(),
            x_km: num(xi, "x_km")?,
            y_km: num(yi, "y_km")?,
        });
    }
    if out.is_empty() {
        return Err(Error::Schema("no records".into()));
    }
    Ok(out)
}

/// Orders coordinates to match the table's records.
pub fn align_coordinates(table: &CommunityTable, coords: &[Coordinate]) -> Result<Vec<(f64, f64)>> {
    let by_name: HashMap<&str, &Coordinate> = coords.iter().map(|c| (c.name.as_str(), c)).collect();
    table
        .records
        .iter()
        .map(|r| {
            by_name
                .get(r.name.as_str())
                .map(|c| (c.x_km, c.y_km))
                .ok_or_else(|| Error::Schema(format!("no coordinates for `{}`", r.name)))
        })
        .collect()
}
