//! The income constraint `TC(d) <= p * I` and the zones it induces.
//!
//! Along a ray from the core, shelter cost `R(d)` falls while driving cost
//! `T(d)` rises. With a monthly budget level `L = p * I / 12`:
//!
//! - `d1` is where shelter alone falls to `L`; closer in, shelter by itself
//!   exceeds the budget.
//! - `d2` is the farthest distance at which the total cost `TC(d)` is still
//!   within `L`; farther out, transport pushes the total over.
//! - the indifference point is where `R(d) = T(d)`.
//!
//! The feasible set itself is reported as the list of intervals on which
//! `TC(d) <= L`; for the curves in this crate it is at most one band.

use serde::{Deserialize, Serialize};

use crate::dataset::CommunityTable;
use crate::drivecost::{self, DrivingCostParams};
use crate::regress::{self, PolynomialModel, Prediction};
use crate::{Error, Result, Year};

/// Farthest distance any curve may be evaluated at.
pub const HARD_MAX_KM: f64 = 250.0;
/// Bracketing grid for crossing search.
pub const GRID_STEP_KM: f64 = 1.0;
/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_TOL_KM: f64 = 1e-6;

/// Budget shares with a conventional meaning: rule of thumb, gross debt
/// service, total debt service, unaffordability.
pub const GUIDELINES: [(f64, &str); 4] = [
    (0.30, "30% rule of thumb"),
    (0.35, "35% GDS"),
    (0.42, "42% TDS"),
    (0.45, "45% unaffordable"),
];

/// Distance interval over which boundaries are searched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    /// The observed data range of the embedded sample.
    pub const DATA: Window = Window { lo: 10.0, hi: 156.0 };
    /// Full evaluation range used for commuting-limit tables.
    pub const LIMITS: Window = Window { lo: 0.0, hi: HARD_MAX_KM };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let w = Window { lo, hi };
        w.check()?;
        Ok(w)
    }

    fn check(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo < self.hi && self.hi <= HARD_MAX_KM) {
            return Err(Error::Domain(format!(
                "window [{}, {}] must satisfy 0 <= lo < hi <= {HARD_MAX_KM}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetConstraint {
    /// Share of after-tax income spent on shelter plus transport.
    pub p: f64,
    pub income_annual: f64,
    pub income_monthly: f64,
}

impl BudgetConstraint {
    pub fn new(p: f64, income_annual: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("allocation share must be in (0, 1), got {p}")));
        }
        if !(income_annual > 0.0 && income_annual.is_finite()) {
            return Err(Error::Domain(format!("income must be > 0, got {income_annual}")));
        }
        Ok(BudgetConstraint {
            p,
            income_annual,
            income_monthly: income_annual / 12.0,
        })
    }

    /// One constraint per entry of [`GUIDELINES`].
    pub fn presets(income_annual: f64) -> Result<Vec<Self>> {
        GUIDELINES.iter().map(|&(p, _)| Self::new(p, income_annual)).collect()
    }

    /// Monthly budget level `p * I / 12`.
    pub fn level(&self) -> f64 {
        self.p * self.income_monthly
    }
}

/// Monthly car commuting cost as a function of one-way distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveCost {
    /// Closed-form component model.
    CostModel { params: DrivingCostParams },
    /// A polynomial fitted to (or published for) monthly driving costs.
    Fitted { model: PolynomialModel },
}

impl DriveCost {
    pub fn monthly(&self, d: f64) -> Result<f64> {
        match self {
            DriveCost::CostModel { params } => drivecost::monthly_driving_cost(d, params),
            DriveCost::Fitted { model } => Ok(model.eval(d)),
        }
    }
}

/// `TC(d) = R(d) + T1(d) + T2 + PC`, monthly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalCostCurve {
    pub label: String,
    pub shelter: PolynomialModel,
    pub drive: DriveCost,
    /// Second-mode cost (transit pass and the like), monthly.
    pub second_mode_monthly: f64,
    pub parking_monthly: f64,
    /// Distances outside this range are extrapolation.
    pub domain: [f64; 2],
}

impl TotalCostCurve {
    pub fn new(label: impl Into<String>, shelter: PolynomialModel, drive: DriveCost) -> Self {
        let domain = shelter.x_domain;
        TotalCostCurve {
            label: label.into(),
            shelter,
            drive,
            second_mode_monthly: 0.0,
            parking_monthly: 0.0,
            domain,
        }
    }

    pub fn with_second_mode(mut self, monthly: f64) -> Result<Self> {
        if !(monthly >= 0.0 && monthly.is_finite()) {
            return Err(Error::Domain(format!("second-mode cost must be >= 0, got {monthly}")));
        }
        self.second_mode_monthly = monthly;
        Ok(self)
    }

    pub fn with_parking(mut self, monthly: f64) -> Result<Self> {
        if !(monthly >= 0.0 && monthly.is_finite()) {
            return Err(Error::Domain(format!("parking cost must be >= 0, got {monthly}")));
        }
        self.parking_monthly = monthly;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: [f64; 2]) -> Self {
        self.domain = domain;
        self
    }

    pub fn shelter_at(&self, d: f64) -> f64 {
        self.shelter.eval(d)
    }

    pub fn drive_at(&self, d: f64) -> Result<f64> {
        self.drive.monthly(d)
    }

    pub fn in_domain(&self, d: f64) -> bool {
        d >= self.domain[0] - 1e-9 && d <= self.domain[1] + 1e-9
    }

    fn total_unchecked(&self, d: f64) -> f64 {
        self.drive
            .monthly(d)
            .map(|t| self.shelter.eval(d) + t + self.second_mode_monthly + self.parking_monthly)
            .unwrap_or(f64::NAN)
    }
}

/// Monthly total cost at `d`, flagged when outside the curve's domain.
pub fn total_cost(curve: &TotalCostCurve, d: f64) -> Result<Prediction> {
    if !(d.is_finite() && (0.0..=HARD_MAX_KM).contains(&d)) {
        return Err(Error::Domain(format!("distance must be in [0, {HARD_MAX_KM}], got {d}")));
    }
    let shelter = regress::predict(&curve.shelter, d)?;
    let drive = curve.drive.monthly(d)?;
    Ok(Prediction {
        value: shelter.value + drive + curve.second_mode_monthly + curve.parking_monthly,
        extrapolated: !curve.in_domain(d),
    })
}

/// Points in `[lo, hi]` where `f` crosses `level`, ascending.
///
/// The window is scanned on a `grid_step` grid for sign changes of
/// `f - level`; each bracket is bisected to [`BISECTION_TOL_KM`]. A grid node
/// where `f` equals `level` exactly counts as a crossing.
pub fn crossings<F>(f: F, level: f64, lo: f64, hi: f64, grid_step: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("crossing window [{lo}, {hi}] is empty")));
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::Domain(format!("grid step must be > 0, got {grid_step}")));
    }
    let g = |d: f64| -> Result<f64> {
        let v = f(d);
        if v.is_finite() {
            Ok(v - level)
        } else {
            Err(Error::Numeric {
                d,
                message: format!("curve evaluated to {v}"),
            })
        }
    };

    let steps = ((hi - lo) / grid_step).ceil() as usize;
    let node = |i: usize| if i == steps { hi } else { lo + i as f64 * grid_step };

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = node(0);
    let mut prev_g = g(prev_x)?;
    if prev_g == 0.0 {
        roots.push(prev_x);
    }
    for i in 1..=steps {
        let x = node(i);
        let gx = g(x)?;
        if gx == 0.0 {
            roots.push(x);
        } else if prev_g != 0.0 && (prev_g < 0.0) != (gx < 0.0) {
            roots.push(bisect(&g, prev_x, x, prev_g)?);
        }
        prev_x = x;
        prev_g = gx;
    }
    Ok(roots)
}

fn bisect<G>(g: &G, mut a: f64, mut b: f64, mut ga: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    while b - a > BISECTION_TOL_KM {
        let mid = 0.5 * (a + b);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Classification of a window against the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    FeasibleBand,
    InfeasibleEverywhere,
    FeasibleEverywhereInDomain,
}

/// Which curve produced a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossed {
    /// `R(d) = p * I`
    Shelter,
    /// `TC(d) = p * I`
    Total,
    /// `R(d) = T(d)`
    ShelterDrive,
    /// Feasibility extends to the window edge.
    WindowEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub km: f64,
    pub crossed: Crossed,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityZone {
    pub level_monthly: f64,
    pub window: Window,
    /// Inner boundary: shelter alone falls to the budget level.
    pub d1: Option<Boundary>,
    /// Outer boundary: farthest distance with total cost within budget.
    pub d2: Option<Boundary>,
    pub indifference: Option<Boundary>,
    /// Maximal intervals with `TC(d) <= level`.
    pub intervals: Vec<[f64; 2]>,
    pub verdict: Verdict,
    pub extrapolated: bool,
}

impl FeasibilityZone {
    pub fn d1_km(&self) -> Option<f64> {
        self.d1.map(|b| b.km)
    }

    pub fn d2_km(&self) -> Option<f64> {
        self.d2.map(|b| b.km)
    }

    /// First distance at which the total cost is within budget.
    pub fn band_start(&self) -> Option<f64> {
        self.intervals.first().map(|iv| iv[0])
    }

    pub fn contains(&self, d: f64) -> bool {
        self.intervals.iter().any(|iv| iv[0] <= d && d <= iv[1])
    }
}

/// Locates `d1`, `d2`, the indifference point and the feasible intervals.
pub fn feasibility_zone(curve: &TotalCostCurve, budget: &BudgetConstraint, window: Window) -> Result<FeasibilityZone> {
    window.check()?;
    let level = budget.level();
    let boundary = |km: f64, crossed: Crossed| Boundary {
        km,
        crossed,
        extrapolated: !curve.in_domain(km),
    };

    let shelter = |d: f64| curve.shelter_at(d);
    let d1 = if shelter(window.lo) <= level {
        None
    } else {
        crossings(shelter, level, window.lo, window.hi, GRID_STEP_KM)?
            .first()
            .map(|&km| boundary(km, Crossed::Shelter))
    };

    let total = |d: f64| curve.total_unchecked(d);
    let roots = crossings(total, level, window.lo, window.hi, GRID_STEP_KM)?;
    let intervals = feasible_intervals(&total, level, window, &roots);

    let d2 = intervals.last().map(|iv| {
        let crossed = if iv[1] >= window.hi { Crossed::WindowEdge } else { Crossed::Total };
        boundary(iv[1], crossed)
    });
    let verdict = match intervals.as_slice() {
        [] => Verdict::InfeasibleEverywhere,
        [only] if only[0] <= window.lo && only[1] >= window.hi => Verdict::FeasibleEverywhereInDomain,
        _ => Verdict::FeasibleBand,
    };
    let indifference = indifference_distance(curve, window)?.map(|km| boundary(km, Crossed::ShelterDrive));
    let band_start_extrapolated = intervals.first().is_some_and(|iv| !curve.in_domain(iv[0]));
    let extrapolated = band_start_extrapolated
        || d1.is_some_and(|b| b.extrapolated)
        || d2.is_some_and(|b| b.extrapolated);

    Ok(FeasibilityZone {
        level_monthly: level,
        window,
        d1,
        d2,
        indifference,
        intervals,
        verdict,
        extrapolated,
    })
}

fn feasible_intervals<F: Fn(f64) -> f64>(f: &F, level: f64, window: Window, roots: &[f64]) -> Vec<[f64; 2]> {
    let mut cuts = vec![window.lo];
    cuts.extend(roots.iter().copied().filter(|&r| r > window.lo && r < window.hi));
    cuts.push(window.hi);

    let mut out: Vec<[f64; 2]> = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if f(0.5 * (a + b)) <= level {
            match out.last_mut() {
                Some(last) if last[1] == a => last[1] = b,
                _ => out.push([a, b]),
            }
        }
    }
    // tangential touches that no open segment covers
    for &r in roots {
        if f(r) <= level && !out.iter().any(|iv| iv[0] <= r && r <= iv[1]) {
            out.push([r, r]);
        }
    }
    out.sort_by(|x, y| x[0].total_cmp(&y[0]));
    out
}

/// First distance in the window where shelter cost equals driving cost.
pub fn indifference_distance(curve: &TotalCostCurve, window: Window) -> Result<Option<f64>> {
    window.check()?;
    let diff = |d: f64| curve.drive_at(d).map(|t| curve.shelter_at(d) - t).unwrap_or(f64::NAN);
    Ok(crossings(diff, 0.0, window.lo, window.hi, GRID_STEP_KM)?.first().copied())
}

/// Share of annual income absorbed by shelter plus transport at `d`.
pub fn affordability_share(curve: &TotalCostCurve, d: f64, income_annual: f64) -> Result<f64> {
    if !(income_annual > 0.0 && income_annual.is_finite()) {
        return Err(Error::Domain(format!("income must be > 0, got {income_annual}")));
    }
    Ok(12.0 * total_cost(curve, d)?.value / income_annual)
}

/// Annual income at which total cost at `d` is exactly the share `p`.
pub fn required_income(curve: &TotalCostCurve, d: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("allocation share must be in (0, 1), got {p}")));
    }
    Ok(12.0 * total_cost(curve, d)?.value / p)
}

/// One `(curve, p, income)` cell of a limits table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCell {
    pub label: String,
    pub p: f64,
    pub income_annual: f64,
    pub level_monthly: f64,
    /// Outer boundary `d2`; `None` when infeasible everywhere.
    pub limit_km: Option<f64>,
    pub verdict: Verdict,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitsTable {
    pub labels: Vec<String>,
    pub incomes: Vec<f64>,
    pub ps: Vec<f64>,
    pub window: Window,
    /// Ordered by share, then curve, then income.
    pub cells: Vec<LimitCell>,
}

impl LimitsTable {
    pub fn cell(&self, label: &str, p: f64, income: f64) -> Option<&LimitCell> {
        self.cells
            .iter()
            .find(|c| c.label == label && c.p == p && c.income_annual == income)
    }

    /// Fixed-width text in the usual limits-table layout: income header,
    /// monthly allocations, then one row per share and curve. `*` marks an
    /// infeasible cell and a trailing `x` an extrapolated one.
    pub fn to_text(&self) -> String {
        const LABEL_W: usize = 40;
        const CELL_W: usize = 10;
        let mut out = String::new();
        out.push_str(&format!("{:<LABEL_W$}", "Annual Household Income"));
        for &inc in &self.incomes {
            out.push_str(&format!("{:>CELL_W$}", format!("${}", thousands(inc))));
        }
        out.push('\n');
        for &p in &self.ps {
            out.push_str(&format!("{:<LABEL_W$}", format!("{} Allocation of Monthly Income", pct_label(p))));
            for &inc in &self.incomes {
                out.push_str(&format!("{:>CELL_W$}", format!("${}", thousands(p * inc / 12.0))));
            }
            out.push('\n');
        }
        for &p in &self.ps {
            for label in &self.labels {
                out.push_str(&format!(
                    "{:<LABEL_W$}",
                    format!("Commuting limit, km: {} ({label})", pct_label(p))
                ));
                for &inc in &self.incomes {
                    let text = match self.cell(label, p, inc) {
                        Some(LimitCell { limit_km: Some(km), extrapolated, .. }) => {
                            format!("{km:.0}{}", if *extrapolated { "x" } else { "" })
                        }
                        _ => "*".to_string(),
                    };
                    out.push_str(&format!("{text:>CELL_W$}"));
                }
                out.push('\n');
            }
        }
        out.push_str("(*) constrained by shelter and transport costs at this allocation: not affordable\n");
        out.push_str("(x) outside the observed distance range (extrapolated)\n");
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(["label", "p", "income_annual", "level_monthly", "limit_km", "verdict", "extrapolated"])
            .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                c.label.clone(),
                c.p.to_string(),
                c.income_annual.to_string(),
                c.level_monthly.to_string(),
                c.limit_km.map(|v| v.to_string()).unwrap_or_else(|| "*".into()),
                serde_json::to_value(c.verdict)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                c.extrapolated.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn pct_label(p: f64) -> String {
    let pct = p * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{pct:.0}%")
    } else {
        format!("{pct:.1}%")
    }
}

/// Whole-currency rendering with thousands separators.
pub fn thousands(v: f64) -> String {
    let rounded = v.round() as i64;
    let digits = rounded.unsigned_abs().to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    if rounded < 0 {
        format!("-{out}")
    } else {
        out
    }
}

/// Outer commuting limit for every `(p, curve, income)` combination.
pub fn commuting_limits(curves: &[TotalCostCurve], incomes: &[f64], ps: &[f64], window: Window) -> Result<LimitsTable> {
    if curves.is_empty() || incomes.is_empty() || ps.is_empty() {
        return Err(Error::Domain("limits need at least one curve, income and share".into()));
    }
    let mut cells = Vec::with_capacity(curves.len() * incomes.len() * ps.len());
    for &p in ps {
        for curve in curves {
            for &income in incomes {
                let budget = BudgetConstraint::new(p, income)?;
                let zone = feasibility_zone(curve, &budget, window)?;
                cells.push(LimitCell {
                    label: curve.label.clone(),
                    p,
                    income_annual: income,
                    level_monthly: budget.level(),
                    limit_km: zone.d2_km(),
                    verdict: zone.verdict,
                    extrapolated: zone.d2.is_some_and(|b| b.extrapolated),
                });
            }
        }
    }
    Ok(LimitsTable {
        labels: curves.iter().map(|c| c.label.clone()).collect(),
        incomes: incomes.to_vec(),
        ps: ps.to_vec(),
        window,
        cells,
    })
}

/// How the driving component of a total-cost curve is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveBasis {
    /// Closed-form component model.
    CostModel,
    /// Linear regression of the component model over the table's distances.
    Regression,
}

/// Shelter polynomial degree plus driving-cost representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveBasis {
    pub shelter_degree: usize,
    pub drive: DriveBasis,
}

impl CurveBasis {
    /// Linear shelter plus linear driving cost: a straight total-cost line.
    /// This is the basis the published commuting-limit table follows.
    pub const LINEAR_TOTAL: CurveBasis = CurveBasis {
        shelter_degree: 1,
        drive: DriveBasis::Regression,
    };
    /// Best-fitting cubic shelter curve plus the exact driving-cost model.
    pub const COMPOSED_CUBIC: CurveBasis = CurveBasis {
        shelter_degree: 3,
        drive: DriveBasis::CostModel,
    };
}

/// Builds one year's total-cost curve from the table.
pub fn build_curve(table: &CommunityTable, year: Year, basis: CurveBasis, params: &DrivingCostParams) -> Result<TotalCostCurve> {
    params.validate()?;
    let shelter = regress::fit_pairs(&table.against_distance(crate::dataset::Field::Shelter(year)), basis.shelter_degree)?;
    let drive = match basis.drive {
        DriveBasis::CostModel => DriveCost::CostModel { params: params.clone() },
        DriveBasis::Regression => {
            let pairs = table
                .records
                .iter()
                .map(|r| Ok((r.distance_km, drivecost::monthly_driving_cost(r.distance_km, params)?)))
                .collect::<Result<Vec<_>>>()?;
            DriveCost::Fitted {
                model: regress::fit_pairs(&pairs, 1)?,
            }
        }
    };
    Ok(TotalCostCurve::new(year.label(), shelter, drive))
}

/// One curve per year, using each year's default driving-cost parameters.
pub fn build_year_curves(table: &CommunityTable, years: &[Year], basis: CurveBasis) -> Result<Vec<TotalCostCurve>> {
    years
        .iter()
        .map(|&y| build_curve(table, y, basis, &DrivingCostParams::for_year(y)))
        .collect()
}
