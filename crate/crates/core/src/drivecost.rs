//! Annual and monthly cost of commuting by car.
//!
//! The annual cost of a daily round trip over a one-way distance `d` is the
//! sum of seven components:
//!
//! ```text
//! T(d) = gas(d) + insurance + licence + depreciation(d) + finance + maintenance(d) + tires(d)
//! ```
//!
//! with `km(d) = 2 d * workdays_per_week * weeks_per_year`. Depreciation has
//! two exclusive regimes: a flat annual amount up to the threshold, and a
//! per-km amount once annual distance is strictly over it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::CommunityTable;
use crate::{Error, Result, Year};

/// Least-squares tire rate over the embedded 2011 driving costs ($/km).
pub const CALIBRATED_TIRE_RATE_2011: f64 = 0.008_347_756_058_504_583;
/// Least-squares tire rate over the embedded 2016 driving costs ($/km).
pub const CALIBRATED_TIRE_RATE_2016: f64 = 0.019_825_694_953_914_62;

/// Cost constants for one model year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingCostParams {
    pub year_label: String,
    /// $/litre
    pub fuel_price: f64,
    /// litres per 100 km
    pub fuel_economy: f64,
    /// $/year
    pub insurance: f64,
    /// $/year
    pub licence: f64,
    /// $/year
    pub finance: f64,
    /// $/km
    pub maintenance_rate: f64,
    /// $/km
    pub tire_rate: f64,
    /// $/year, applies while annual km <= threshold
    pub dep_flat: f64,
    /// $/km, applies once annual km > threshold
    pub dep_rate: f64,
    /// km/year
    pub dep_threshold_km: f64,
    pub workdays_per_week: u32,
    pub weeks_per_year: u32,
}

impl DrivingCostParams {
    pub fn defaults_2011() -> Self {
        DrivingCostParams {
            year_label: "2011".into(),
            fuel_price: 1.29,
            fuel_economy: 8.0,
            insurance: 1936.0,
            licence: 115.0,
            finance: 699.0,
            maintenance_rate: 0.0243,
            tire_rate: CALIBRATED_TIRE_RATE_2011,
            dep_flat: 3515.0,
            dep_rate: 0.028,
            dep_threshold_km: 18_000.0,
            workdays_per_week: 5,
            weeks_per_year: 52,
        }
    }

    pub fn defaults_2016() -> Self {
        DrivingCostParams {
            year_label: "2016".into(),
            fuel_price: 1.02,
            fuel_economy: 7.3,
            insurance: 2630.0,
            licence: 146.16,
            finance: 836.64,
            maintenance_rate: 0.0327,
            tire_rate: CALIBRATED_TIRE_RATE_2016,
            ..Self::defaults_2011()
        }
    }

    pub fn for_year(year: Year) -> Self {
        match year {
            Year::Y2011 => Self::defaults_2011(),
            Year::Y2016 => Self::defaults_2016(),
        }
    }

    pub fn with_tire_rate(mut self, rate: f64) -> Self {
        self.tire_rate = rate;
        self
    }

    /// Checks the sign and positivity constraints on every field.
    pub fn validate(&self) -> Result<()> {
        let money = [
            ("fuel_price", self.fuel_price),
            ("insurance", self.insurance),
            ("licence", self.licence),
            ("finance", self.finance),
            ("maintenance_rate", self.maintenance_rate),
            ("tire_rate", self.tire_rate),
            ("dep_flat", self.dep_flat),
            ("dep_rate", self.dep_rate),
        ];
        for (name, v) in money {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        if !(self.fuel_economy.is_finite() && self.fuel_economy > 0.0) {
            return Err(Error::Domain(format!("fuel_economy must be > 0, got {}", self.fuel_economy)));
        }
        if !(self.dep_threshold_km.is_finite() && self.dep_threshold_km > 0.0) {
            return Err(Error::Domain(format!(
                "dep_threshold_km must be > 0, got {}",
                self.dep_threshold_km
            )));
        }
        if !(1..=7).contains(&self.workdays_per_week) || !(1..=53).contains(&self.weeks_per_year) {
            return Err(Error::Domain(format!(
                "commuting calendar must have 1-7 days a week and 1-53 weeks, got {} and {}",
                self.workdays_per_week, self.weeks_per_year
            )));
        }
        Ok(())
    }

    /// Annual fixed costs: insurance, licence and finance.
    pub fn fixed_annual(&self) -> f64 {
        self.insurance + self.licence + self.finance
    }

    /// One-way distance at which annual km reaches the depreciation threshold.
    pub fn depreciation_kink_km(&self) -> f64 {
        self.dep_threshold_km / (2.0 * self.commute_days())
    }

    fn commute_days(&self) -> f64 {
        f64::from(self.workdays_per_week) * f64::from(self.weeks_per_year)
    }
}

/// Annual cost by component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub annual_km: f64,
    pub gas: f64,
    pub insurance: f64,
    pub licence: f64,
    pub depreciation: f64,
    pub finance: f64,
    pub maintenance: f64,
    pub tires: f64,
    pub total_annual: f64,
    pub total_monthly: f64,
}

fn check_distance(d: f64) -> Result<()> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("distance must be finite and >= 0, got {d}")))
    }
}

/// Annual kilometres for a daily round trip of one-way length `d`.
pub fn annual_km(d: f64, params: &DrivingCostParams) -> Result<f64> {
    check_distance(d)?;
    Ok(d * 2.0 * params.commute_days())
}

pub fn annual_driving_cost(d: f64, params: &DrivingCostParams) -> Result<CostBreakdown> {
    let km = annual_km(d, params)?;
    let gas = km / 100.0 * params.fuel_economy * params.fuel_price;
    let depreciation = if km > params.dep_threshold_km {
        params.dep_rate * km
    } else {
        params.dep_flat
    };
    let maintenance = params.maintenance_rate * km;
    let tires = params.tire_rate * km;
    let total_annual = gas
        + params.insurance
        + params.licence
        + depreciation
        + params.finance
        + maintenance
        + tires;
    Ok(CostBreakdown {
        annual_km: km,
        gas,
        insurance: params.insurance,
        licence: params.licence,
        depreciation,
        finance: params.finance,
        maintenance,
        tires,
        total_annual,
        total_monthly: total_annual / 12.0,
    })
}

pub fn monthly_driving_cost(d: f64, params: &DrivingCostParams) -> Result<f64> {
    annual_driving_cost(d, params).map(|b| b.total_monthly)
}

/// Per-km tire rate minimising the squared error between observed and
/// modelled annual driving cost over every record with an observed cost.
///
/// With the tire term removed, the model residual is linear in the rate, so
/// the minimiser is `sum(residual * km) / sum(km^2)`.
pub fn calibrate_tire_rate(table: &CommunityTable, params: &DrivingCostParams, year: Year) -> Result<f64> {
    let base = params.clone().with_tire_rate(0.0);
    base.validate()?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut used = 0usize;
    for r in &table.records {
        let Some(observed_monthly) = r.drive(year) else {
            continue;
        };
        let breakdown = annual_driving_cost(r.distance_km, &base)?;
        let residual = 12.0 * observed_monthly - breakdown.total_annual;
        num += residual * breakdown.annual_km;
        den += breakdown.annual_km * breakdown.annual_km;
        used += 1;
    }
    if used < 2 {
        return Err(Error::InsufficientData(format!(
            "{used} record(s) with observed {year} driving cost; at least 2 required"
        )));
    }
    if den == 0.0 {
        return Err(Error::Degenerate("all annual distances are zero".into()));
    }
    Ok(num / den)
}

/// Parameter sets keyed by `year_label`, as stored in a JSON document.
pub type ParamSet = BTreeMap<String, DrivingCostParams>;

pub fn params_to_json(sets: &[DrivingCostParams]) -> Result<String> {
    let map: ParamSet = sets.iter().map(|p| (p.year_label.clone(), p.clone())).collect();
    Ok(serde_json::to_string_pretty(&map)?)
}

pub fn params_from_json(text: &str) -> Result<ParamSet> {
    let map: ParamSet = serde_json::from_str(text)?;
    for (key, p) in &map {
        if key != &p.year_label {
            return Err(Error::Config(format!(
                "parameter set keyed `{key}` carries year_label `{}`",
                p.year_label
            )));
        }
        p.validate()?;
    }
    Ok(map)
}
