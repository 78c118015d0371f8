//! Income-constrained commuting distance model.
//!
//! A household that spends a fixed share `p` of its after-tax income `I` on
//! shelter and car commuting can live at distance `d` from the employment
//! core only where
//!
//! ```text
//! TC(d) = R(d) + T1(d) + T2(d) + PC  <=  p * I
//! ```
//!
//! `R(d)` is a shelter-cost curve fitted to community data, `T1(d)` the cost
//! of a daily round trip by car, `T2(d)` a second-mode cost and `PC` parking.
//! The crate is organised along that pipeline:
//!
//! - [`dataset`]: the community cost table (CSV in, validation report out),
//!   including an embedded 23-community Ontario sample for 2011 and 2016.
//! - [`drivecost`]: the component-wise annual driving cost model and the
//!   least-squares calibration of its per-km tire rate.
//! - [`regress`]: polynomial least squares (degree 1 to 3) with t and F
//!   inference, backed by a regularized incomplete beta function.
//! - [`stats`]: Ryan–Joiner normality statistic and global Moran's I with
//!   pluggable spatial weights and seeded permutation inference.
//! - [`frontier`]: total-cost composition, crossing search, feasibility zones
//!   (`d1`, `d2`, indifference point) and commuting-limit tables.
//! - [`plot`]: deterministic SVG charts of cost curves and budget guidelines.
//! - [`cli`]: the `commute-frontier` command surface.
//!
//! ```
//! use commute_frontier::dataset::CommunityTable;
//! use commute_frontier::frontier::{self, CurveBasis, Window};
//! use commute_frontier::Year;
//!
//! let table = CommunityTable::builtin();
//! let curves = frontier::build_year_curves(&table, &[Year::Y2011], CurveBasis::LINEAR_TOTAL).unwrap();
//! let limits = frontier::commuting_limits(&curves, &[60_000.0], &[0.42], Window::LIMITS).unwrap();
//! let d2 = limits.cells[0].limit_km.unwrap();
//! assert!((d2 - 134.0).abs() < 1.0);
//! ```

pub mod cli;
pub mod dataset;
pub mod drivecost;
mod error;
pub mod frontier;
pub mod plot;
pub mod regress;
pub mod stats;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Census year of the embedded sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Year {
    #[serde(rename = "2011")]
    Y2011,
    #[serde(rename = "2016")]
    Y2016,
}

impl Year {
    pub const ALL: [Year; 2] = [Year::Y2011, Year::Y2016];

    pub fn label(self) -> &'static str {
        match self {
            Year::Y2011 => "2011",
            Year::Y2016 => "2016",
        }
    }
}

impl fmt::Display for Year {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Year {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "2011" => Ok(Year::Y2011),
            "2016" => Ok(Year::Y2016),
            other => Err(Error::Config(format!("unknown year `{other}` (expected 2011 or 2016)"))),
        }
    }
}
