use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inverse-distance weight assigned to pairs closer than 1 m (`1 / 0.001 km`).
pub const COINCIDENT_WEIGHT_CAP: f64 = 1000.0;

/// Spatial weights construction rule.
///
/// Grammar: `knn:<k>` or `inverse-distance:band=<km>`, optionally followed by
/// `,row` to row-standardise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightsSpec {
    pub kind: WeightsKind,
    pub row_standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsKind {
    Knn { k: usize },
    InverseDistance { band_km: f64 },
}

impl FromStr for WeightsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown weights spec `{s}`"));
        let (body, row_standardize) = match s.trim().strip_suffix(",row") {
            Some(body) => (body, true),
            None => (s.trim(), false),
        };
        let kind = if let Some(k) = body.strip_prefix("knn:") {
            let k: usize = k.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            WeightsKind::Knn { k }
        } else if let Some(band) = body.strip_prefix("inverse-distance:band=") {
            let band_km: f64 = band.parse().map_err(|_| bad())?;
            if !(band_km > 0.0 && band_km.is_finite()) {
                return Err(bad());
            }
            WeightsKind::InverseDistance { band_km }
        } else {
            return Err(bad());
        };
        Ok(WeightsSpec { kind, row_standardize })
    }
}

impl fmt::Display for WeightsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WeightsKind::Knn { k } => write!(f, "knn:{k}")?,
            WeightsKind::InverseDistance { band_km } => write!(f, "inverse-distance:band={band_km}")?,
        }
        if self.row_standardize {
            f.write_str(",row")?;
        }
        Ok(())
    }
}

/// Dense `n x n` spatial weights with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsMatrix {
    pub n: usize,
    pub weights: Vec<Vec<f64>>,
    pub spec_label: String,
    /// Rows with no neighbour.
    pub isolated: Vec<usize>,
    /// Pairs whose inverse-distance weight was capped.
    pub flagged_pairs: Vec<(usize, usize)>,
}

impl WeightsMatrix {
    /// Wraps a caller-supplied matrix after checking shape, sign and diagonal.
    pub fn from_dense(weights: Vec<Vec<f64>>, spec_label: impl Into<String>) -> Result<Self> {
        let n = weights.len();
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Domain(format!("weights row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::Domain(format!("weights diagonal entry {i} is nonzero")));
            }
            if row.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::Domain(format!("weights row {i} has a negative or non-finite entry")));
            }
        }
        let isolated = isolated_rows(&weights);
        Ok(WeightsMatrix {
            n,
            weights,
            spec_label: spec_label.into(),
            isolated,
            flagged_pairs: Vec::new(),
        })
    }

    /// Sum of all weights.
    pub fn s0(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.weights[i][j] - self.weights[j][i]).abs() <= 1e-12))
    }
}

fn isolated_rows(w: &[Vec<f64>]) -> Vec<usize> {
    w.iter()
        .enumerate()
        .filter(|(_, row)| row.iter().all(|&x| x == 0.0))
        .map(|(i, _)| i)
        .collect()
}

/// Builds weights over planar coordinates (km).
pub fn build_weights(coords: &[(f64, f64)], spec: &str) -> Result<WeightsMatrix> {
    let parsed: WeightsSpec = spec.parse()?;
    let n = coords.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("weights need at least 2 points, got {n}")));
    }
    if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain("non-finite coordinate".into()));
    }
    let dist = |i: usize, j: usize| (coords[i].0 - coords[j].0).hypot(coords[i].1 - coords[j].1);
    let mut w = vec![vec![0.0; n]; n];
    let mut flagged = Vec::new();
    match parsed.kind {
        WeightsKind::Knn { k } => {
            if k >= n {
                return Err(Error::Config(format!("knn:{k} needs more than {k} points, got {n}")));
            }
            for (i, row) in w.iter_mut().enumerate() {
                let mut others: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
                // stable: ties resolved by index
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                for &(_, j) in others.iter().take(k) {
                    row[j] = 1.0;
                }
            }
        }
        WeightsKind::InverseDistance { band_km } => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = dist(i, j);
                    if d > band_km {
                        continue;
                    }
                    let v = if d * COINCIDENT_WEIGHT_CAP < 1.0 {
                        flagged.push((i, j));
                        COINCIDENT_WEIGHT_CAP
                    } else {
                        1.0 / d
                    };
                    w[i][j] = v;
                    w[j][i] = v;
                }
            }
        }
    }
    if parsed.row_standardize {
        for row in &mut w {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|x| *x /= sum);
            }
        }
    }
    let isolated = isolated_rows(&w);
    Ok(WeightsMatrix {
        n,
        weights: w,
        spec_label: parsed.to_string(),
        isolated,
        flagged_pairs: flagged,
    })
}
