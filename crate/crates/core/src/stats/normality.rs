use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::DiagnosticResult;
use crate::{Error, Result};

/// Ryan–Joiner p-value as reported from the critical-value table: exact
/// bounds outside `[0.01, 0.10]`, linear interpolation inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "band", content = "p", rename_all = "snake_case")]
pub enum PBand {
    Below,
    Interpolated(f64),
    Above,
}

impl PBand {
    pub fn p_value(self) -> f64 {
        match self {
            PBand::Below => 0.01,
            PBand::Interpolated(p) => p,
            PBand::Above => 0.10,
        }
    }
}

impl fmt::Display for PBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PBand::Below => f.write_str("<0.010"),
            PBand::Interpolated(p) => write!(f, "{p:.3}"),
            PBand::Above => f.write_str(">0.100"),
        }
    }
}

/// Normal scores at Blom plotting positions `(i - 3/8) / (n + 1/4)`.
pub fn blom_scores(n: usize) -> Vec<f64> {
    let normal = Normal::standard();
    let nf = n as f64;
    (1..=n)
        .map(|i| normal.inverse_cdf((i as f64 - 0.375) / (nf + 0.25)))
        .collect()
}

/// Critical values of the Ryan–Joiner correlation at α = 0.10, 0.05, 0.01.
pub fn ryan_joiner_critical(n: usize) -> [f64; 3] {
    let nf = n as f64;
    let sq = nf.sqrt();
    let n2 = nf * nf;
    [
        1.0071 - 0.1371 / sq - 0.3682 / nf + 0.7780 / n2,
        1.0063 - 0.1288 / sq - 0.6118 / nf + 1.3505 / n2,
        0.9963 - 0.0211 / sq - 1.4106 / nf + 3.1791 / n2,
    ]
}

fn band(statistic: f64, n: usize) -> PBand {
    let [c10, c05, c01] = ryan_joiner_critical(n);
    if statistic < c01 {
        PBand::Below
    } else if statistic >= c10 {
        PBand::Above
    } else if statistic < c05 {
        PBand::Interpolated(0.01 + 0.04 * (statistic - c01) / (c05 - c01))
    } else {
        PBand::Interpolated(0.05 + 0.05 * (statistic - c05) / (c10 - c05))
    }
}

/// Correlation between the ordered sample and its normal scores.
pub fn ryan_joiner(values: &[f64]) -> Result<DiagnosticResult> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!(
            "Ryan–Joiner needs at least 4 values, got {n}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[n - 1] {
        return Err(Error::Degenerate("all values are equal".into()));
    }
    let scores = blom_scores(n);
    let statistic = pearson(&sorted, &scores).min(1.0);
    let p = band(statistic, n);
    Ok(DiagnosticResult {
        statistic,
        p_value: p.p_value(),
        method: "Ryan-Joiner".into(),
        detail: p.to_string(),
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn own_normal_scores_correlate_perfectly() {
        let scores = blom_scores(12);
        let r = ryan_joiner(&scores).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-12);
        assert_eq!(r.detail, ">0.100");
    }

    #[test]
    fn degenerate_and_short_inputs() {
        assert!(matches!(ryan_joiner(&[1.0; 6]), Err(Error::Degenerate(_))));
        assert!(matches!(ryan_joiner(&[1.0, 2.0, 3.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn critical_values_are_ordered() {
        for n in [5, 10, 23, 100] {
            let [c10, c05, c01] = ryan_joiner_critical(n);
            assert!(c10 > c05 && c05 > c01);
        }
    }

    #[test]
    fn band_interpolation() {
        let [c10, c05, c01] = ryan_joiner_critical(23);
        assert_eq!(band(c01 - 1e-6, 23), PBand::Below);
        assert_eq!(band(c10, 23), PBand::Above);
        assert!(matches!(band(c05, 23), PBand::Interpolated(p) if (p - 0.05).abs() < 1e-12));
        assert!(matches!(band(c01, 23), PBand::Interpolated(p) if (p - 0.01).abs() < 1e-12));
    }

    #[test]
    fn blom_scores_are_symmetric() {
        let s = blom_scores(7);
        assert!(s[3].abs() < 1e-12);
        for i in 0..3 {
            assert!((s[i] + s[6 - i]).abs() < 1e-12);
        }
    }
}
