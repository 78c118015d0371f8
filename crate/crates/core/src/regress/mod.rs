//! Polynomial least squares (degree 1 to 3) with classical OLS inference.
//!
//! The design is built on `u = (x - x_min) / (x_max - x_min)` so the normal
//! equations stay well conditioned for cubics out to a few hundred km;
//! coefficients, standard errors and p-values are mapped back to the raw `x`
//! basis before they are returned.

pub mod special;

use serde::{Deserialize, Serialize};

pub use special::{f_tail_p, regularized_incomplete_beta, t_tail_p};

use crate::{Error, Result};

/// Relative pivot size below which the scaled normal matrix is treated as singular.
const SINGULAR_PIVOT: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub x: f64,
    pub y: f64,
}

impl From<(f64, f64)> for FitPoint {
    fn from((x, y): (f64, f64)) -> Self {
        FitPoint { x, y }
    }
}

/// A fitted (or hand-specified) polynomial curve with OLS diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialModel {
    pub degree: usize,
    /// Constant first: `y = c0 + c1 x + c2 x^2 + c3 x^3`.
    pub coefficients: Vec<f64>,
    pub n: usize,
    pub r2: f64,
    /// Residual standard error.
    pub s: f64,
    pub coef_se: Vec<f64>,
    /// Two-sided t-test p-value per coefficient.
    pub coef_p: Vec<f64>,
    pub f_statistic: f64,
    pub overall_p: f64,
    pub x_domain: [f64; 2],
}

/// A curve value plus whether `x` fell outside the fitted domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    pub extrapolated: bool,
}

impl PolynomialModel {
    /// A curve from published coefficients, with no fit diagnostics attached.
    /// A lone constant is padded to a flat line.
    pub fn from_coefficients(coefficients: &[f64], x_domain: [f64; 2]) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() > 4 {
            return Err(Error::Domain(format!(
                "expected 1 to 4 coefficients, got {}",
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        let mut coefficients = coefficients.to_vec();
        if coefficients.len() == 1 {
            coefficients.push(0.0);
        }
        let k = coefficients.len();
        Ok(PolynomialModel {
            degree: k - 1,
            coefficients,
            n: 0,
            r2: f64::NAN,
            s: f64::NAN,
            coef_se: vec![f64::NAN; k],
            coef_p: vec![f64::NAN; k],
            f_statistic: f64::NAN,
            overall_p: f64::NAN,
            x_domain,
        })
    }

    /// Horner evaluation without the domain check.
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn in_domain(&self, x: f64) -> bool {
        x >= self.x_domain[0] - 1e-9 && x <= self.x_domain[1] + 1e-9
    }

    /// Plain-text rendering in the layout of a regression results table:
    /// fit statistics, constant, then the slope terms to 4 significant figures.
    pub fn to_table_text(&self) -> String {
        let name = match self.degree {
            1 => "Linear Regression",
            2 => "Quadratic Regression",
            _ => "Cubic Regression",
        };
        let mut out = format!(
            "{name:<22} r^2={:.3} {} s={:.2} n={}\n",
            self.r2,
            render_p(self.overall_p),
            self.s,
            self.n
        );
        out.push_str(&format!(
            "{:<22} {} ({})\n",
            "Constant",
            sig4(self.coefficients[0]),
            render_p(self.coef_p[0])
        ));
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| {
                let power = if k == 1 { "d".to_string() } else { format!("d^{k}") };
                let sign = if c < 0.0 { "-" } else { "+" };
                format!("{sign}{}{power} ({})", sig4(c.abs()), render_p(self.coef_p[k]))
            })
            .collect();
        let label = if self.degree == 1 { "Slope Parameter" } else { "Slope Parameters" };
        out.push_str(&format!("{label:<22} {}\n", terms.join(" ")));
        out
    }
}

/// Renders a value to 4 significant figures without exponent notation.
pub fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// `p < 0.001` below that threshold, otherwise `p=0.xxx`.
pub fn render_p(p: f64) -> String {
    if p.is_nan() {
        "p=n/a".into()
    } else if p < 0.001 {
        "p < 0.001".into()
    } else {
        format!("p={p:.3}")
    }
}

/// Evaluates the model at `x`, flagging extrapolation outside `x_domain`.
pub fn predict(model: &PolynomialModel, x: f64) -> Result<Prediction> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot evaluate at non-finite x = {x}")));
    }
    Ok(Prediction {
        value: model.eval(x),
        extrapolated: !model.in_domain(x),
    })
}

/// Ordinary least squares fit of a degree 1–3 polynomial.
pub fn fit_polynomial(points: &[FitPoint], degree: usize) -> Result<PolynomialModel> {
    if !(1..=3).contains(&degree) {
        return Err(Error::Domain(format!("degree must be 1, 2 or 3, got {degree}")));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::Domain("non-finite point".into()));
    }
    let n = points.len();
    let k = degree + 1;
    if n < degree + 2 {
        return Err(Error::SingularFit(format!(
            "{n} point(s) leave no residual degree of freedom for degree {degree}"
        )));
    }
    let x_min = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let x_max = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let range = x_max - x_min;
    if range <= 0.0 {
        return Err(Error::SingularFit("all x values are identical".into()));
    }

    // Normal equations on the scaled basis.
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for p in points {
        let u = (p.x - x_min) / range;
        let row = powers(u, k);
        for i in 0..k {
            xty[i] += row[i] * p.y;
            for j in 0..k {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let chol = cholesky(&xtx)?;
    let b = chol_solve(&chol, &xty);
    let xtx_inv = chol_inverse(&chol);

    let y_mean = points.iter().map(|p| p.y).sum::<f64>() / n as f64;
    let mut sse = 0.0;
    let mut sst = 0.0;
    for p in points {
        let u = (p.x - x_min) / range;
        let fitted: f64 = powers(u, k).iter().zip(&b).map(|(a, c)| a * c).sum();
        sse += (p.y - fitted).powi(2);
        sst += (p.y - y_mean).powi(2);
    }
    let df = n - k;
    let sigma2 = sse / df as f64;
    let s = sigma2.sqrt();
    let r2 = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 1.0 };

    // Map u-basis to x-basis: c = T b with T[j][m] = C(m, j) (-x_min)^(m-j) / range^m.
    let mut t = vec![vec![0.0; k]; k];
    for (j, row) in t.iter_mut().enumerate() {
        for (m, cell) in row.iter_mut().enumerate().skip(j) {
            *cell = binomial(m, j) * (-x_min).powi((m - j) as i32) / range.powi(m as i32);
        }
    }
    let coefficients: Vec<f64> = (0..k)
        .map(|j| (0..k).map(|m| t[j][m] * b[m]).sum())
        .collect();
    let coef_se: Vec<f64> = (0..k)
        .map(|j| {
            let mut var = 0.0;
            for a in 0..k {
                for c in 0..k {
                    var += t[j][a] * xtx_inv[a][c] * t[j][c];
                }
            }
            (sigma2 * var).max(0.0).sqrt()
        })
        .collect();
    let coef_p = coefficients
        .iter()
        .zip(&coef_se)
        .map(|(&c, &se)| {
            if se == 0.0 {
                Ok(if c == 0.0 { 1.0 } else { 0.0 })
            } else {
                t_tail_p(c / se, df)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let (f_statistic, overall_p) = if sst == 0.0 {
        (0.0, 1.0)
    } else if sse == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = ((sst - sse).max(0.0) / degree as f64) / sigma2;
        (f, f_tail_p(f, degree, df)?)
    };

    Ok(PolynomialModel {
        degree,
        coefficients,
        n,
        r2,
        s,
        coef_se,
        coef_p,
        f_statistic,
        overall_p,
        x_domain: [x_min, x_max],
    })
}

/// Convenience wrapper over `(x, y)` pairs.
pub fn fit_pairs(pairs: &[(f64, f64)], degree: usize) -> Result<PolynomialModel> {
    let points: Vec<FitPoint> = pairs.iter().copied().map(FitPoint::from).collect();
    fit_polynomial(&points, degree)
}

fn powers(u: f64, k: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(k);
    let mut v = 1.0;
    for _ in 0..k {
        row.push(v);
        v *= u;
    }
    row
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = a.len();
    let scale = (0..k).map(|i| a[i][i]).fold(0.0, f64::max);
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let sum: f64 = (0..j).map(|m| l[i][m] * l[j][m]).sum();
            if i == j {
                let pivot = a[i][i] - sum;
                if pivot <= SINGULAR_PIVOT * scale {
                    return Err(Error::SingularFit(
                        "design matrix is rank deficient (too few distinct x values)".into(),
                    ));
                }
                l[i][i] = pivot.sqrt();
            } else {
                l[i][j] = (a[i][j] - sum) / l[j][j];
            }
        }
    }
    Ok(l)
}

fn chol_solve(l: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let k = l.len();
    let mut z = vec![0.0; k];
    for i in 0..k {
        let sum: f64 = (0..i).map(|m| l[i][m] * z[m]).sum();
        z[i] = (rhs[i] - sum) / l[i][i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let sum: f64 = (i + 1..k).map(|m| l[m][i] * x[m]).sum();
        x[i] = (z[i] - sum) / l[i][i];
    }
    x
}

fn chol_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = l.len();
    let mut inv = vec![vec![0.0; k]; k];
    for col in 0..k {
        let mut e = vec![0.0; k];
        e[col] = 1.0;
        let x = chol_solve(l, &e);
        for row in 0..k {
            inv[row][col] = x[row];
        }
    }
    inv
}
