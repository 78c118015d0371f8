//! Library results checked against independent computations: numerical
//! quadrature, brute-force double sums, and closed-form least squares.

use commute_frontier::regress::{self, f_tail_p, regularized_incomplete_beta, t_tail_p};
use commute_frontier::stats::{self, WeightsMatrix};

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

fn gamma_int(n: u32) -> f64 {
    (1..n).map(f64::from).product()
}

#[test]
fn incomplete_beta_matches_quadrature_of_beta_density() {
    // integer shapes, so B(a, b) = (a-1)!(b-1)!/(a+b-1)!
    for (a, b, x) in [(2u32, 3u32, 0.4), (1, 1, 0.73), (3, 2, 0.2), (5, 4, 0.61), (2, 7, 0.05)] {
        let beta = gamma_int(a) * gamma_int(b) / gamma_int(a + b);
        let (af, bf) = (f64::from(a), f64::from(b));
        let quad = simpson(|t| t.powf(af - 1.0) * (1.0 - t).powf(bf - 1.0), 0.0, x, 2000) / beta;
        let lib = regularized_incomplete_beta(af, bf, x).unwrap();
        assert!((lib - quad).abs() < 1e-10, "I_{x}({a},{b}): {lib} vs {quad}");
    }
    let v = regularized_incomplete_beta(2.0, 3.0, 0.4).unwrap();
    assert!((v - 0.5248).abs() < 1e-12);
}

#[test]
fn t_tail_matches_integrated_density() {
    // f(t) = Γ((ν+1)/2) / (sqrt(νπ) Γ(ν/2)) (1 + t²/ν)^(-(ν+1)/2), ν = 21
    let nu = 21.0_f64;
    let ln_c = regress::special::ln_gamma((nu + 1.0) / 2.0)
        - regress::special::ln_gamma(nu / 2.0)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    let pdf = |t: f64| (ln_c - (nu + 1.0) / 2.0 * (1.0 + t * t / nu).ln()).exp();
    let central = simpson(pdf, -2.08, 2.08, 4000);
    let p = t_tail_p(2.08, 21).unwrap();
    assert!((p - (1.0 - central)).abs() < 1e-9, "{p} vs {}", 1.0 - central);
    assert!((p - 0.050).abs() < 0.001);
}

#[test]
fn ln_gamma_factorials() {
    for n in 1..15u32 {
        let exact = gamma_int(n).ln();
        assert!((regress::special::ln_gamma(f64::from(n)) - exact).abs() < 1e-12);
    }
}

#[test]
fn f_tail_matches_integrated_density() {
    let (d1, d2) = (3.0_f64, 19.0_f64);
    let ln_b = regress::special::ln_beta(d1 / 2.0, d2 / 2.0);
    let pdf = |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        ((d1 / 2.0) * (d1 / d2).ln() + (d1 / 2.0 - 1.0) * x.ln() - (d1 + d2) / 2.0 * (1.0 + d1 * x / d2).ln() - ln_b).exp()
    };
    let f = 2.4;
    let cdf = simpson(pdf, 0.0, f, 20_000);
    let p = f_tail_p(f, 3, 19).unwrap();
    assert!((p - (1.0 - cdf)).abs() < 1e-6, "{p} vs {}", 1.0 - cdf);
}

fn brute_moran(values: &[f64], w: &[Vec<f64>]) -> f64 {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut s0 = 0.0;
    for i in 0..n {
        for j in 0..n {
            num += w[i][j] * (values[i] - mean) * (values[j] - mean);
            s0 += w[i][j];
        }
    }
    let den: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    n as f64 / s0 * num / den
}

#[test]
fn moran_matches_double_sum_on_small_instances() {
    let cases: Vec<(Vec<f64>, Vec<(f64, f64)>, &str)> = vec![
        (
            vec![3.0, 7.5, 1.25, 9.0, 4.0],
            vec![(0.0, 0.0), (10.0, 0.0), (3.0, 4.0), (20.0, 15.0), (7.0, -2.0)],
            "inverse-distance:band=100",
        ),
        (
            vec![10.0, 12.0, 9.0, 30.0, 28.0, 31.0],
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (50.0, 50.0), (51.0, 50.0), (50.0, 51.0)],
            "knn:2",
        ),
        (
            vec![1.0, -2.0, 0.5, 4.0],
            vec![(0.0, 0.0), (2.0, 0.0), (4.0, 0.0), (6.0, 0.0)],
            "knn:1,row",
        ),
        (
            vec![2.0, 3.0, 5.0, 7.0, 11.0, 13.0],
            vec![(0.0, 0.0), (5.0, 1.0), (9.0, 9.0), (2.0, 8.0), (14.0, 3.0), (6.0, 6.0)],
            "inverse-distance:band=8,row",
        ),
    ];
    for (values, coords, spec) in cases {
        let w = stats::build_weights(&coords, spec).unwrap();
        let lib = stats::morans_i_statistic(&values, &w).unwrap();
        let oracle = brute_moran(&values, &w.weights);
        assert!((lib - oracle).abs() < 1e-12, "{spec}: {lib} vs {oracle}");
    }
}

#[test]
fn alternating_values_on_bipartite_graph_are_negatively_autocorrelated() {
    // 6-cycle: even and odd vertices alternate high and low
    let n = 6;
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        w[i][(i + 1) % n] = 1.0;
        w[(i + 1) % n][i] = 1.0;
    }
    let w = WeightsMatrix::from_dense(w, "cycle").unwrap();
    let values = [10.0, 1.0, 10.0, 1.0, 10.0, 1.0];
    let i = stats::morans_i_statistic(&values, &w).unwrap();
    assert!((i - (-1.0)).abs() < 1e-12);
}

#[test]
fn inverse_distance_weights_match_hand_computation() {
    let coords = [(0.0, 0.0), (30.0, 40.0), (60.0, 0.0), (-20.0, 10.0), (200.0, 200.0)];
    let w = stats::build_weights(&coords, "inverse-distance:band=100").unwrap();
    for i in 0..coords.len() {
        for j in 0..coords.len() {
            let dx: f64 = coords[i].0 - coords[j].0;
            let dy: f64 = coords[i].1 - coords[j].1;
            let d = (dx * dx + dy * dy).sqrt();
            let expected = if i == j || d > 100.0 { 0.0 } else { 1.0 / d };
            assert!((w.weights[i][j] - expected).abs() < 1e-15, "w[{i}][{j}]");
        }
    }
    assert_eq!(w.weights[0][1], 1.0 / 50.0);
    assert_eq!(w.isolated, vec![4]);
    assert!(w.is_symmetric());
}

#[test]
fn coincident_points_are_flagged_and_capped() {
    let w = stats::build_weights(&[(0.0, 0.0), (0.0, 0.0), (5.0, 0.0)], "inverse-distance:band=10").unwrap();
    assert_eq!(w.flagged_pairs, vec![(0, 1)]);
    assert_eq!(w.weights[0][1], stats::COINCIDENT_WEIGHT_CAP);
}

#[test]
fn line_fit_matches_closed_form() {
    let sets: [&[(f64, f64)]; 3] = [
        &[(1.0, 2.0), (2.0, 2.9), (4.0, 5.2), (7.0, 7.7)],
        &[(10.0, 1500.0), (40.0, 1200.0), (55.0, 1250.0), (90.0, 1000.0), (120.0, 1010.0), (156.0, 900.0)],
        &[(0.0, -1.0), (1.0, 1.0), (2.0, 0.0), (3.0, 4.0), (4.0, 2.0)],
    ];
    for pts in sets {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r2 = sxy * sxy / (sxx * syy);
        let sse = syy - slope * sxy;
        let s = (sse / (n - 2.0)).sqrt();
        let se_slope = s / sxx.sqrt();

        let m = regress::fit_pairs(pts, 1).unwrap();
        let tol = 1e-9 * (1.0 + intercept.abs());
        assert!((m.coefficients[0] - intercept).abs() < tol);
        assert!((m.coefficients[1] - slope).abs() < 1e-9 * (1.0 + slope.abs()));
        assert!((m.r2 - r2).abs() < 1e-10);
        assert!((m.s - s).abs() < 1e-9 * (1.0 + s));
        assert!((m.coef_se[1] - se_slope).abs() < 1e-9 * (1.0 + se_slope));
        let t = slope / se_slope;
        let p = t_tail_p(t, pts.len() - 2).unwrap();
        assert!((m.coef_p[1] - p).abs() < 1e-12);
        // for a single regressor, F = t²
        assert!((m.f_statistic - t * t).abs() < 1e-6 * t * t);
    }
}

#[test]
fn ryan_joiner_is_one_on_its_own_normal_scores() {
    let scores = stats::blom_scores(12);
    let r = stats::ryan_joiner(&scores).unwrap();
    assert!((r.statistic - 1.0).abs() < 1e-12);
    assert_eq!(r.detail, ">0.100");
}
