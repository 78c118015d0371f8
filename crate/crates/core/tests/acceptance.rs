//! Acceptance gate. Every criterion prints one PASS/FAIL line (with its
//! sub-checks indented beneath), and the test fails if any criterion does.
//!
//! cargo test -p commute-frontier --test acceptance -- --nocapture

use commute_frontier::cli;
use commute_frontier::dataset::{CommunityTable, Field};
use commute_frontier::drivecost::{self, DrivingCostParams};
use commute_frontier::frontier::{self, BudgetConstraint, CurveBasis, Window};
use commute_frontier::regress::{self, PolynomialModel};
use commute_frontier::stats::{self, WeightsMatrix};
use commute_frontier::Year;

#[derive(Default)]
struct Criterion {
    lines: Vec<String>,
    ok: bool,
}

impl Criterion {
    fn new() -> Self {
        Criterion { lines: Vec::new(), ok: true }
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let pass = (got - want).abs() <= tol;
        self.record(pass, format!("{what}: {got:.6} vs {want} ± {tol}"));
    }

    fn within(&mut self, what: &str, got: f64, lo: f64, hi: f64) {
        self.record((lo..=hi).contains(&got), format!("{what}: {got:.4} in [{lo}, {hi}]"));
    }

    fn check(&mut self, what: &str, pass: bool) {
        self.record(pass, what.to_string());
    }

    fn record(&mut self, pass: bool, line: String) {
        self.ok &= pass;
        self.lines.push(format!("    [{}] {line}", if pass { "ok" } else { "MISS" }));
    }
}

fn fit(table: &CommunityTable, field: Field, degree: usize) -> PolynomialModel {
    regress::fit_pairs(&table.against_distance(field), degree).unwrap()
}

fn ac1(t: &CommunityTable) -> Criterion {
    let mut c = Criterion::new();
    let l11 = fit(t, Field::Shelter(Year::Y2011), 1);
    c.near("2011 linear constant", l11.coefficients[0], 1353.0, 2.0);
    c.near("2011 linear slope", l11.coefficients[1], -2.962, 0.02);
    c.near("2011 linear r2", l11.r2, 0.456, 0.005);
    let l16 = fit(t, Field::Shelter(Year::Y2016), 1);
    c.near("2016 linear constant", l16.coefficients[0], 1699.0, 2.0);
    c.near("2016 linear slope", l16.coefficients[1], -4.314, 0.02);
    c.near("2016 linear r2", l16.r2, 0.507, 0.005);
    let c11 = fit(t, Field::Shelter(Year::Y2011), 3);
    c.near("2011 cubic constant", c11.coefficients[0], 1438.0, 5.0);
    c.near("2011 cubic r2", c11.r2, 0.461, 0.01);
    let c16 = fit(t, Field::Shelter(Year::Y2016), 3);
    c.near("2016 cubic constant", c16.coefficients[0], 1871.0, 5.0);
    c.near("2016 cubic r2", c16.r2, 0.55, 0.01);
    c
}

fn ac2(t: &CommunityTable) -> Criterion {
    let mut c = Criterion::new();
    let p11 = fit(t, Field::Pct(Year::Y2011), 3);
    c.near("pct_2011 cubic constant", p11.coefficients[0], 31.33, 0.2);
    c.near("pct_2011 cubic r2", p11.r2, 0.851, 0.01);
    let p16 = fit(t, Field::Pct(Year::Y2016), 3);
    c.near("pct_2016 cubic constant", p16.coefficients[0], 34.22, 0.2);
    c.near("pct_2016 cubic r2", p16.r2, 0.808, 0.01);
    c
}

fn ac3(t: &CommunityTable) -> Criterion {
    let mut c = Criterion::new();
    let i11 = fit(t, Field::Income(Year::Y2011), 1);
    c.near("2011 income constant", i11.coefficients[0], 79188.0, 100.0);
    c.near("2011 income slope", i11.coefficients[1], -143.82, 2.0);
    c.near("2011 income r2", i11.r2, 0.413, 0.005);
    let i16 = fit(t, Field::Income(Year::Y2016), 1);
    c.near("2016 income constant", i16.coefficients[0], 89129.0, 100.0);
    c.near("2016 income slope", i16.coefficients[1], -169.51, 2.0);
    c.near("2016 income r2", i16.r2, 0.420, 0.005);
    c
}

fn ac4(t: &CommunityTable) -> Criterion {
    let mut c = Criterion::new();
    let targets = [(Year::Y2011, 378.0, 8.0, 5.72), (Year::Y2016, 500.0, 10.0, 5.33)];
    for (year, c0, c0_tol, c1) in targets {
        let base = DrivingCostParams::for_year(year);
        let rate = drivecost::calibrate_tire_rate(t, &base, year).unwrap();
        let p = base.with_tire_rate(rate);
        let mut worst: f64 = 0.0;
        let mut matched = 0;
        let mut pairs = Vec::new();
        for r in &t.records {
            let model = drivecost::monthly_driving_cost(r.distance_km, &p).unwrap();
            pairs.push((r.distance_km, model));
            if let Some(obs) = r.drive(year) {
                let e = ((model - obs) / obs).abs();
                worst = worst.max(e);
                matched += usize::from(e <= 0.01);
            }
        }
        c.check(
            &format!("{year}: {matched}/23 rows within 1% (worst {:.3}%, tire rate {rate:.6} $/km)", 100.0 * worst),
            matched == 23,
        );
        let m = regress::fit_pairs(&pairs, 1).unwrap();
        c.near(&format!("{year} driving cost constant"), m.coefficients[0], c0, c0_tol);
        c.near(&format!("{year} driving cost slope"), m.coefficients[1], c1, 0.10);
        c.within(&format!("{year} driving cost r2"), m.r2, 0.92, 1.0);
    }
    c
}

fn ac5(t: &CommunityTable) -> Criterion {
    let mut c = Criterion::new();
    let incomes = [30_000.0, 40_000.0, 50_000.0, 60_000.0];
    let curves = frontier::build_year_curves(t, &Year::ALL, CurveBasis::LINEAR_TOTAL).unwrap();
    let table = frontier::commuting_limits(&curves, &incomes, &[0.42, 0.45], Window::LIMITS).unwrap();
    // the published "*" cells
    let starred = |label: &str, p: f64, i: f64| i <= 40_000.0 || (label == "2016" && (p == 0.42 || i == 50_000.0));
    let mut mismatches = Vec::new();
    for cell in &table.cells {
        let want = starred(&cell.label, cell.p, cell.income_annual);
        if want != cell.limit_km.is_none() {
            mismatches.push(format!("{} {} {}", cell.label, cell.p, cell.income_annual));
        }
    }
    c.check(&format!("star pattern matches over 16 cells (mismatches: {mismatches:?})"), mismatches.is_empty());
    let km = |label: &str, p: f64, i: f64| table.cell(label, p, i).and_then(|x| x.limit_km).unwrap_or(f64::NAN);
    c.within("2011 $60k 42% boundary km", km("2011", 0.42, 60_000.0), 110.0, 140.0);
    c.within("2016 $60k 45% boundary km", km("2016", 0.45, 60_000.0), 85.0, 100.0);
    c
}

const TABLE4_RJ: [(&str, f64); 10] = [
    ("income_2011", 0.942),
    ("income_2016", 0.958),
    ("shelter_2011", 0.939),
    ("shelter_2016", 0.934),
    ("drive_annual_2011", 0.970),
    ("drive_annual_2016", 0.971),
    ("total_2011", 0.984),
    ("total_2016", 0.990),
    ("pct_2011", 0.981),
    ("pct_2016", 0.986),
];

fn brute_moran(values: &[f64], w: &[Vec<f64>]) -> f64 {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let (mut num, mut s0, mut den) = (0.0, 0.0, 0.0);
    for i in 0..n {
        den += (values[i] - mean).powi(2);
        for j in 0..n {
            num += w[i][j] * (values[i] - mean) * (values[j] - mean);
            s0 += w[i][j];
        }
    }
    n as f64 / s0 * num / den
}

fn ac6(t: &CommunityTable) -> Criterion {
    let mut c = Criterion::new();
    for (col, want) in TABLE4_RJ {
        let field: Field = col.parse().unwrap();
        let r = stats::ryan_joiner(&t.column(field)).unwrap();
        c.near(&format!("Ryan-Joiner {col} ({})", r.detail), r.statistic, want, 0.01);
    }
    let instances: [(&[f64], &[(f64, f64)], &str); 3] = [
        (&[3.0, 7.5, 1.25, 9.0, 4.0], &[(0.0, 0.0), (10.0, 0.0), (3.0, 4.0), (20.0, 15.0), (7.0, -2.0)], "inverse-distance:band=100"),
        (&[10.0, 12.0, 9.0, 30.0, 28.0, 31.0], &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (50.0, 50.0), (51.0, 50.0), (50.0, 51.0)], "knn:2"),
        (&[1.0, -2.0, 0.5, 4.0, 2.5, -1.0], &[(0.0, 0.0), (2.0, 0.0), (4.0, 1.0), (6.0, 0.0), (1.0, 5.0), (3.0, 3.0)], "inverse-distance:band=5,row"),
    ];
    let mut worst: f64 = 0.0;
    for (values, coords, spec) in instances {
        let w = stats::build_weights(coords, spec).unwrap();
        worst = worst.max((stats::morans_i_statistic(values, &w).unwrap() - brute_moran(values, &w.weights)).abs());
    }
    c.check(&format!("Moran's I equals the double sum on n <= 6 (max diff {worst:.1e} <= 1e-12)"), worst <= 1e-12);
    let coords: Vec<(f64, f64)> = t.records.iter().enumerate().map(|(i, r)| (r.distance_km, (i % 5) as f64 * 4.0)).collect();
    let w: WeightsMatrix = stats::build_weights(&coords, "knn:4").unwrap();
    let v = t.column(Field::Income(Year::Y2011));
    let a = stats::morans_i(&v, &w, 999, 2024).unwrap();
    let b = stats::morans_i(&v, &w, 999, 2024).unwrap();
    c.check(
        &format!("seeded permutation p is bit-reproducible (p = {})", a.p_value),
        a.p_value.to_bits() == b.p_value.to_bits() && a.statistic.to_bits() == b.statistic.to_bits(),
    );
    c
}

fn ac7(t: &CommunityTable) -> Criterion {
    let mut c = Criterion::new();

    // residual orthogonality and r2 nesting on all six shelter/pct models
    let mut orth_worst: f64 = 0.0;
    let mut nested = true;
    for field in [Field::Shelter(Year::Y2011), Field::Shelter(Year::Y2016), Field::Pct(Year::Y2011), Field::Pct(Year::Y2016)] {
        let pts = t.against_distance(field);
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sst: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let mut prev = 0.0;
        for degree in 1..=3 {
            let m = regress::fit_pairs(&pts, degree).unwrap();
            for k in 0..=degree {
                let dot: f64 = pts.iter().map(|&(x, y)| (y - m.eval(x)) * (x / 156.0).powi(k as i32)).sum();
                orth_worst = orth_worst.max(dot.abs() / sst);
            }
            nested &= m.r2 >= prev - 1e-12;
            prev = m.r2;
        }
    }
    c.check(&format!("residual orthogonality (max |sum e x^k| / SST = {orth_worst:.1e} <= 1e-6)"), orth_worst <= 1e-6);
    c.check("r2 nondecreasing in degree", nested);

    // scale equivariance
    let pts = t.against_distance(Field::Shelter(Year::Y2016));
    let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, 12.0 * y)).collect();
    let mut eq = true;
    for degree in 1..=3 {
        let a = regress::fit_pairs(&pts, degree).unwrap();
        let b = regress::fit_pairs(&scaled, degree).unwrap();
        eq &= a.coefficients.iter().zip(&b.coefficients).all(|(x, y)| (12.0 * x - y).abs() <= 1e-9 * (12.0 * x).abs());
        eq &= (12.0 * a.s - b.s).abs() <= 1e-9 * b.s;
        eq &= (a.r2 - b.r2).abs() <= 1e-9;
        eq &= a.coef_p.iter().zip(&b.coef_p).all(|(x, y)| (x - y).abs() <= 1e-9);
    }
    c.check("scale equivariance of coefficients, s, r2 and p-values", eq);

    // d2 monotone in income and p, coherent at the boundaries
    let mut monotone = true;
    let mut coherent = true;
    for basis in [CurveBasis::LINEAR_TOTAL, CurveBasis::COMPOSED_CUBIC] {
        for curve in frontier::build_year_curves(t, &Year::ALL, basis).unwrap() {
            let ps = [0.30, 0.33, 0.35, 0.38, 0.40, 0.42, 0.45];
            let incomes: Vec<f64> = (30..=80).step_by(5).map(|k| k as f64 * 1000.0).collect();
            let mut grid = vec![vec![f64::NEG_INFINITY; incomes.len()]; ps.len()];
            for (a, &p) in ps.iter().enumerate() {
                for (b, &i) in incomes.iter().enumerate() {
                    let budget = BudgetConstraint::new(p, i).unwrap();
                    let z = frontier::feasibility_zone(&curve, &budget, Window::LIMITS).unwrap();
                    let tc = |d: f64| frontier::total_cost(&curve, d).unwrap().value;
                    for iv in &z.intervals {
                        coherent &= (1..10).all(|k| tc(iv[0] + (iv[1] - iv[0]) * k as f64 / 10.0) <= budget.level() + 0.01);
                    }
                    if let Some(d2) = z.d2_km() {
                        grid[a][b] = d2;
                        if d2 + 0.1 <= Window::LIMITS.hi {
                            coherent &= tc(d2 + 0.1) > budget.level();
                        }
                    }
                }
            }
            for a in 0..ps.len() {
                for b in 0..incomes.len() {
                    if a > 0 {
                        monotone &= grid[a][b] >= grid[a - 1][b] - 1e-6;
                    }
                    if b > 0 {
                        monotone &= grid[a][b] >= grid[a][b - 1] - 1e-6;
                    }
                }
            }
        }
    }
    c.check("d2 nondecreasing in income and p (incomes 30-80k, p 0.30-0.45, both bases)", monotone);
    c.check("total cost within budget inside bands and above it past d2 + 0.1 km", coherent);

    // depreciation rule evaluated on both sides of its kink
    let mut kink_ok = true;
    let mut kink_km = 0.0;
    for year in Year::ALL {
        let p = DrivingCostParams::for_year(year);
        kink_km = p.depreciation_kink_km();
        let at = drivecost::annual_driving_cost(kink_km, &p).unwrap();
        let past = drivecost::annual_driving_cost(kink_km + 1e-6, &p).unwrap();
        kink_ok &= at.annual_km == p.dep_threshold_km && at.depreciation == p.dep_flat;
        kink_ok &= (past.depreciation - p.dep_rate * past.annual_km).abs() < 1e-9;
        let below = drivecost::annual_driving_cost(17.31, &p).unwrap();
        kink_ok &= below.depreciation == p.dep_flat;
    }
    c.check(
        &format!("depreciation: flat at the threshold, per-km just past it (kink at d = {kink_km:.3} km)"),
        kink_ok,
    );

    // byte-determinism of CLI documents
    let mut same = true;
    for args in [
        &["limits", "--output", "json"][..],
        &["limits", "--output", "csv"],
        &["compare-years", "--output", "json"],
        &["plot", "--output", "svg"],
        &["plot", "--figure", "percent"],
        &["frontier", "--output", "csv"],
        &["diagnose", "--output", "json"],
    ] {
        let go = || cli::run(std::iter::once("commute-frontier").chain(args.iter().copied()));
        let (a, b) = (go(), go());
        same &= a.code == 0 && a.stdout == b.stdout;
    }
    c.check("CLI JSON/CSV/SVG outputs byte-identical across runs", same);
    c
}

#[test]
fn acceptance() {
    let t = CommunityTable::builtin();
    let criteria: [(&str, fn(&CommunityTable) -> Criterion); 7] = [
        ("AC1 shelter-curve reproduction", ac1),
        ("AC2 percent-of-income curves", ac2),
        ("AC3 income regressions", ac3),
        ("AC4 driving-cost reconstruction", ac4),
        ("AC5 commuting limits", ac5),
        ("AC6 diagnostics", ac6),
        ("AC7 property suites", ac7),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let c = f(&t);
        println!("{} {name}", if c.ok { "PASS" } else { "FAIL" });
        for l in &c.lines {
            println!("{l}");
        }
        if !c.ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
