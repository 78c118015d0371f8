//! Boundary and curve values on the embedded sample.

use commute_frontier::dataset::{CommunityTable, Field};
use commute_frontier::drivecost::{self, DrivingCostParams};
use commute_frontier::frontier::{self, BudgetConstraint, Crossed, CurveBasis, DriveCost, TotalCostCurve, Verdict, Window};
use commute_frontier::regress::{self, PolynomialModel};
use commute_frontier::Year;

fn curve(year: Year, basis: CurveBasis) -> TotalCostCurve {
    frontier::build_curve(&CommunityTable::builtin(), year, basis, &DrivingCostParams::for_year(year)).unwrap()
}

#[test]
fn total_cost_at_120_km_is_near_2100_in_2011() {
    let tc = frontier::total_cost(&curve(Year::Y2011, CurveBasis::COMPOSED_CUBIC), 120.0).unwrap();
    assert!((tc.value - 2100.0).abs() <= 40.0, "{}", tc.value);
    assert!(!tc.extrapolated);
}

#[test]
fn published_cubic_shelter_composes_to_the_same_neighbourhood() {
    let shelter = PolynomialModel::from_coefficients(&[1438.0, -6.653, 0.03967, -0.0001186], [10.0, 156.0]).unwrap();
    let c = TotalCostCurve::new("2011", shelter, DriveCost::CostModel {
        params: DrivingCostParams::defaults_2011(),
    });
    let tc = frontier::total_cost(&c, 120.0).unwrap().value;
    assert!((tc - 2100.0).abs() <= 40.0, "{tc}");
}

#[test]
fn forty_two_percent_of_60k_reaches_about_120_km_in_2011() {
    let c = curve(Year::Y2011, CurveBasis::COMPOSED_CUBIC);
    let b = BudgetConstraint::new(0.42, 60_000.0).unwrap();
    assert!((b.level() - 2100.0).abs() < 1e-9);
    let z = frontier::feasibility_zone(&c, &b, Window::DATA).unwrap();
    let d2 = z.d2.unwrap();
    assert_eq!(d2.crossed, Crossed::Total);
    assert!((115.0..=125.0).contains(&d2.km), "{}", d2.km);
}

#[test]
fn thirty_percent_rule_pushes_2016_households_past_40_km() {
    for basis in [CurveBasis::COMPOSED_CUBIC, CurveBasis::LINEAR_TOTAL] {
        let z = frontier::feasibility_zone(
            &curve(Year::Y2016, basis),
            &BudgetConstraint::new(0.30, 60_000.0).unwrap(),
            Window::DATA,
        )
        .unwrap();
        let d1 = z.d1.expect("shelter crosses the 30% level").km;
        assert!((40.0..=50.0).contains(&d1), "{basis:?}: {d1}");
        assert_eq!(z.d1.unwrap().crossed, Crossed::Shelter);
    }
}

#[test]
fn shelter_and_driving_cost_meet_near_112_km_in_2011() {
    for basis in [CurveBasis::COMPOSED_CUBIC, CurveBasis::LINEAR_TOTAL] {
        let d = frontier::indifference_distance(&curve(Year::Y2011, basis), Window::DATA)
            .unwrap()
            .expect("curves cross");
        assert!((95.0..=130.0).contains(&d), "{basis:?}: {d}");
    }
}

#[test]
fn limits_table_follows_a_straight_total_cost_line() {
    let curves = frontier::build_year_curves(&CommunityTable::builtin(), &Year::ALL, CurveBasis::LINEAR_TOTAL).unwrap();
    let t = frontier::commuting_limits(&curves, &[30_000.0, 40_000.0, 50_000.0, 60_000.0], &[0.42, 0.45], Window::LIMITS).unwrap();
    let km = |label: &str, p: f64, i: f64| t.cell(label, p, i).unwrap().limit_km;
    assert!((km("2011", 0.42, 60_000.0).unwrap() - 134.0).abs() < 1.0);
    assert!((km("2011", 0.42, 50_000.0).unwrap() - 7.0).abs() < 0.5);
    assert!((km("2011", 0.45, 50_000.0).unwrap() - 52.0).abs() < 1.0);
    assert!((km("2011", 0.45, 60_000.0).unwrap() - 188.0).abs() < 1.0);
    assert!(t.cell("2011", 0.45, 60_000.0).unwrap().extrapolated);
    assert!(km("2016", 0.42, 60_000.0).is_none());
    let text = t.to_text();
    assert!(text.contains("Commuting limit, km: 42% (2011)"));
    assert!(text.contains("$2,250"));
}

#[test]
fn driving_cost_reconstruction_regression() {
    let table = CommunityTable::builtin();
    let base = DrivingCostParams::defaults_2011();
    let rate = drivecost::calibrate_tire_rate(&table, &base, Year::Y2011).unwrap();
    let p = base.with_tire_rate(rate);
    let pairs: Vec<(f64, f64)> = table
        .records
        .iter()
        .map(|r| (r.distance_km, drivecost::monthly_driving_cost(r.distance_km, &p).unwrap()))
        .collect();
    let m = regress::fit_pairs(&pairs, 1).unwrap();
    assert!((m.coefficients[0] - 378.0).abs() <= 8.0);
    assert!((m.coefficients[1] - 5.72).abs() <= 0.10);
    assert!(m.r2 >= 0.92);
}

#[test]
fn percent_of_income_curves_cross_42_percent_near_130_km() {
    let table = CommunityTable::builtin();
    for year in Year::ALL {
        let m = regress::fit_pairs(&table.against_distance(Field::Pct(year)), 3).unwrap();
        let roots = frontier::crossings(|d| m.eval(d), 42.0, 10.0, 156.0, 1.0).unwrap();
        assert!(roots.iter().any(|r| (120.0..=140.0).contains(r)), "{year}: {roots:?}");
    }
}

#[test]
fn low_incomes_are_infeasible_everywhere() {
    for year in Year::ALL {
        let c = curve(year, CurveBasis::COMPOSED_CUBIC);
        let z = frontier::feasibility_zone(&c, &BudgetConstraint::new(0.42, 30_000.0).unwrap(), Window::LIMITS).unwrap();
        assert_eq!(z.verdict, Verdict::InfeasibleEverywhere);
        assert!(z.d2.is_none() && z.intervals.is_empty());
    }
}

#[test]
fn distances_outside_the_hard_limit_are_rejected() {
    let c = curve(Year::Y2011, CurveBasis::LINEAR_TOTAL);
    assert!(frontier::total_cost(&c, 250.5).is_err());
    assert!(frontier::total_cost(&c, -1.0).is_err());
    assert!(frontier::total_cost(&c, 200.0).unwrap().extrapolated);
    assert!(Window::new(0.0, 251.0).is_err());
    assert!(Window::new(50.0, 50.0).is_err());
}
