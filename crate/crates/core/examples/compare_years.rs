//! How the shelter curve and the 42% boundary moved between the two census
//! years.
//!
//! cargo run --example compare_years

use commute_frontier::dataset::{CommunityTable, Field};
use commute_frontier::frontier::{self, BudgetConstraint, CurveBasis, Window};
use commute_frontier::{regress, Year};

fn main() -> commute_frontier::Result<()> {
    let table = CommunityTable::builtin();
    let fit = |y| regress::fit_pairs(&table.against_distance(Field::Shelter(y)), 1);
    let (a, b) = (fit(Year::Y2011)?, fit(Year::Y2016)?);
    println!("shelter constant {:9.2} -> {:9.2} ({:+.2})", a.coefficients[0], b.coefficients[0], b.coefficients[0] - a.coefficients[0]);
    println!("shelter slope    {:9.3} -> {:9.3} ({:+.3})", a.coefficients[1], b.coefficients[1], b.coefficients[1] - a.coefficients[1]);

    let curves = frontier::build_year_curves(&table, &Year::ALL, CurveBasis::LINEAR_TOTAL)?;
    for income in [50_000.0, 60_000.0, 70_000.0, 80_000.0] {
        let budget = BudgetConstraint::new(0.42, income)?;
        let d2: Vec<String> = curves
            .iter()
            .map(|c| {
                let z = frontier::feasibility_zone(c, &budget, Window::LIMITS)?;
                Ok(z.d2_km().map_or("-".to_string(), |d| format!("{d:.1}")))
            })
            .collect::<commute_frontier::Result<_>>()?;
        println!("42% of {}: d2 2011 {:>6} km, 2016 {:>6} km", frontier::thousands(income), d2[0], d2[1]);
    }
    Ok(())
}
