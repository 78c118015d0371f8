//! The commuting-limit table over incomes and budget shares, on both curve
//! bases.
//!
//! cargo run --example commuting_limits

use commute_frontier::dataset::CommunityTable;
use commute_frontier::frontier::{self, CurveBasis, Window};
use commute_frontier::Year;

fn main() -> commute_frontier::Result<()> {
    let table = CommunityTable::builtin();
    let incomes = [30_000.0, 40_000.0, 50_000.0, 60_000.0];
    let ps = [0.42, 0.45];
    for (name, basis) in [
        ("linear shelter, linear driving", CurveBasis::LINEAR_TOTAL),
        ("cubic shelter, component driving model", CurveBasis::COMPOSED_CUBIC),
    ] {
        let curves = frontier::build_year_curves(&table, &Year::ALL, basis)?;
        let limits = frontier::commuting_limits(&curves, &incomes, &ps, Window::LIMITS)?;
        println!("{name}");
        println!("{}", limits.to_text());
    }
    Ok(())
}
