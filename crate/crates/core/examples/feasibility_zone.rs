//! Budget boundaries for one household: where shelter alone fits the budget
//! (d1), how far total cost stays within it (d2), and where shelter and
//! driving cost are equal.
//!
//! cargo run --example feasibility_zone [-- income p]

use commute_frontier::dataset::CommunityTable;
use commute_frontier::frontier::{self, BudgetConstraint, CurveBasis, Window};
use commute_frontier::Year;

fn main() -> commute_frontier::Result<()> {
    let mut args = std::env::args().skip(1);
    let income: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(60_000.0);
    let p: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.42);
    let budget = BudgetConstraint::new(p, income)?;

    let table = CommunityTable::builtin();
    let curves = frontier::build_year_curves(&table, &Year::ALL, CurveBasis::COMPOSED_CUBIC)?;
    for curve in &curves {
        let zone = frontier::feasibility_zone(curve, &budget, Window::DATA)?;
        println!("{}: budget {:.2} $/month, verdict {:?}", curve.label, zone.level_monthly, zone.verdict);
        if let Some(b) = zone.d1 {
            println!("  d1 = {:.2} km", b.km);
        }
        if let Some(b) = zone.d2 {
            println!("  d2 = {:.2} km ({:?})", b.km, b.crossed);
        }
        for iv in &zone.intervals {
            println!("  feasible on [{:.2}, {:.2}] km", iv[0], iv[1]);
        }
        if let Some(d) = frontier::indifference_distance(curve, Window::DATA)? {
            println!("  shelter = driving cost at {d:.2} km");
        }
        for d in [25.0, 75.0, 125.0] {
            println!(
                "  at {d:5.1} km: TC {:8.2} $/month, {:.1}% of income, needs {} to stay at {:.0}%",
                frontier::total_cost(curve, d)?.value,
                100.0 * frontier::affordability_share(curve, d, income)?,
                frontier::thousands(frontier::required_income(curve, d, p)?),
                100.0 * p
            );
        }
    }
    Ok(())
}
