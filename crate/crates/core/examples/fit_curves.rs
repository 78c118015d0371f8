//! Shelter, income and percent-of-income regressions on distance, degree 1
//! to 3, with t and F inference.
//!
//! cargo run --example fit_curves

use commute_frontier::dataset::{CommunityTable, Field};
use commute_frontier::regress;
use commute_frontier::Year;

fn main() -> commute_frontier::Result<()> {
    let table = CommunityTable::builtin();
    for year in Year::ALL {
        for field in [Field::Shelter(year), Field::Pct(year)] {
            for degree in 1..=3 {
                let m = regress::fit_pairs(&table.against_distance(field), degree)?;
                println!("{field} ~ distance, degree {degree}");
                println!("{}", m.to_table_text());
            }
        }
        let income = regress::fit_pairs(&table.against_distance(Field::Income(year)), 1)?;
        println!("{} ~ distance", Field::Income(year));
        println!("{}", income.to_table_text());
    }

    let cubic = regress::fit_pairs(&table.against_distance(Field::Shelter(Year::Y2011)), 3)?;
    for d in [0.0, 120.0, 200.0] {
        let p = regress::predict(&cubic, d)?;
        println!(
            "R_2011({d}) = {:.2}{}",
            p.value,
            if p.extrapolated { " (extrapolated)" } else { "" }
        );
    }
    Ok(())
}
