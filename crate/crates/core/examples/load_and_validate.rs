//! Load a community table (the embedded sample, or a CSV path given as the
//! first argument) and print its validation report.
//!
//! cargo run --example load_and_validate [-- path/to/table.csv]

use commute_frontier::dataset::{self, CommunityTable, Field};
use commute_frontier::Year;

fn main() -> commute_frontier::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(path) => dataset::load_path(path)?,
        None => CommunityTable::builtin(),
    };
    let report = dataset::validate_table(&table);
    print!("{}", report.to_text());
    if !report.is_usable() {
        std::process::exit(1);
    }

    let [lo, hi] = table.distance_range().expect("non-empty table");
    println!("{} communities between {lo} and {hi} km", table.len());
    for year in Year::ALL {
        let shelter = table.column(Field::Shelter(year));
        let mean = shelter.iter().sum::<f64>() / shelter.len() as f64;
        println!("{year}: mean shelter cost {mean:.2} $/month");
    }
    Ok(())
}
