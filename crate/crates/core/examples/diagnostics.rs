//! Ryan-Joiner normality per column, and Moran's I under two weight
//! specifications on synthetic planar coordinates.
//!
//! The sample carries no coordinates, so here each community is placed on a
//! ray at its driving distance with a small deterministic lateral offset.
//!
//! cargo run --example diagnostics

use commute_frontier::cli::DEFAULT_DIAGNOSE_COLUMNS;
use commute_frontier::dataset::{CommunityTable, Field};
use commute_frontier::stats;

fn main() -> commute_frontier::Result<()> {
    let table = CommunityTable::builtin();
    let coords: Vec<(f64, f64)> = table
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.distance_km, if i % 2 == 0 { 5.0 } else { -5.0 }))
        .collect();
    let knn = stats::build_weights(&coords, "knn:4")?;
    let band = stats::build_weights(&coords, "inverse-distance:band=60,row")?;

    println!("{:<20}{:>8}{:>10}{:>18}{:>18}", "column", "RJ", "RJ p", "I knn:4 (p)", "I inv-dist (p)");
    for name in DEFAULT_DIAGNOSE_COLUMNS {
        let field: Field = name.parse()?;
        let values = table.column(field);
        let rj = stats::ryan_joiner(&values)?;
        let a = stats::morans_i(&values, &knn, 999, 7)?;
        let b = stats::morans_i(&values, &band, 999, 7)?;
        println!(
            "{name:<20}{:>8.3}{:>10}{:>18}{:>18}",
            rj.statistic,
            rj.detail,
            format!("{:.3} ({:.3})", a.statistic, a.p_value),
            format!("{:.3} ({:.3})", b.statistic, b.p_value)
        );
    }
    Ok(())
}
