//! Write the cost-curve and percent-of-income figures as SVG, plus their
//! series as CSV, into a directory (default `./figures`).
//!
//! cargo run --example plot_figures [-- out_dir]

use std::path::PathBuf;

use commute_frontier::dataset::CommunityTable;
use commute_frontier::frontier::{self, CurveBasis, Window};
use commute_frontier::{plot, Year};

fn main() -> commute_frontier::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    let table = CommunityTable::builtin();

    let curves = frontier::build_year_curves(&table, &Year::ALL, CurveBasis::COMPOSED_CUBIC)?;
    let cost = plot::cost_curves_figure(&curves, 60_000.0, Window::DATA)?;
    let percent = plot::percent_curves_figure(&table, &Year::ALL, 3, Window::DATA)?;

    for (name, spec) in [("cost_curves", &cost), ("percent_curves", &percent)] {
        let svg = dir.join(format!("{name}.svg"));
        std::fs::write(&svg, plot::render_plot(spec)?)?;
        std::fs::write(dir.join(format!("{name}.csv")), plot::series_csv(spec))?;
        println!("wrote {}", svg.display());
        for a in &spec.annotations {
            println!("  {} at {:.1} km", a.label, a.x);
        }
    }
    Ok(())
}
