//! Component-wise driving cost, tire-rate calibration and the depreciation
//! regime change.
//!
//! cargo run --example driving_costs

use commute_frontier::dataset::CommunityTable;
use commute_frontier::drivecost::{self, DrivingCostParams};
use commute_frontier::Year;

fn main() -> commute_frontier::Result<()> {
    let table = CommunityTable::builtin();
    for year in Year::ALL {
        let base = DrivingCostParams::for_year(year);
        let rate = drivecost::calibrate_tire_rate(&table, &base, year)?;
        let params = base.with_tire_rate(rate);
        println!("{year}: calibrated tire rate {rate:.6} $/km");

        let worst = table
            .records
            .iter()
            .filter_map(|r| {
                let obs = r.drive(year)?;
                let model = drivecost::monthly_driving_cost(r.distance_km, &params).ok()?;
                Some((model - obs).abs() / obs)
            })
            .fold(0.0, f64::max);
        println!("  worst reconstruction error {:.3}%", 100.0 * worst);

        let kink = params.depreciation_kink_km();
        for d in [kink - 0.01, kink + 0.01] {
            let b = drivecost::annual_driving_cost(d, &params)?;
            println!("  d = {d:7.3} km: depreciation {:8.2}, monthly total {:7.2}", b.depreciation, b.total_monthly);
        }
    }

    // A fuel-price sensitivity run.
    let mut dear = DrivingCostParams::defaults_2016();
    dear.fuel_price *= 1.5;
    let cheap = DrivingCostParams::defaults_2016();
    for d in [25.0, 75.0, 150.0] {
        println!(
            "2016 at {d:5.1} km: {:7.2} $/month, {:7.2} with fuel +50%",
            drivecost::monthly_driving_cost(d, &cheap)?,
            drivecost::monthly_driving_cost(d, &dear)?
        );
    }

    println!("{}", drivecost::params_to_json(&[DrivingCostParams::defaults_2011(), cheap])?);
    Ok(())
}
