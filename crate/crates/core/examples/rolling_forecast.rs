// Rolling-window one-day-ahead forecasts and out-of-sample losses.

use std::error::Error;

use harvol::evaluation::{loss_table, losses};
use harvol::features::ModelSpec;
use harvol::forecast::rolling_panel;
use harvol::measures::compute_all;
use harvol::simulator::{simulate, SimConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (dataset, _) = simulate(&SimConfig { days: 900, n_per_day: 48, seed: 11, ..SimConfig::default() })?;
    let measures = compute_all(&dataset)?;
    let models = [ModelSpec::HarJ, ModelSpec::HarJLe, ModelSpec::RsvAjLe];
    let panel = rolling_panel(&measures, &models, 600)?;
    println!("{} paired forecasts per model, window 600 rows", panel.dates.len());
    let reports = panel.models.iter().map(|m| losses(&panel.records[m])).collect::<Result<Vec<_>, _>>()?;
    print!("{}", loss_table(&reports));
    let last = panel.records[&ModelSpec::HarJ].last().expect("non-empty");
    println!("last HAR-J forecast {}: predicted ln RV {:.3}, realized {:.3}", last.date, last.predicted, last.realized);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
