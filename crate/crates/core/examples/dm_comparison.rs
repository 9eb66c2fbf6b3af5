// Diebold-Mariano comparisons of a benchmark against richer models.

use std::error::Error;

use harvol::evaluation::{dm_matrix, dm_table, dm_test, LossKind};
use harvol::features::ModelSpec;
use harvol::forecast::rolling_panel;
use harvol::measures::compute_all;
use harvol::simulator::{simulate, SimConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (dataset, _) = simulate(&SimConfig { days: 1000, n_per_day: 48, seed: 5, leverage_rho: -0.7, ..SimConfig::default() })?;
    let measures = compute_all(&dataset)?;
    let models = [ModelSpec::HarJ, ModelSpec::HarJLe, ModelSpec::RsvJLe];
    let panel = rolling_panel(&measures, &models, 500)?;

    let one = dm_test(&panel.records[&ModelSpec::HarJ], &panel.records[&ModelSpec::HarJLe], LossKind::Hmse, 5)?;
    println!(
        "HAR-J vs HAR-J-LE, HMSE, Bartlett lag 5: DM = {:.3}{} (p = {:.3})",
        one.statistic,
        one.significance().stars(),
        one.p_value
    );
    print!("{}", dm_table(&dm_matrix(&panel, &LossKind::ALL, 0)?));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
