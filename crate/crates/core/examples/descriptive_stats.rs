// Descriptive statistics of the daily variables and Ljung-Box tests.

use std::error::Error;

use harvol::diagnostics::{describe_measures, descriptive_table, ljung_box};
use harvol::measures::compute_all;
use harvol::simulator::{simulate, SimConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (dataset, _) = simulate(&SimConfig { days: 1200, n_per_day: 78, seed: 3, ..SimConfig::default() })?;
    let measures = compute_all(&dataset)?;
    print!("{}", descriptive_table("simulated", &describe_measures(&measures, true)?));
    let ln_rv: Vec<f64> = measures.iter().map(|m| m.rv.ln()).collect();
    for lags in [5, 20, 50] {
        let (q, p) = ljung_box(&ln_rv, lags)?;
        println!("ln RV Ljung-Box Q({lags}) = {q:.1}, p = {p:.2e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
