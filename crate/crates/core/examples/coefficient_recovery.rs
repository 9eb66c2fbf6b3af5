// Recover planted HAR-J-LE coefficients from a synthetic data-generating process.

use std::error::Error;

use harvol::estimation::FitOptions;
use harvol::features::ModelSpec;
use harvol::models::fit_model;
use harvol::simulator::simulate_har_dgp;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = ModelSpec::HarJLe;
    let planted = [-0.6, 0.4, 0.3, 0.23, 50.0, -30.0, 20.0, 0.0, 0.0, 0.0, 3.5, 0.0, 0.0];
    let measures = simulate_har_dgp(&planted, spec, 5000, 0.35, 2024)?;
    let fit = fit_model(&measures, spec, &FitOptions::default())?;
    println!("{spec} on {} rows, Newey-West lag {}", fit.nobs, fit.bandwidth_used);
    println!("{:<5}{:>10}{:>12}{:>10}", "", "planted", "estimate", "HAC se");
    for (i, name) in fit.names.iter().enumerate() {
        println!(
            "{name:<5}{:>10.3}{:>12.3}{:>10.3} {}",
            planted[i],
            fit.coefficients[i],
            fit.hac_se[i],
            fit.significance(i).stars()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
