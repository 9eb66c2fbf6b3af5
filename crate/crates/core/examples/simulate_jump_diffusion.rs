// Simulated jump-diffusion paths: realized measures against the known truth.

use std::error::Error;

use harvol::measures::compute_all;
use harvol::simulator::{simulate, JumpSign, SimConfig, VolProcess};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for sign in [JumpSign::Both, JumpSign::NegativeOnly] {
        let cfg = SimConfig {
            days: 2000,
            n_per_day: 288,
            vol: VolProcess::Constant { sigma: 0.01 },
            jump_intensity: 0.3,
            jump_sd: 0.03,
            jump_sign: sign,
            seed: 42,
            ..SimConfig::default()
        };
        let (dataset, truth) = simulate(&cfg)?;
        let m = compute_all(&dataset)?;
        let n = m.len() as f64;
        let avg = |f: &dyn Fn(usize) -> f64| (0..m.len()).map(f).sum::<f64>() / n;
        println!("{sign:?} jumps, {} days:", m.len());
        println!("  mean IV      {:.4e}   mean BV {:.4e}", avg(&|i| truth.days[i].iv), avg(&|i| m[i].bv.unwrap()));
        println!("  mean sum k^2 {:.4e}   mean RV-BV {:.4e}", avg(&|i| truth.days[i].jump2()), avg(&|i| m[i].rv - m[i].bv.unwrap()));
        println!("  mean J+ {:.4e}   mean J- {:.4e}", avg(&|i| m[i].j_plus().unwrap()), avg(&|i| m[i].j_minus().unwrap()));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
