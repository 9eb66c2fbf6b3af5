// Tick CSV -> per-day sessions -> realized measures.

use std::error::Error;

use harvol::ingest::{parse_ticks, sessions_from_ticks};
use harvol::measures::compute_all;

const TICKS: &str = "\
# two short sessions; the second day has one duplicated timestamp
timestamp,price
2024-03-04T09:30:00,100.00
2024-03-04T09:35:00,100.20
2024-03-04T09:40:00,100.05
2024-03-04T09:45:00,99.90
2024-03-04T09:50:00,100.10
2024-03-05T09:30:00,101.00
2024-03-05T09:35:00,100.60
2024-03-05T09:35:00,100.70
2024-03-05T09:40:00,100.40
2024-03-05T09:45:00,102.30
2024-03-05T09:50:00,102.10
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ticks = parse_ticks(TICKS.as_bytes())?;
    let sessions = sessions_from_ticks(&ticks, 2, "demo")?;
    for m in compute_all(&sessions.dataset)? {
        println!(
            "{}  RV {:.3e}  BV {:.3e}  J {:.3e}  RSV+ {:.3e}  RSV- {:.3e}  J+ {:.3e}  J- {:.3e}  r {:+.4}",
            m.date,
            m.rv,
            m.bv.unwrap(),
            m.j().unwrap(),
            m.rsv_plus.unwrap(),
            m.rsv_minus.unwrap(),
            m.j_plus().unwrap(),
            m.j_minus().unwrap(),
            m.ret.unwrap()
        );
        assert_eq!(m.rsv_plus.unwrap() + m.rsv_minus.unwrap(), m.rv);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
