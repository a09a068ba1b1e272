//! Relative efficiency on clean correlated Gaussian samples.
//!
//! `cargo run --release --example efficiency_study -- 200`

use lstreg::{run_study, Contamination, Design, EstimatorSettings, Method, SimulationScenario};

fn main() -> Result<(), lstreg::Error> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut settings = EstimatorSettings::default();
    settings.lts.starts = 100;
    for (n, p) in [(50, 3), (100, 5)] {
        let s = SimulationScenario {
            n,
            p,
            design: Design::Equicorrelated { rho: 0.9 },
            beta0: None,
            contamination: Contamination::none(p),
            replications: reps,
            seed: 1,
        };
        let study = run_study(&s, &Method::ALL, &settings)?;
        println!("n = {n}, p = {p}, R = {reps}\n{}", study.table.to_text());
    }
    Ok(())
}
