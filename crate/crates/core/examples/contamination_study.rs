//! EMSE as a growing share of rows is moved to the point (7, ..., 7, -7).
//!
//! `cargo run --release --example contamination_study -- 200`

use lstreg::{run_study, Contamination, Design, EstimatorSettings, Method, SimulationScenario};

fn main() -> Result<(), lstreg::Error> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut settings = EstimatorSettings::default();
    settings.lts.starts = 100;
    let p = 5;
    println!("{:>6}{:>10}{:>10}{:>10}", "rate", "LTS", "LST", "LS");
    for rate in [0.0, 0.05, 0.1, 0.2] {
        let s = SimulationScenario {
            n: 100,
            p,
            design: Design::Equicorrelated { rho: 0.9 },
            beta0: None,
            contamination: Contamination::corner(rate, p, 7.0),
            replications: reps,
            seed: 2,
        };
        let t = run_study(&s, &Method::ALL, &settings)?.table;
        let e = |m| t.row(m).map_or(f64::NAN, |r| r.emse);
        println!("{rate:>6}{:>10.4}{:>10.4}{:>10.4}", e(Method::Lts), e(Method::Lst), e(Method::Ls));
    }
    Ok(())
}
