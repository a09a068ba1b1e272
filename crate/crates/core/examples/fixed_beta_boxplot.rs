//! Known coefficients with 5% of rows moved to (4, ..., 4, -4): writes the
//! per-replication squared deviations in long format for box plots.
//!
//! `cargo run --release --example fixed_beta_boxplot -- 200 deviations.csv`

use lstreg::{run_study, CoefficientVector, Contamination, Design, EstimatorSettings, Method, SimulationScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let reps = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let out = args.next();
    let p = 10;
    let beta0: Vec<f64> = (0..p).map(|j| if j < p / 2 { 1.0 } else { -1.0 }).collect();
    let s = SimulationScenario {
        n: 100,
        p,
        design: Design::IidStandard,
        beta0: Some(CoefficientVector::new(beta0)?),
        contamination: Contamination::corner(0.05, p, 4.0),
        replications: reps,
        seed: 3,
    };
    let mut settings = EstimatorSettings::default();
    settings.lts.starts = 100;
    let study = run_study(&s, &Method::ALL, &settings)?;
    println!("{}", study.table.to_text());
    match out {
        Some(path) => {
            std::fs::write(&path, study.squared_deviation_csv())?;
            println!("wrote {path}");
        }
        None => print!("{}", study.squared_deviation_csv().lines().take(7).collect::<Vec<_>>().join("\n") + "\n..."),
    }
    Ok(())
}
