//! Least trimmed squares: concentration steps never increase the trimmed
//! objective, and the multi-start search keeps the best end point.

use lstreg::lts::{concentration_step, lts_fit, lts_objective, reweight, LtsConfig};
use lstreg::{CoefficientVector, Dataset};

fn main() -> Result<(), lstreg::Error> {
    let data = Dataset::from_rows((0..60).map(|i| {
        let x = (0.7 * i as f64).sin() * 3.0;
        let e = (5.1 * i as f64).sin() * 0.5;
        let y = if i < 12 { 15.0 + x } else { -1.0 + 0.5 * x + e };
        (vec![x], y)
    }))?;
    let cfg = LtsConfig { starts: 100, ..LtsConfig::for_problem(data.n(), data.p()) };

    let mut beta = vec![0.0, 0.0];
    for step in 0..6 {
        let obj = lts_objective(&data, &CoefficientVector::new(beta.clone())?, cfg.h)?;
        println!("step {step}: beta {beta:.4?} objective {obj:.4}");
        beta = concentration_step(&data, &beta, cfg.h)?.solution.beta.into_vec();
    }

    let raw = lts_fit(&data, &cfg)?;
    println!("search: beta {:.4?} objective {:.4} (h = {})", raw.beta.as_slice(), raw.objective, cfg.h);
    let rw = reweight(&data, &raw, cfg.h)?;
    println!("reweighted: beta {:.4?} on {} rows", rw.beta.as_slice(), rw.retained.len());
    Ok(())
}
