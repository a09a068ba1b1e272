//! Fit a line with a block of gross outliers using all three estimators.

use lstreg::{fit, Dataset, EstimatorSettings, Method};

fn main() -> Result<(), lstreg::Error> {
    let data = Dataset::from_rows((0..40).map(|i| {
        let x = (0.9 * i as f64).sin() * 4.0 + 0.05 * i as f64;
        let noise = (2.7 * i as f64).cos() * 0.3;
        let y = if i % 8 == 5 { 30.0 - x } else { 1.0 + 2.0 * x + noise };
        (vec![x], y)
    }))?;

    let mut settings = EstimatorSettings::default();
    settings.lst.restarts = 10;
    println!("true line: y = 1 + 2x, 5 of 40 rows replaced");
    for method in Method::ALL {
        let f = fit(&data, method, &settings, 7)?;
        println!(
            "{:<4} intercept {:>8.4}  slope {:>8.4}  retained {:>2}  objective {:.4}",
            method.as_str(),
            f.beta[0],
            f.beta[1],
            f.retained.len(),
            f.objective
        );
    }
    Ok(())
}
