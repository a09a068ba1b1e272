//! Seven correlated bivariate points, fitted clean and with two of them
//! moved far from the pattern. Prints the points and the three lines.

use lstreg::sim::illustration_sample;
use lstreg::{fit, Dataset, EstimatorSettings, Method};

fn lines(label: &str, d: &Dataset) -> Result<(), lstreg::Error> {
    let settings = EstimatorSettings::default();
    println!("{label}");
    for (x, y) in d.rows() {
        println!("  ({:>7.3}, {:>7.3})", x[0], y);
    }
    for m in Method::ALL {
        match fit(d, m, &settings, 11) {
            Ok(f) => println!("  {:<4} y = {:.3} {:+.3} x", m.as_str(), f.beta[0], f.beta[1]),
            Err(e) => println!("  {:<4} {e}", m.as_str()),
        }
    }
    Ok(())
}

fn main() -> Result<(), lstreg::Error> {
    let s = illustration_sample(7, 0.88, 2, [4.0, -4.0], 5)?;
    lines("clean", &s.clean)?;
    lines(&format!("rows {:?} replaced by (4, -4)", s.replaced), &s.contaminated)
}
