//! Median, MAD and outlyingness of a residual vector, and the rows kept by
//! depth trimming at a few thresholds.

use lstreg::{index_set, mad, median, objective_q, outlyingness, CoefficientVector, Dataset};

fn main() -> Result<(), lstreg::Error> {
    let r = [1.0, 2.0, 3.0, 4.0, 100.0];
    println!("residuals    {r:?}");
    println!("median       {}", median(&r)?);
    println!("MAD          {}", mad(&r)?);
    println!("outlyingness {:?}", outlyingness(&r)?.as_slice());

    // beta = 0, so the responses are the residuals
    let d = Dataset::from_rows(r.iter().map(|&y| (vec![0.0], y)))?;
    let zero = CoefficientVector::zeros(2);
    for alpha in [1.0, 1.5, 2.0, 100.0] {
        println!(
            "alpha {alpha:>5}: rows {:?}  Q = {}",
            index_set(&d, &zero, alpha)?,
            objective_q(&d, &zero, alpha)?
        );
    }

    // a strict majority of identical values fixes the scale at 1
    println!("MAD of (5, 5, 5, 1, 9) = {}", mad(&[5.0, 5.0, 5.0, 1.0, 9.0])?);
    Ok(())
}
