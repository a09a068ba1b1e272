//! Least squares on all rows or on a subset of rows.
//!
//! The design is reduced with a Householder QR and the triangular factor is
//! solved through its SVD, which yields the minimum-norm solution when the
//! selected rows do not span all `p` directions. Singular values below
//! `1e-10` times the largest are treated as zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{subset_sum_of_squares, CoefficientVector, Dataset};

/// Relative singular-value cutoff for the rank decision.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Which rows enter a least-squares fit.
#[derive(Debug, Clone, Copy)]
pub enum Rows<'a> {
    All,
    Subset(&'a [usize]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub beta: CoefficientVector,
    /// Sum of squared residuals over the fitted rows.
    pub ss: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

pub fn ls_fit(d: &Dataset, rows: Rows<'_>) -> Result<LsSolution> {
    let all: Vec<usize>;
    let idx = match rows {
        Rows::All => {
            all = (0..d.n()).collect();
            &all[..]
        }
        Rows::Subset(s) => s,
    };
    if idx.is_empty() {
        return Err(Error::Empty("least-squares subset"));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= d.n()) {
        return Err(Error::InvalidInput(format!("row index {bad} out of range")));
    }

    let p = d.p();
    let m = idx.len();
    let design = DMatrix::from_fn(m, p, |r, c| if c == 0 { 1.0 } else { d.x(idx[r])[c - 1] });
    let mut rhs = DVector::from_iterator(m, idx.iter().map(|&i| d.y(i)));

    let qr = design.qr();
    qr.q_tr_mul(&mut rhs);
    let k = m.min(p);
    let r = qr.r();
    let rhs = rhs.rows(0, k).into_owned();

    let svd = r.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = RANK_TOLERANCE * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let solution = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::DegenerateDesign(e.to_string()))?;

    let beta: Vec<f64> = solution.iter().copied().collect();
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::DegenerateDesign(
            "least-squares solution is not finite".into(),
        ));
    }
    let ss = subset_sum_of_squares(d, &beta, idx);
    Ok(LsSolution {
        beta: CoefficientVector::from_vec_unchecked(beta),
        ss,
        rank,
        rank_deficient: rank < p,
    })
}
