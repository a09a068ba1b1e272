//! Median, MAD and the one-dimensional outlyingness `|v - Med(v)| / MAD(v)`.
//!
//! MAD is the raw median of absolute deviations, without a consistency
//! factor. When at least `floor((n + 1) / 2)` entries are identical the scale
//! is defined to be 1: those entries sit at the deepest position and the
//! formula would otherwise give zero. Identity is tested with exact float
//! equality.

use crate::error::{Error, Result};

/// Non-negative outlyingness values, one per input entry.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlyingnessVector(Vec<f64>);

impl OutlyingnessVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Location and scale of a sample as used by the outlyingness function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationScale {
    pub median: f64,
    pub mad: f64,
    /// Whether the majority-identical rule set `mad` to 1.
    pub majority_rule: bool,
}

/// Median of a sorted, non-empty slice. Even lengths average the two central
/// order statistics.
fn sorted_median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Median of an unsorted slice, reordering it in place.
fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    let (lower, upper, _) = v.select_nth_unstable_by(n / 2, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = lower
            .iter()
            .copied()
            .max_by(f64::total_cmp)
            .expect("even length >= 2");
        (lower + upper) / 2.0
    }
}

fn check(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Empty("sample"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("sample contains non-finite values".into()));
    }
    Ok(())
}

pub fn median(v: &[f64]) -> Result<f64> {
    check(v)?;
    Ok(median_in_place(&mut v.to_vec()))
}

/// Longest run of identical values in a sorted slice.
fn max_multiplicity(sorted: &[f64]) -> usize {
    sorted
        .chunk_by(|a, b| a == b)
        .map(<[f64]>::len)
        .max()
        .unwrap_or(0)
}

/// Median and MAD in one pass over a sorted copy.
pub fn location_scale(v: &[f64]) -> Result<LocationScale> {
    check(v)?;
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let median = sorted_median(&sorted);
    let n = v.len();
    if max_multiplicity(&sorted) >= (n + 1) / 2 {
        return Ok(LocationScale {
            median,
            mad: 1.0,
            majority_rule: true,
        });
    }
    for x in sorted.iter_mut() {
        *x = (*x - median).abs();
    }
    Ok(LocationScale {
        median,
        mad: median_in_place(&mut sorted),
        majority_rule: false,
    })
}

pub fn mad(v: &[f64]) -> Result<f64> {
    location_scale(v).map(|ls| ls.mad)
}

/// Outlyingness of every entry of `v` relative to `v` itself.
///
/// Fails with [`Error::DegenerateScale`] if the MAD is zero and the
/// majority-identical rule did not apply; the error carries no coefficient
/// context here, callers that know the coefficients attach it.
pub fn outlyingness(v: &[f64]) -> Result<OutlyingnessVector> {
    let ls = location_scale(v)?;
    if ls.mad <= 0.0 {
        return Err(Error::DegenerateScale { beta: Vec::new() });
    }
    Ok(OutlyingnessVector(
        v.iter().map(|x| (x - ls.median).abs() / ls.mad).collect(),
    ))
}
