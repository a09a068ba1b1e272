//! Shared regression types: datasets, coefficient vectors, residuals and the
//! fit record every estimator returns.
//!
//! The model is `y_i = (1, x_i') beta + e_i`; the intercept always occupies
//! slot 0 of a [`CoefficientVector`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` observations of `(x, y)` with `x` of length `p - 1`.
///
/// Values are checked once at construction, so every estimator can assume
/// finite inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    // row-major, n * (p - 1)
    x: Vec<f64>,
    y: Vec<f64>,
    predictors: usize,
}

impl Dataset {
    /// Builds a dataset from predictor rows and responses.
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        let predictors = x.first().map(Vec::len).ok_or(Error::Empty("dataset"))?;
        let mut flat = Vec::with_capacity(x.len() * predictors);
        for row in &x {
            if row.len() != predictors {
                return Err(Error::DimensionMismatch {
                    expected: predictors,
                    actual: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(flat, y, predictors)
    }

    /// Builds a dataset from `(x, y)` pairs.
    pub fn from_rows<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, f64)>,
    {
        let (x, y) = rows.into_iter().unzip();
        Self::new(x, y)
    }

    /// Builds a dataset from a row-major predictor buffer of `n * predictors`
    /// values.
    pub fn from_flat(x: Vec<f64>, y: Vec<f64>, predictors: usize) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if predictors == 0 {
            return Err(Error::InvalidInput(
                "at least one predictor is required (p >= 2)".into(),
            ));
        }
        if x.len() != y.len() * predictors {
            return Err(Error::DimensionMismatch {
                expected: y.len() * predictors,
                actual: x.len(),
            });
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite predictor value at row {}, predictor {}",
                pos / predictors,
                pos % predictors
            )));
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite response value at row {row}"
            )));
        }
        Ok(Dataset { x, y, predictors })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Model dimension: predictors plus the intercept.
    pub fn p(&self) -> usize {
        self.predictors + 1
    }

    pub fn predictors(&self) -> usize {
        self.predictors
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.predictors..(i + 1) * self.predictors]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = (&[f64], f64)> + '_ {
        self.x
            .chunks_exact(self.predictors)
            .zip(self.y.iter().copied())
    }

    /// Returns a copy with the responses replaced.
    pub fn with_responses(&self, y: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.x.clone(), y, self.predictors)
    }

    /// Returns a copy keeping only the listed rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut x = Vec::with_capacity(rows.len() * self.predictors);
        let mut y = Vec::with_capacity(rows.len());
        for &i in rows {
            if i >= self.n() {
                return Err(Error::InvalidInput(format!("row index {i} out of range")));
            }
            x.extend_from_slice(self.x(i));
            y.push(self.y[i]);
        }
        Self::from_flat(x, y, self.predictors)
    }

    /// Fitted value `(1, x_i') beta` for row `i`. `beta` must have length `p`.
    pub(crate) fn fitted(&self, i: usize, beta: &[f64]) -> f64 {
        self.x(i)
            .iter()
            .zip(&beta[1..])
            .fold(beta[0], |acc, (x, b)| acc + x * b)
    }
}

/// A coefficient vector in `R^p`; slot 0 is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientVector(Vec<f64>);

impl CoefficientVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("coefficient vector"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coefficient in {values:?}"
            )));
        }
        Ok(CoefficientVector(values))
    }

    pub fn zeros(p: usize) -> Self {
        CoefficientVector(vec![0.0; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn intercept(&self) -> f64 {
        self.0[0]
    }

    /// Squared Euclidean distance to `other`.
    pub fn squared_distance(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        CoefficientVector(values)
    }
}

impl std::ops::Index<usize> for CoefficientVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Residuals `r_i = y_i - (1, x_i') beta`, one per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector(Vec<f64>);

impl ResidualVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().map(|r| r * r).sum()
    }
}

/// Computes the residual vector of `beta` on `d`.
pub fn residuals(d: &Dataset, beta: &CoefficientVector) -> Result<ResidualVector> {
    if beta.len() != d.p() {
        return Err(Error::DimensionMismatch {
            expected: d.p(),
            actual: beta.len(),
        });
    }
    Ok(ResidualVector(residuals_raw(d, beta.as_slice())))
}

pub(crate) fn residuals_raw(d: &Dataset, beta: &[f64]) -> Vec<f64> {
    (0..d.n()).map(|i| d.y(i) - d.fitted(i, beta)).collect()
}

/// Sum of squared residuals of `beta` over the listed rows.
pub(crate) fn subset_sum_of_squares(d: &Dataset, beta: &[f64], rows: &[usize]) -> f64 {
    rows.iter()
        .map(|&i| {
            let r = d.y(i) - d.fitted(i, beta);
            r * r
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lts,
    Lst,
    Ls,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Lts, Method::Lst, Method::Ls];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lts => "LTS",
            Method::Lst => "LST",
            Method::Ls => "LS",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lts" => Ok(Method::Lts),
            "lst" => Ok(Method::Lst),
            "ls" | "ols" => Ok(Method::Ls),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Search statistics attached to a fit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Candidates (LST) or random starts (LTS) examined.
    pub evaluated: usize,
    /// Candidates dropped because of tied outlyingness or a zero scale.
    pub skipped: usize,
    /// Total least-squares solves performed.
    pub ls_solves: usize,
}

/// Result of a fit: coefficients, the retained observations and the sum of
/// squared residuals over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimmedFit {
    pub beta: CoefficientVector,
    /// Zero-based, ascending row indices.
    pub retained: Vec<usize>,
    pub objective: f64,
    pub method: Method,
    pub diagnostics: FitDiagnostics,
}

impl TrimmedFit {
    /// Recomputes the objective from the coefficients and the retained set.
    pub fn recompute_objective(&self, d: &Dataset) -> f64 {
        subset_sum_of_squares(d, self.beta.as_slice(), &self.retained)
    }
}
