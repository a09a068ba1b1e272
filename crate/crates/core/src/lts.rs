//! Least trimmed squares, searched with random elemental starts followed by
//! concentration steps. Kept as a comparison baseline.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{
    residuals_raw, subset_sum_of_squares, CoefficientVector, Dataset, FitDiagnostics, Method,
    TrimmedFit,
};
use crate::ols::{ls_fit, LsSolution, Rows};

/// Redraws allowed for a rank-deficient elemental start.
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtsConfig {
    /// Coverage: number of squared residuals kept.
    pub h: usize,
    pub starts: usize,
    /// Upper bound on concentration steps per start.
    pub csteps: usize,
    pub seed: u64,
}

/// `floor((n + p + 1) / 2)`, clamped to the admissible range.
pub fn default_coverage(n: usize, p: usize) -> usize {
    ((n + p + 1) / 2).clamp(n.div_ceil(2), n)
}

impl LtsConfig {
    /// Benchmark-scale defaults for an `n` by `p` problem.
    pub fn for_problem(n: usize, p: usize) -> Self {
        LtsConfig {
            h: default_coverage(n, p),
            starts: 500,
            csteps: 10,
            seed: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_coverage(self.h, n)?;
        if self.starts == 0 || self.csteps == 0 {
            return Err(Error::Config(
                "starts and csteps must both be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn check_coverage(h: usize, n: usize) -> Result<()> {
    if h < n.div_ceil(2) || h > n {
        return Err(Error::Config(format!(
            "coverage h = {h} outside [{}, {n}]",
            n.div_ceil(2)
        )));
    }
    Ok(())
}

/// Indices of the `h` smallest squared residuals, ascending. Ties in the
/// squared residual go to the lower index.
fn smallest_h(squares: &[f64], h: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..squares.len()).collect();
    let cmp = |a: &usize, b: &usize| squares[*a].total_cmp(&squares[*b]).then(a.cmp(b));
    if h < order.len() {
        order.select_nth_unstable_by(h, cmp);
    }
    order.truncate(h);
    order.sort_unstable();
    order
}

fn squared_residuals(d: &Dataset, beta: &[f64]) -> Vec<f64> {
    let mut r = residuals_raw(d, beta);
    r.iter_mut().for_each(|v| *v *= *v);
    r
}

/// Sum of the `h` smallest squared residuals of `beta`.
pub fn lts_objective(d: &Dataset, beta: &CoefficientVector, h: usize) -> Result<f64> {
    if beta.len() != d.p() {
        return Err(Error::DimensionMismatch {
            expected: d.p(),
            actual: beta.len(),
        });
    }
    check_coverage(h, d.n())?;
    let squares = squared_residuals(d, beta.as_slice());
    let kept = smallest_h(&squares, h);
    Ok(kept.iter().map(|&i| squares[i]).sum())
}

/// One concentration step from `beta`: keep the `h` smallest squared
/// residuals and refit least squares on them.
#[derive(Debug, Clone)]
pub struct ConcentrationStep {
    pub retained: Vec<usize>,
    pub solution: LsSolution,
}

pub fn concentration_step(d: &Dataset, beta: &[f64], h: usize) -> Result<ConcentrationStep> {
    let retained = smallest_h(&squared_residuals(d, beta), h);
    let solution = ls_fit(d, Rows::Subset(&retained))?;
    Ok(ConcentrationStep { retained, solution })
}

fn elemental_start(d: &Dataset, rng: &mut ChaCha8Rng) -> Result<LsSolution> {
    for _ in 0..MAX_REDRAWS {
        let rows = sample(rng, d.n(), d.p()).into_vec();
        let fit = ls_fit(d, Rows::Subset(&rows))?;
        if !fit.rank_deficient {
            return Ok(fit);
        }
    }
    Err(Error::DegenerateDesign(format!(
        "no full-rank {}-row subset found in {MAX_REDRAWS} draws",
        d.p()
    )))
}

/// Multi-start concentration-step search for the LTS estimator.
pub fn lts_fit(d: &Dataset, cfg: &LtsConfig) -> Result<TrimmedFit> {
    let (n, p) = (d.n(), d.p());
    if n <= p {
        return Err(Error::InvalidInput(format!(
            "LTS needs more observations than coefficients (n = {n}, p = {p})"
        )));
    }
    cfg.validate(n)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut diagnostics = FitDiagnostics::default();
    let mut best: Option<(f64, Vec<f64>)> = None;

    for _ in 0..cfg.starts {
        diagnostics.evaluated += 1;
        let start = elemental_start(d, &mut rng)?;
        diagnostics.ls_solves += 1;
        let mut beta = start.beta.into_vec();
        let mut previous: Option<Vec<usize>> = None;
        for _ in 0..cfg.csteps {
            let step = concentration_step(d, &beta, cfg.h)?;
            diagnostics.ls_solves += 1;
            if previous.as_ref() == Some(&step.retained) {
                break;
            }
            beta = step.solution.beta.into_vec();
            previous = Some(step.retained);
        }
        let objective = lts_objective(d, &CoefficientVector::from_vec_unchecked(beta.clone()), cfg.h)?;
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, beta));
        }
    }

    let (_, beta) = best.expect("starts >= 1");
    let retained = smallest_h(&squared_residuals(d, &beta), cfg.h);
    Ok(TrimmedFit {
        objective: subset_sum_of_squares(d, &beta, &retained),
        beta: CoefficientVector::from_vec_unchecked(beta),
        retained,
        method: Method::Lts,
        diagnostics,
    })
}

/// Standardized-residual cutoff of the reweighting step, the 0.9875
/// quantile of the standard normal.
pub const REWEIGHT_CUTOFF_QUANTILE: f64 = 0.9875;

/// Scale of the residuals from the `h` smallest squares, made consistent at
/// the normal distribution.
pub fn raw_scale(d: &Dataset, beta: &[f64], h: usize) -> f64 {
    let n = d.n();
    let squares = squared_residuals(d, beta);
    let kept = smallest_h(&squares, h);
    let mean: f64 = kept.iter().map(|&i| squares[i]).sum::<f64>() / h as f64;
    let q = h as f64 / n as f64;
    if q >= 1.0 {
        return mean.sqrt();
    }
    let normal = Normal::standard();
    let z = normal.inverse_cdf((1.0 + q) / 2.0);
    let truncated_variance = 1.0 - 2.0 * z * normal.pdf(z) / q;
    (mean / truncated_variance).sqrt()
}

/// One-step reweighting of a raw LTS fit: rows whose residual is within
/// the 0.9875 normal quantile of the raw scale are refitted by least
/// squares. Falls back to the raw fit when the scale is zero.
pub fn reweight(d: &Dataset, raw: &TrimmedFit, h: usize) -> Result<TrimmedFit> {
    let beta = raw.beta.as_slice();
    let scale = raw_scale(d, beta, h);
    if scale <= 0.0 || !scale.is_finite() {
        return Ok(raw.clone());
    }
    let cutoff = Normal::standard().inverse_cdf(REWEIGHT_CUTOFF_QUANTILE);
    let kept: Vec<usize> = residuals_raw(d, beta)
        .iter()
        .enumerate()
        .filter(|(_, r)| (*r / scale).abs() <= cutoff)
        .map(|(i, _)| i)
        .collect();
    if kept.len() < d.p() {
        return Ok(raw.clone());
    }
    let sol = ls_fit(d, Rows::Subset(&kept))?;
    let mut diagnostics = raw.diagnostics.clone();
    diagnostics.ls_solves += 1;
    Ok(TrimmedFit {
        objective: sol.ss,
        beta: sol.beta,
        retained: kept,
        method: Method::Lts,
        diagnostics,
    })
}
