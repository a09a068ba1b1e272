//! Least squares of depth-trimmed residuals.
//!
//! For a coefficient vector `beta` the residuals are scored by their
//! outlyingness `|r_i - Med(r)| / MAD(r)`; observations scoring above `alpha`
//! are trimmed and the objective is the sum of squared residuals over the
//! rest. The estimator is searched for with a finite candidate scheme:
//!
//! 1. Sample two rows that differ in some predictor `k` and build the two
//!    coefficient vectors that give both rows equal residuals, with intercept
//!    0 and 1 and every other slope 0. Perturb each coordinate of both by
//!    `+delta` and `-delta`, for `2 + 4p` candidates in all.
//! 2. For every candidate, compute the retained set. If the outlyingness
//!    values inside it are not strictly ordered the candidate is skipped;
//!    otherwise least squares is refitted on the retained rows. Retained
//!    sets that do not determine the coefficients are skipped too.
//! 3. Repeat with fresh pairs `restarts` times and keep the refit with the
//!    smallest sum of squares. A pair whose candidates are all skipped does
//!    not count as a restart; another pair is drawn in its place.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{residuals_raw, CoefficientVector, Dataset, FitDiagnostics, Method, TrimmedFit};
use crate::ols::{ls_fit, LsSolution, Rows};
use crate::robust_stats::location_scale;

/// Two outlyingness values closer than this, relative to the magnitude of
/// the terms that produced the residuals, count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Sums of squares below this fraction of `sum(y^2)` are exact fits and
/// compare equal, so the earliest candidate keeps the win.
pub const EXACT_FIT_RTOL: f64 = 1e-20;

/// Pair draws allowed per restart while every candidate of a draw is
/// skipped.
const MAX_DRAWS_PER_RESTART: usize = 100;

/// Iteration cap for [`LstConfig::refine`].
const MAX_REFINE_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LstConfig {
    /// Outlyingness threshold, at least 1.
    pub alpha: f64,
    /// Perturbation applied to each coordinate of the base candidates.
    pub delta: f64,
    /// Number of independent candidate sets.
    pub restarts: usize,
    pub seed: u64,
    /// Re-trim and refit each candidate until its retained set stops
    /// changing. Off by default.
    pub refine: bool,
}

impl Default for LstConfig {
    fn default() -> Self {
        LstConfig {
            alpha: 2.5,
            delta: 0.5,
            restarts: 1,
            seed: 0,
            refine: false,
        }
    }
}

impl LstConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.alpha.is_nan() || self.alpha < 1.0 {
            return Err(Error::Config(format!(
                "alpha must be >= 1, got {}",
                self.alpha
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        let pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
        if self.restarts == 0 || self.restarts > pairs.max(1) {
            return Err(Error::Config(format!(
                "restarts must lie in 1..={pairs}, got {}",
                self.restarts
            )));
        }
        Ok(())
    }
}

/// The `2 + 4p` candidates built from one sampled pair of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Zero-based rows `(i, j)` whose residuals the base candidates equalize.
    pub pair: (usize, usize),
    /// Zero-based predictor index in which the two rows differ.
    pub component: usize,
    /// `(y_i - y_j) / (x_ik - x_jk)`.
    pub slope: f64,
    /// Base candidates first (intercept 0, then 1), followed by the `+delta`
    /// and `-delta` perturbations of every coordinate of the first base, then
    /// of the second.
    pub betas: Vec<CoefficientVector>,
}

/// Retained rows for one coefficient vector, plus whether the outlyingness
/// values inside the retained set contain a tie.
#[derive(Debug, Clone)]
struct Trimming {
    retained: Vec<usize>,
    tied: bool,
}

fn magnitude(d: &Dataset, i: usize, beta: &[f64]) -> f64 {
    d.x(i)
        .iter()
        .zip(&beta[1..])
        .fold(d.y(i).abs() + beta[0].abs(), |acc, (x, b)| acc + (x * b).abs())
}

fn trim(d: &Dataset, beta: &[f64], alpha: f64, detect_ties: bool) -> Result<Trimming> {
    let r = residuals_raw(d, beta);
    let ls = location_scale(&r)?;
    if ls.mad <= 0.0 {
        return Err(Error::DegenerateScale {
            beta: beta.to_vec(),
        });
    }
    let retained: Vec<usize> = (0..r.len())
        .filter(|&i| (r[i] - ls.median).abs() / ls.mad <= alpha)
        .collect();
    let tied = detect_ties && has_tie(d, beta, &r, ls.median, &retained);
    Ok(Trimming { retained, tied })
}

/// Whether two retained rows share an outlyingness value.
///
/// With an even number of rows the two central residuals sit at the same
/// distance from their average by construction; that pair is not counted
/// unless the residuals themselves coincide.
fn has_tie(d: &Dataset, beta: &[f64], r: &[f64], median: f64, retained: &[usize]) -> bool {
    let n = r.len();
    let tol = |a: usize, b: usize| {
        TIE_RTOL * magnitude(d, a, beta).max(magnitude(d, b, beta)).max(median.abs())
    };

    let central = if n % 2 == 0 {
        let mut order: Vec<usize> = (0..n).collect();
        let (_, hi, _) = order.select_nth_unstable_by(n / 2, |&a, &b| r[a].total_cmp(&r[b]));
        let hi = *hi;
        let lo = order[..n / 2]
            .iter()
            .copied()
            .max_by(|&a, &b| r[a].total_cmp(&r[b]))
            .expect("n >= 2");
        ((r[hi] - r[lo]).abs() > tol(lo, hi)).then_some((lo.min(hi), lo.max(hi)))
    } else {
        None
    };

    let mut by_deviation: Vec<(f64, usize)> = retained
        .iter()
        .map(|&i| ((r[i] - median).abs(), i))
        .collect();
    by_deviation.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    by_deviation.windows(2).any(|w| {
        let (da, a) = w[0];
        let (db, b) = w[1];
        if central == Some((a.min(b), a.max(b))) {
            return false;
        }
        db - da <= tol(a, b)
    })
}

/// Rows whose residual outlyingness under `beta` is at most `alpha`,
/// ascending.
pub fn index_set(d: &Dataset, beta: &CoefficientVector, alpha: f64) -> Result<Vec<usize>> {
    check_beta(d, beta)?;
    check_alpha(alpha)?;
    Ok(trim(d, beta.as_slice(), alpha, false)?.retained)
}

/// Sum of squared residuals over [`index_set`].
pub fn objective_q(d: &Dataset, beta: &CoefficientVector, alpha: f64) -> Result<f64> {
    let retained = index_set(d, beta, alpha)?;
    Ok(crate::model::subset_sum_of_squares(
        d,
        beta.as_slice(),
        &retained,
    ))
}

fn check_beta(d: &Dataset, beta: &CoefficientVector) -> Result<()> {
    if beta.len() != d.p() {
        return Err(Error::DimensionMismatch {
            expected: d.p(),
            actual: beta.len(),
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::Config(format!("alpha must be >= 1, got {alpha}")));
    }
    Ok(())
}

fn first_difference(a: &[f64], b: &[f64]) -> Option<usize> {
    a.iter().zip(b).position(|(u, v)| u != v)
}

/// Samples row pairs uniformly without replacement until one differs in a
/// predictor, then builds the candidate set from it.
pub fn candidate_betas<R: Rng + ?Sized>(
    d: &Dataset,
    rng: &mut R,
    delta: f64,
) -> Result<CandidateSet> {
    let n = d.n();
    if n < 2 {
        return Err(Error::InvalidInput(
            "at least two observations are required".into(),
        ));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    if (1..n).all(|i| d.x(i) == d.x(0)) {
        return Err(Error::UnsampleableDesign);
    }

    let total = n * (n - 1) / 2;
    let mut tried = HashSet::new();
    let (i, j, k) = loop {
        if tried.len() == total {
            return Err(Error::UnsampleableDesign);
        }
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (i, j) = (a.min(b), a.max(b));
        if !tried.insert((i, j)) {
            continue;
        }
        if let Some(k) = first_difference(d.x(i), d.x(j)) {
            break (i, j, k);
        }
    };

    let slope = (d.y(i) - d.y(j)) / (d.x(i)[k] - d.x(j)[k]);
    if !slope.is_finite() {
        return Err(Error::DegenerateDesign(format!(
            "pair ({i}, {j}) gives a non-finite slope"
        )));
    }
    let p = d.p();
    let mut base0 = vec![0.0; p];
    base0[k + 1] = slope;
    let mut base1 = base0.clone();
    base1[0] = 1.0;

    let mut betas = Vec::with_capacity(2 + 4 * p);
    betas.push(CoefficientVector::from_vec_unchecked(base0.clone()));
    betas.push(CoefficientVector::from_vec_unchecked(base1.clone()));
    for base in [&base0, &base1] {
        for l in 0..p {
            for step in [delta, -delta] {
                let mut b = base.clone();
                b[l] += step;
                betas.push(CoefficientVector::from_vec_unchecked(b));
            }
        }
    }
    Ok(CandidateSet {
        pair: (i, j),
        component: k,
        slope,
        betas,
    })
}

struct Refit {
    solution: LsSolution,
    retained: Vec<usize>,
}

/// Least squares on the retained rows, `None` when they do not determine
/// the coefficients.
fn refit(d: &Dataset, retained: Vec<usize>, cfg: &LstConfig, solves: &mut usize) -> Result<Option<Refit>> {
    let mut solution = ls_fit(d, Rows::Subset(&retained))?;
    *solves += 1;
    if solution.rank_deficient {
        return Ok(None);
    }
    let mut retained = retained;
    if cfg.refine {
        for _ in 0..MAX_REFINE_ITERATIONS {
            let next = match trim(d, solution.beta.as_slice(), cfg.alpha, false) {
                Ok(t) => t.retained,
                Err(Error::DegenerateScale { .. }) => break,
                Err(e) => return Err(e),
            };
            if next == retained {
                break;
            }
            let next_solution = ls_fit(d, Rows::Subset(&next))?;
            *solves += 1;
            if next_solution.rank_deficient {
                break;
            }
            solution = next_solution;
            retained = next;
        }
    }
    Ok(Some(Refit { solution, retained }))
}

/// Fits the depth-trimmed least-squares estimator.
///
/// Deterministic for a given dataset and configuration. Fails with
/// [`Error::AllCandidatesDegenerate`] if every candidate of every draw was
/// skipped.
pub fn lst_fit(d: &Dataset, cfg: &LstConfig) -> Result<TrimmedFit> {
    if d.n() <= 2 {
        return Err(Error::InvalidInput(format!(
            "LST needs more than two observations, got {}",
            d.n()
        )));
    }
    cfg.validate(d.n())?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut diagnostics = FitDiagnostics::default();
    let mut best: Option<Refit> = None;
    let exact_fit = EXACT_FIT_RTOL * d.responses().iter().map(|y| y * y).sum::<f64>();

    let (mut done, mut draws) = (0, 0);
    while done < cfg.restarts && draws < MAX_DRAWS_PER_RESTART * cfg.restarts {
        draws += 1;
        let skipped_before = diagnostics.skipped;
        let candidates = candidate_betas(d, &mut rng, cfg.delta)?;
        for beta in &candidates.betas {
            diagnostics.evaluated += 1;
            let trimming = match trim(d, beta.as_slice(), cfg.alpha, true) {
                Ok(t) => t,
                Err(Error::DegenerateScale { .. }) => {
                    diagnostics.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if trimming.tied {
                diagnostics.skipped += 1;
                continue;
            }
            let Some(fit) = refit(d, trimming.retained, cfg, &mut diagnostics.ls_solves)? else {
                diagnostics.skipped += 1;
                continue;
            };
            if best
                .as_ref()
                .is_none_or(|b| b.solution.ss > exact_fit && fit.solution.ss < b.solution.ss)
            {
                best = Some(fit);
            }
        }
        let all_skipped = diagnostics.skipped - skipped_before == candidates.betas.len();
        if !all_skipped {
            done += 1;
        }
    }

    let best = best.ok_or(Error::AllCandidatesDegenerate {
        candidates: diagnostics.evaluated,
    })?;
    Ok(TrimmedFit {
        objective: best.solution.ss,
        beta: best.solution.beta,
        retained: best.retained,
        method: Method::Lst,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::residuals;

    fn beta(v: &[f64]) -> CoefficientVector {
        CoefficientVector::new(v.to_vec()).unwrap()
    }

    /// Rows with `y = r_i` and `x = 0`, so that `beta = 0` has residuals `r`.
    fn with_residuals(r: &[f64]) -> Dataset {
        Dataset::from_rows(r.iter().map(|&y| (vec![0.0], y))).unwrap()
    }

    #[test]
    fn index_set_examples() {
        let d = with_residuals(&[1.0, 2.0, 3.0, 4.0, 100.0]);
        let zero = CoefficientVector::zeros(2);
        // outlyingness (2, 1, 0, 1, 97)
        assert_eq!(index_set(&d, &zero, 2.0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(index_set(&d, &zero, 1.5).unwrap(), vec![1, 2, 3]);
        assert_eq!(index_set(&d, &zero, f64::INFINITY).unwrap(), vec![0, 1, 2, 3, 4]);

        let flat = with_residuals(&[0.0; 6]);
        assert_eq!(index_set(&flat, &zero, 1.0).unwrap(), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn objective_examples() {
        let d = with_residuals(&[1.0, 2.0, 3.0, 4.0, 100.0]);
        let zero = CoefficientVector::zeros(2);
        assert_eq!(objective_q(&d, &zero, 2.0).unwrap(), 30.0);
        assert_eq!(objective_q(&d, &zero, 1.5).unwrap(), 29.0);
        let full = residuals(&d, &zero).unwrap().sum_of_squares();
        assert_eq!(objective_q(&d, &zero, f64::INFINITY).unwrap(), full);

        let line = Dataset::from_rows((0..6).map(|i| (vec![i as f64], 1.0 + 2.0 * i as f64))).unwrap();
        assert_eq!(objective_q(&line, &beta(&[1.0, 2.0]), 2.5).unwrap(), 0.0);
    }

    #[test]
    fn alpha_below_one_is_rejected() {
        let d = with_residuals(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            index_set(&d, &CoefficientVector::zeros(2), 0.5),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn candidates_from_two_rows() {
        let d = Dataset::from_rows([(vec![1.0], 2.0), (vec![3.0], 6.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = candidate_betas(&d, &mut rng, 0.5).unwrap();
        assert_eq!(c.betas.len(), 10);
        assert_eq!(c.slope, 2.0);
        assert_eq!(c.betas[0].as_slice(), &[0.0, 2.0]);
        assert_eq!(c.betas[1].as_slice(), &[1.0, 2.0]);
        assert_eq!(c.betas[2].as_slice(), &[0.5, 2.0]);
        assert_eq!(c.betas[3].as_slice(), &[-0.5, 2.0]);
        assert_eq!(c.betas[4].as_slice(), &[0.0, 2.5]);
        assert_eq!(c.betas[9].as_slice(), &[1.0, 1.5]);
    }

    #[test]
    fn candidates_equalize_the_pair() {
        let d = Dataset::from_rows((0..9).map(|i| {
            let t = i as f64;
            (vec![t.sin(), t * 0.5, (t * 0.3).cos()], t * t - 3.0)
        }))
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = candidate_betas(&d, &mut rng, 1.0).unwrap();
        assert_eq!(c.betas.len(), 2 + 4 * 4);
        let (i, j) = c.pair;
        for b in &c.betas[..2] {
            let r = residuals(&d, b).unwrap();
            let r = r.as_slice();
            assert!((r[i] - r[j]).abs() <= 1e-10);
        }
    }

    #[test]
    fn identical_predictors_cannot_be_sampled() {
        let d = Dataset::from_rows((0..5).map(|i| (vec![1.0, 2.0], i as f64))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            candidate_betas(&d, &mut rng, 0.5),
            Err(Error::UnsampleableDesign)
        ));
    }

    #[test]
    fn ties_are_found_but_central_pair_is_exempt() {
        let zero = [0.0, 0.0];
        // even n, distinct residuals: only the central pair is tied
        let d = with_residuals(&[-3.0, -1.0, 0.5, 2.5, 4.5, 7.5]);
        let t = trim(&d, &zero, 10.0, true).unwrap();
        assert!(!t.tied);
        // a genuine tie between two rows on opposite sides
        let d = with_residuals(&[-3.0, -1.0, 0.5, 2.5, 4.0, 8.0, 9.5]);
        // median 2.5, deviations 5.5 and 5.5 for -3 and 8
        let t = trim(&d, &zero, 10.0, true).unwrap();
        assert!(t.tied);
        // the same tie is harmless once trimmed
        let t = trim(&d, &zero, 1.5, true).unwrap();
        assert!(!t.retained.contains(&0));
        assert!(!t.tied);
        // identical central residuals are a real tie
        let d = with_residuals(&[-3.0, 1.0, 1.0, 7.5]);
        assert!(trim(&d, &zero, 10.0, true).unwrap().tied);
    }

    #[test]
    fn repeated_outliers_are_not_retained_together() {
        let mut rows: Vec<(Vec<f64>, f64)> = (0..9)
            .map(|i| {
                let t = (1.7 * i as f64).sin() * 2.0;
                (vec![t], 0.5 + t + 0.2 * (4.3 * i as f64).cos())
            })
            .collect();
        rows[2] = (vec![4.0], -4.0);
        rows[6] = (vec![4.0], -4.0);
        let d = Dataset::from_rows(rows).unwrap();
        for seed in 0..20 {
            let f = lst_fit(&d, &LstConfig { seed, ..LstConfig::default() }).unwrap();
            assert!(!(f.retained.contains(&2) && f.retained.contains(&6)), "seed {seed}");
            assert!(f.beta[1] > 0.0, "seed {seed}");
        }
    }

    #[test]
    fn winner_determines_its_coefficients() {
        for seed in 0..40 {
            let d = Dataset::from_rows((0..6).map(|i| {
                let t = i as f64 + seed as f64;
                (vec![(1.3 * t).sin(), (0.7 * t).cos(), (2.9 * t).sin()], (5.1 * t).cos() * 4.0)
            }))
            .unwrap();
            let cfg = LstConfig { seed, restarts: 3, alpha: 1.0, ..LstConfig::default() };
            if let Ok(f) = lst_fit(&d, &cfg) {
                let sol = ls_fit(&d, Rows::Subset(&f.retained)).unwrap();
                assert!(!sol.rank_deficient, "seed {seed}");
                assert!(f.retained.len() >= d.p());
            }
        }
    }

    #[test]
    fn noiseless_line_is_recovered() {
        let d = Dataset::from_rows((0..12).map(|i| {
            let t = (i as f64 * 1.7).sin() * 3.0 + i as f64 * 0.1;
            (vec![t], 1.5 - 0.75 * t)
        }))
        .unwrap();
        let fit = lst_fit(&d, &LstConfig::default()).unwrap();
        assert!(fit.objective < 1e-20);
        assert!((fit.beta[0] - 1.5).abs() < 1e-9);
        assert!((fit.beta[1] + 0.75).abs() < 1e-9);
    }

    #[test]
    fn too_few_rows_and_bad_config() {
        let d = Dataset::from_rows([(vec![1.0], 2.0), (vec![3.0], 6.0)]).unwrap();
        assert!(lst_fit(&d, &LstConfig::default()).is_err());
        let d = with_residuals(&[1.0, 2.0, 3.0, 4.0]);
        let cfg = LstConfig {
            restarts: 7,
            ..LstConfig::default()
        };
        assert!(matches!(lst_fit(&d, &cfg), Err(Error::Config(_))));
        let cfg = LstConfig {
            alpha: 0.9,
            ..LstConfig::default()
        };
        assert!(matches!(lst_fit(&d, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn refine_reaches_a_fixed_point() {
        let d = Dataset::from_rows((0..25).map(|i| {
            let t = (i as f64 * 2.3).cos() * 4.0;
            let noise = ((i * 7919) % 13) as f64 / 13.0 - 0.5;
            let y = if i % 9 == 0 { 30.0 } else { 2.0 + t + noise };
            (vec![t], y)
        }))
        .unwrap();
        let cfg = LstConfig {
            refine: true,
            ..LstConfig::default()
        };
        let fit = lst_fit(&d, &cfg).unwrap();
        let again = index_set(&d, &fit.beta, cfg.alpha).unwrap();
        assert_eq!(again, fit.retained);
    }
}
