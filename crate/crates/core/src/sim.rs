//! Monte-Carlo comparison of estimators.
//!
//! Every replication draws from its own ChaCha stream (`seed`, stream =
//! replication index), so replication `r` produces the same data and the
//! same estimator seeds regardless of thread count or execution order.
//! Replications run on the current rayon pool; results are collected and
//! aggregated in replication order.
//!
//! Two sampling modes exist:
//!
//! * no `beta0`: the whole vector `z = (x', y)'` is drawn from `N(0, Sigma)`
//!   and errors are measured against the zero vector;
//! * fixed `beta0`: `x ~ N(0, Sigma)` over the predictors, `e ~ N(0, 1)` and
//!   `y = (1, x') beta0 + e`.
//!
//! `Sigma` has unit diagonal and a common off-diagonal `rho` (0 for the i.i.d.
//! design).

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{fit, EstimatorSettings};
use crate::model::{CoefficientVector, Dataset, Method};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Design {
    IidStandard,
    Equicorrelated { rho: f64 },
}

impl Design {
    fn rho(self) -> f64 {
        match self {
            Design::IidStandard => 0.0,
            Design::Equicorrelated { rho } => rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    /// Fraction of rows replaced, in `[0, 0.5)`.
    pub rate: f64,
    /// Replacement `(x', y)`, length `p`.
    pub point: Vec<f64>,
}

impl Contamination {
    pub fn none(p: usize) -> Self {
        Contamination {
            rate: 0.0,
            point: vec![0.0; p],
        }
    }

    /// `(c, ..., c, -c)` of length `p`.
    pub fn corner(rate: f64, p: usize, c: f64) -> Self {
        let mut point = vec![c; p];
        point[p - 1] = -c;
        Contamination { rate, point }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationScenario {
    pub n: usize,
    pub p: usize,
    pub design: Design,
    /// True coefficients; `None` draws `z` jointly and scores against zero.
    pub beta0: Option<CoefficientVector>,
    pub contamination: Contamination,
    pub replications: usize,
    pub seed: u64,
}

impl SimulationScenario {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::Config(format!("p must be at least 2, got {}", self.p)));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        let rate = self.contamination.rate;
        if !(0.0..0.5).contains(&rate) {
            return Err(Error::Config(format!(
                "contamination rate must lie in [0, 0.5), got {rate}"
            )));
        }
        if self.contamination.point.len() != self.p {
            return Err(Error::Config(format!(
                "replacement point has length {}, expected p = {}",
                self.contamination.point.len(),
                self.p
            )));
        }
        if self.contamination.point.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("replacement point must be finite".into()));
        }
        if let Some(b) = &self.beta0 {
            if b.len() != self.p {
                return Err(Error::Config(format!(
                    "beta0 has length {}, expected p = {}",
                    b.len(),
                    self.p
                )));
            }
        }
        self.sampler().map(|_| ())
    }

    /// Coefficients the estimates are scored against.
    pub fn reference(&self) -> Vec<f64> {
        self.beta0
            .as_ref()
            .map(|b| b.as_slice().to_vec())
            .unwrap_or_else(|| vec![0.0; self.p])
    }

    fn sampler(&self) -> Result<Sampler> {
        let dim = if self.beta0.is_some() { self.p - 1 } else { self.p };
        Sampler::new(dim, self.design.rho())
    }
}

/// Cholesky factor of the equicorrelation matrix.
struct Sampler {
    factor: DMatrix<f64>,
}

impl Sampler {
    fn new(dim: usize, rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::Config(format!("rho must be finite, got {rho}")));
        }
        let sigma = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { rho });
        let chol = sigma.cholesky().ok_or_else(|| {
            Error::Config(format!(
                "equicorrelation {rho} is not positive definite in dimension {dim}"
            ))
        })?;
        Ok(Sampler { factor: chol.l() })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let dim = self.factor.nrows();
        let u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..=i).map(|k| self.factor[(i, k)] * u[k]).sum();
        }
    }
}

/// Random stream for replication `rep`.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn sample_with<R: Rng + ?Sized>(s: &SimulationScenario, rng: &mut R) -> Result<Dataset> {
    let sampler = s.sampler()?;
    let q = s.p - 1;
    let mut x = Vec::with_capacity(s.n * q);
    let mut y = Vec::with_capacity(s.n);
    match &s.beta0 {
        None => {
            let mut z = vec![0.0; s.p];
            for _ in 0..s.n {
                sampler.draw(rng, &mut z);
                x.extend_from_slice(&z[..q]);
                y.push(z[q]);
            }
        }
        Some(beta) => {
            let beta = beta.as_slice();
            let mut row = vec![0.0; q];
            for _ in 0..s.n {
                sampler.draw(rng, &mut row);
                let e: f64 = rng.sample(StandardNormal);
                let fitted = row
                    .iter()
                    .zip(&beta[1..])
                    .fold(beta[0], |acc, (x, b)| acc + x * b);
                x.extend_from_slice(&row);
                y.push(fitted + e);
            }
        }
    }
    Dataset::from_flat(x, y, q)
}

/// Draws the clean sample of replication `rep`.
pub fn generate_sample(s: &SimulationScenario, rep: usize) -> Result<Dataset> {
    s.validate()?;
    sample_with(s, &mut replication_rng(s.seed, rep))
}

/// `ceil(n * rate)`, ignoring floating-point excess in the product.
pub fn contamination_count(n: usize, rate: f64) -> usize {
    let exact = n as f64 * rate;
    let m = (exact - 1e-9 * exact.max(1.0)).ceil();
    (m.max(0.0) as usize).min(n)
}

/// Replaces `ceil(n * rate)` uniformly chosen rows by `point`, split into
/// predictors (all but the last coordinate) and response.
pub fn contaminate<R: Rng + ?Sized>(
    d: &Dataset,
    rate: f64,
    point: &[f64],
    rng: &mut R,
) -> Result<Dataset> {
    Ok(contaminate_rows(d, rate, point, rng)?.0)
}

/// As [`contaminate`], also returning the replaced rows in ascending order.
pub fn contaminate_rows<R: Rng + ?Sized>(
    d: &Dataset,
    rate: f64,
    point: &[f64],
    rng: &mut R,
) -> Result<(Dataset, Vec<usize>)> {
    if rate.is_nan() || !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!(
            "contamination rate must lie in [0, 1), got {rate}"
        )));
    }
    if point.len() != d.p() {
        return Err(Error::DimensionMismatch {
            expected: d.p(),
            actual: point.len(),
        });
    }
    let m = contamination_count(d.n(), rate);
    if m == 0 {
        return Ok((d.clone(), Vec::new()));
    }
    let mut rows = sample(rng, d.n(), m).into_vec();
    rows.sort_unstable();
    let (x_point, y_point) = point.split_at(d.predictors());
    let mut x: Vec<f64> = Vec::with_capacity(d.n() * d.predictors());
    let mut y = d.responses().to_vec();
    for (i, (xi, _)) in d.rows().enumerate() {
        if rows.binary_search(&i).is_ok() {
            x.extend_from_slice(x_point);
            y[i] = y_point[0];
        } else {
            x.extend_from_slice(xi);
        }
    }
    Ok((Dataset::from_flat(x, y, d.predictors())?, rows))
}

/// Clean and contaminated data of one replication, plus the estimator seed.
pub struct Replication {
    pub clean: Dataset,
    pub data: Dataset,
    pub contaminated_rows: Vec<usize>,
    pub fit_seed: u64,
}

pub fn replicate(s: &SimulationScenario, rep: usize) -> Result<Replication> {
    let mut rng = replication_rng(s.seed, rep);
    let clean = sample_with(s, &mut rng)?;
    let (data, contaminated_rows) =
        contaminate_rows(&clean, s.contamination.rate, &s.contamination.point, &mut rng)?;
    let fit_seed = rng.next_u64();
    Ok(Replication {
        clean,
        data,
        contaminated_rows,
        fit_seed,
    })
}

/// How relative efficiency is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyMode {
    /// `SVAR(LS) / SVAR(method)`.
    Variance,
    /// `EMSE(LS) / EMSE(method)`.
    MeanSquaredError,
}

/// One method's estimate in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub method: Method,
    pub estimate: Option<Vec<f64>>,
    /// `||estimate - reference||^2`.
    pub squared_deviation: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: Method,
    pub emse: f64,
    /// Not available with fewer than two successful replications.
    pub svar: Option<f64>,
    pub total_time_seconds: f64,
    /// Not available when LS was not run or the ratio is undefined.
    pub re: Option<f64>,
    pub replications: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub mode: EfficiencyMode,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, method: Method) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Deterministic columns only; wall-clock totals go to
    /// [`MetricsTable::timing_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,EMSE,SVAR,RE,failures\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.method,
                r.emse,
                fmt_opt(r.svar),
                fmt_opt(r.re),
                r.failures
            );
        }
        out
    }

    pub fn timing_csv(&self) -> String {
        let mut out = String::from("method,TT\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{}", r.method, r.total_time_seconds);
        }
        out
    }

    /// Aligned text with columns method, EMSE, SVAR, TT, RE.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<8}{:>12}{:>12}{:>12}{:>10}\n",
            "method", "EMSE", "SVAR", "TT", "RE"
        );
        for r in &self.rows {
            let svar = r.svar.map_or("NA".to_string(), |v| format!("{v:.4}"));
            let re = r.re.map_or("NA".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                out,
                "{:<8}{:>12.4}{:>12}{:>12.4}{:>10}",
                r.method.as_str(),
                r.emse,
                svar,
                r.total_time_seconds,
                re
            );
        }
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub table: MetricsTable,
    pub records: Vec<ReplicationRecord>,
}

impl StudyResult {
    /// Long-format `rep,method,squared_deviation` rows for box plots.
    pub fn squared_deviation_csv(&self) -> String {
        let mut out = String::from("rep,method,squared_deviation\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{}",
                r.rep,
                r.method,
                fmt_opt(r.squared_deviation)
            );
        }
        out
    }

    pub fn estimates(&self, method: Method) -> Vec<&[f64]> {
        self.records
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.estimate.as_deref())
            .collect()
    }
}

/// Mean of equal-length vectors, centred on the first so that identical
/// inputs give back exactly that input.
pub fn mean_vector(estimates: &[&[f64]]) -> Option<Vec<f64>> {
    let first = *estimates.first()?;
    let k = estimates.len() as f64;
    Some(
        (0..first.len())
            .map(|j| {
                let offset: f64 = estimates.iter().map(|t| t[j] - first[j]).sum();
                first[j] + offset / k
            })
            .collect(),
    )
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// `sum ||t_i - reference||^2 / R`.
pub fn emse(estimates: &[&[f64]], reference: &[f64]) -> f64 {
    if estimates.is_empty() {
        return f64::NAN;
    }
    estimates
        .iter()
        .map(|t| squared_distance(t, reference))
        .sum::<f64>()
        / estimates.len() as f64
}

/// `sum ||t_i - mean||^2 / (R - 1)`; `None` for fewer than two estimates.
pub fn svar(estimates: &[&[f64]]) -> Option<f64> {
    if estimates.len() < 2 {
        return None;
    }
    let mean = mean_vector(estimates)?;
    Some(
        estimates
            .iter()
            .map(|t| squared_distance(t, &mean))
            .sum::<f64>()
            / (estimates.len() - 1) as f64,
    )
}

/// `baseline / value` with `0 / 0 = 1`; `None` when undefined.
fn efficiency_ratio(baseline: Option<f64>, value: Option<f64>) -> Option<f64> {
    let (b, v) = (baseline?, value?);
    if b == 0.0 && v == 0.0 {
        return Some(1.0);
    }
    let re = b / v;
    re.is_finite().then_some(re)
}

fn aggregate(
    methods: &[Method],
    records: &[ReplicationRecord],
    reference: Option<&[f64]>,
    mode: EfficiencyMode,
    total: usize,
) -> Result<MetricsTable> {
    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let mine: Vec<&ReplicationRecord> = records.iter().filter(|r| r.method == method).collect();
        let failures = mine.iter().filter(|r| r.estimate.is_none()).count();
        if failures * 100 > total {
            return Err(Error::TooManyFailures {
                method: method.to_string(),
                failed: failures,
                total,
            });
        }
        let estimates: Vec<&[f64]> = mine.iter().filter_map(|r| r.estimate.as_deref()).collect();
        let centre = match reference {
            Some(r) => r.to_vec(),
            None => mean_vector(&estimates).unwrap_or_default(),
        };
        rows.push(MetricsRow {
            method,
            emse: emse(&estimates, &centre),
            svar: svar(&estimates),
            total_time_seconds: mine.iter().map(|r| r.seconds).sum(),
            re: None,
            replications: estimates.len(),
            failures,
        });
    }
    if let Some(ls) = rows.iter().find(|r| r.method == Method::Ls).cloned() {
        for row in &mut rows {
            row.re = match mode {
                EfficiencyMode::Variance => efficiency_ratio(ls.svar, row.svar),
                EfficiencyMode::MeanSquaredError => efficiency_ratio(Some(ls.emse), Some(row.emse)),
            };
        }
    }
    Ok(MetricsTable { mode, rows })
}

fn timed_fit(
    d: &Dataset,
    method: Method,
    settings: &EstimatorSettings,
    seed: u64,
    rep: usize,
    reference: Option<&[f64]>,
) -> ReplicationRecord {
    let start = Instant::now();
    let result = fit(d, method, settings, seed);
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(f) => {
            let estimate = f.beta.into_vec();
            ReplicationRecord {
                rep,
                method,
                squared_deviation: reference.map(|r| squared_distance(&estimate, r)),
                estimate: Some(estimate),
                seconds,
                error: None,
            }
        }
        Err(e) => ReplicationRecord {
            rep,
            method,
            estimate: None,
            squared_deviation: None,
            seconds,
            error: Some(e.to_string()),
        },
    }
}

/// Derives the seed handed to `method` from the replication's estimator seed.
fn method_seed(fit_seed: u64, method: Method) -> u64 {
    match method {
        Method::Ls => fit_seed,
        Method::Lst => fit_seed,
        Method::Lts => fit_seed.rotate_left(32) ^ 0x9e37_79b9_7f4a_7c15,
    }
}

/// Runs every replication of `s` for each method and aggregates the errors.
///
/// Errors are measured against `beta0` (zero when absent). Relative
/// efficiency uses the variance ratio without `beta0` and the EMSE ratio
/// with it. A method failing on more than 1% of replications aborts the
/// study.
pub fn run_study(
    s: &SimulationScenario,
    methods: &[Method],
    settings: &EstimatorSettings,
) -> Result<StudyResult> {
    s.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    let reference = s.reference();
    let per_rep: Vec<Vec<ReplicationRecord>> = (0..s.replications)
        .into_par_iter()
        .map(|rep| {
            let r = replicate(s, rep)?;
            Ok(methods
                .iter()
                .map(|&m| {
                    timed_fit(&r.data, m, settings, method_seed(r.fit_seed, m), rep, Some(&reference))
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let records: Vec<ReplicationRecord> = per_rep.into_iter().flatten().collect();
    let mode = if s.beta0.is_some() {
        EfficiencyMode::MeanSquaredError
    } else {
        EfficiencyMode::Variance
    };
    let table = aggregate(methods, &records, Some(&reference), mode, s.replications)?;
    Ok(StudyResult { table, records })
}

/// Refits the same dataset `reps` times with different seeds.
///
/// Errors are measured against the mean estimate of each method, so the
/// EMSE column is the spread caused by the estimator's own randomness; RE is
/// the EMSE ratio against LS with `0 / 0 = 1`.
pub fn stability_study(
    d: &Dataset,
    methods: &[Method],
    settings: &EstimatorSettings,
    reps: usize,
    seed: u64,
) -> Result<StudyResult> {
    if reps == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    let per_rep: Vec<Vec<ReplicationRecord>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let fit_seed = replication_rng(seed, rep).next_u64();
            methods
                .iter()
                .map(|&m| timed_fit(d, m, settings, method_seed(fit_seed, m), rep, None))
                .collect()
        })
        .collect();
    let mut records: Vec<ReplicationRecord> = per_rep.into_iter().flatten().collect();
    let table = aggregate(methods, &records, None, EfficiencyMode::MeanSquaredError, reps)?;
    for &m in methods {
        let estimates: Vec<Vec<f64>> = records
            .iter()
            .filter(|r| r.method == m)
            .filter_map(|r| r.estimate.clone())
            .collect();
        let refs: Vec<&[f64]> = estimates.iter().map(Vec::as_slice).collect();
        if let Some(mean) = mean_vector(&refs) {
            for r in records.iter_mut().filter(|r| r.method == m) {
                r.squared_deviation = r.estimate.as_deref().map(|t| squared_distance(t, &mean));
            }
        }
    }
    Ok(StudyResult { table, records })
}

/// A small bivariate sample with a few rows moved to an adversarial point.
#[derive(Debug, Clone)]
pub struct IllustrationSample {
    pub clean: Dataset,
    pub contaminated: Dataset,
    pub replaced: Vec<usize>,
}

/// `n` bivariate normal points with correlation `rho`, then `outliers` of
/// them replaced by `point = (x, y)`.
pub fn illustration_sample(
    n: usize,
    rho: f64,
    outliers: usize,
    point: [f64; 2],
    seed: u64,
) -> Result<IllustrationSample> {
    if outliers > n {
        return Err(Error::Config("more outliers than points".into()));
    }
    let scenario = SimulationScenario {
        n,
        p: 2,
        design: Design::Equicorrelated { rho },
        beta0: None,
        contamination: Contamination::none(2),
        replications: 1,
        seed,
    };
    let mut rng = replication_rng(seed, 0);
    let clean = sample_with(&scenario, &mut rng)?;
    let mut replaced = sample(&mut rng, n, outliers).into_vec();
    replaced.sort_unstable();
    let mut x: Vec<f64> = clean.rows().map(|(x, _)| x[0]).collect();
    let mut y = clean.responses().to_vec();
    for &i in &replaced {
        x[i] = point[0];
        y[i] = point[1];
    }
    let contaminated = Dataset::from_flat(x, y, 1)?;
    Ok(IllustrationSample {
        clean,
        contaminated,
        replaced,
    })
}
