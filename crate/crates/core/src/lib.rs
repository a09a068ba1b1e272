//! Robust linear regression by least squares of depth-trimmed residuals
//! (LST), with ordinary least squares and least trimmed squares as
//! comparators and a Monte-Carlo harness for efficiency and robustness
//! studies.
//!
//! ```
//! use lstreg::{lst_fit, Dataset, LstConfig};
//!
//! let data = Dataset::from_rows((0..20).map(|i| {
//!     let x = (1.3 * i as f64).sin() * 3.0 + 0.2 * i as f64;
//!     let y = if i % 7 == 3 { 25.0 } else { 1.0 + 2.0 * x };
//!     (vec![x], y)
//! }))?;
//! let fit = lst_fit(&data, &LstConfig::default())?;
//! assert!((fit.beta[1] - 2.0).abs() < 1e-9);
//! # Ok::<(), lstreg::Error>(())
//! ```
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod ingest;
pub mod lst;
pub mod lts;
pub mod model;
pub mod ols;
pub mod robust_stats;
pub mod sim;

pub use error::{Error, Result};
pub use estimator::{fit, EstimatorSettings, LtsSettings};
pub use lst::{candidate_betas, index_set, lst_fit, objective_q, CandidateSet, LstConfig};
pub use lts::{lts_fit, lts_objective, LtsConfig};
pub use model::{residuals, CoefficientVector, Dataset, Method, ResidualVector, TrimmedFit};
pub use ols::{ls_fit, LsSolution, Rows};
pub use robust_stats::{mad, median, outlyingness, OutlyingnessVector};
pub use sim::{run_study, Contamination, Design, MetricsRow, MetricsTable, SimulationScenario};
