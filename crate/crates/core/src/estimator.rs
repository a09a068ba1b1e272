//! Uniform entry point over the three estimators.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lst::{lst_fit, LstConfig};
use crate::lts::{default_coverage, lts_fit, reweight, LtsConfig};
use crate::model::{Dataset, FitDiagnostics, Method, TrimmedFit};
use crate::ols::{ls_fit, Rows};

/// LTS settings that do not depend on the data size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LtsSettings {
    /// Coverage; `None` means `floor((n + p + 1) / 2)`.
    pub h: Option<usize>,
    pub starts: usize,
    pub csteps: usize,
    /// Follow the raw fit with one reweighted least-squares step.
    pub reweight: bool,
}

impl Default for LtsSettings {
    fn default() -> Self {
        LtsSettings {
            h: None,
            starts: 500,
            csteps: 10,
            reweight: false,
        }
    }
}

impl LtsSettings {
    pub fn resolve(&self, n: usize, p: usize, seed: u64) -> LtsConfig {
        LtsConfig {
            h: self.h.unwrap_or_else(|| default_coverage(n, p)),
            starts: self.starts,
            csteps: self.csteps,
            seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorSettings {
    pub lst: LstConfig,
    pub lts: LtsSettings,
}

/// Fits `method` on `d`. `seed` replaces the configured seed of the
/// randomized estimators and is ignored by LS.
pub fn fit(d: &Dataset, method: Method, settings: &EstimatorSettings, seed: u64) -> Result<TrimmedFit> {
    match method {
        Method::Ls => {
            let sol = ls_fit(d, Rows::All)?;
            Ok(TrimmedFit {
                beta: sol.beta,
                retained: (0..d.n()).collect(),
                objective: sol.ss,
                method: Method::Ls,
                diagnostics: FitDiagnostics {
                    evaluated: 1,
                    skipped: 0,
                    ls_solves: 1,
                },
            })
        }
        Method::Lst => lst_fit(
            d,
            &LstConfig {
                seed,
                ..settings.lst.clone()
            },
        ),
        Method::Lts => {
            let cfg = settings.lts.resolve(d.n(), d.p(), seed);
            let raw = lts_fit(d, &cfg)?;
            if settings.lts.reweight {
                reweight(d, &raw, cfg.h)
            } else {
                Ok(raw)
            }
        }
    }
}
