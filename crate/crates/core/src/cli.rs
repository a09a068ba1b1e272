//! Command-line front end: `fit`, `sim` and `boxplot-data`.
//!
//! Aligned text goes to standard output; CSV and JSON artifacts go to
//! `--out-dir`. Exit codes: 0 success, 1 user error, 2 numerical or
//! internal error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{fit, EstimatorSettings, LtsSettings};
use crate::ingest::{load_csv, parse_column_list, ColumnRef, ColumnSpec, Delimiter};
use crate::lst::LstConfig;
use crate::model::{residuals, Method, TrimmedFit};
use crate::sim::{
    run_study, stability_study, Contamination, Design, MetricsTable, SimulationScenario,
    StudyResult,
};
use crate::CoefficientVector;

#[derive(Debug, Parser)]
#[command(name = "lst", version, about = "Depth-trimmed least squares regression with LS and LTS comparators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a delimited data file with each selected method.
    Fit(FitArgs),
    /// Run a Monte-Carlo study described by a scenario file.
    Sim(SimArgs),
    /// Write per-replication squared deviations for box plots.
    BoxplotData(SimArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct EstimatorArgs {
    /// Comma-separated methods among lts, lst, ls.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// LST outlyingness threshold (>= 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// LST candidate perturbation.
    #[arg(long)]
    pub delta: Option<f64>,
    /// LST candidate-set restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Iterate each LST refit until its retained set is stable.
    #[arg(long)]
    pub refine: bool,
    /// LTS coverage.
    #[arg(long)]
    pub h: Option<usize>,
    /// LTS random starts.
    #[arg(long)]
    pub starts: Option<usize>,
    /// LTS concentration steps per start.
    #[arg(long)]
    pub csteps: Option<usize>,
    /// Follow the raw LTS fit with a reweighted least-squares step.
    #[arg(long)]
    pub lts_reweight: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replications (sim) or repeated fits (fit).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl EstimatorArgs {
    fn apply(&self, settings: &mut EstimatorSettings) {
        let lst = &mut settings.lst;
        if let Some(a) = self.alpha {
            lst.alpha = a;
        }
        if let Some(d) = self.delta {
            lst.delta = d;
        }
        if let Some(r) = self.restarts {
            lst.restarts = r;
        }
        lst.refine |= self.refine;
        let lts = &mut settings.lts;
        if self.h.is_some() {
            lts.h = self.h;
        }
        if let Some(s) = self.starts {
            lts.starts = s;
        }
        if let Some(c) = self.csteps {
            lts.csteps = c;
        }
        lts.reweight |= self.lts_reweight;
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Delimited data file.
    pub data: PathBuf,
    /// Response column: 1-based position or header name.
    #[arg(long, default_value = "1")]
    pub response: String,
    /// Predictor columns, e.g. `2-8` or `cars,temp`.
    #[arg(long)]
    pub predictors: String,
    /// The first line holds column names.
    #[arg(long)]
    pub header: bool,
    /// comma, tab or whitespace; detected when omitted.
    #[arg(long)]
    pub delimiter: Option<Delimiter>,
    /// Drop rows with missing values instead of failing.
    #[arg(long)]
    pub drop_incomplete: bool,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

/// Scenario document as written by users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: usize,
    pub p: usize,
    /// `iid` or `equicorrelated`.
    #[serde(default = "default_design")]
    pub design: String,
    #[serde(default)]
    pub rho: Option<f64>,
    /// True coefficients; omit to draw `(x, y)` jointly and score against 0.
    #[serde(default)]
    pub beta0: Option<Vec<f64>>,
    #[serde(default)]
    pub contamination_rate: f64,
    /// Replacement point `(x', y)`; defaults to `(7, ..., 7, -7)`.
    #[serde(default)]
    pub replacement: Option<Vec<f64>>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub methods: Option<Vec<Method>>,
    #[serde(default)]
    pub lst: Option<LstConfig>,
    #[serde(default)]
    pub lts: Option<LtsSettings>,
}

fn default_design() -> String {
    "iid".into()
}

fn default_replications() -> usize {
    1000
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn scenario(&self) -> Result<SimulationScenario> {
        let design = match self.design.to_ascii_lowercase().as_str() {
            "iid" | "iid_standard" => {
                if self.rho.is_some_and(|r| r != 0.0) {
                    return Err(Error::Config("rho is only used with design = \"equicorrelated\"".into()));
                }
                Design::IidStandard
            }
            "equicorrelated" => Design::Equicorrelated {
                rho: self.rho.ok_or_else(|| {
                    Error::Config("design = \"equicorrelated\" needs rho".into())
                })?,
            },
            other => return Err(Error::Config(format!("unknown design '{other}'"))),
        };
        if self.p < 2 {
            return Err(Error::Config(format!("p must be at least 2, got {}", self.p)));
        }
        let point = match &self.replacement {
            Some(p) => p.clone(),
            None => Contamination::corner(0.0, self.p, 7.0).point,
        };
        let beta0 = self.beta0.clone().map(CoefficientVector::new).transpose()?;
        let s = SimulationScenario {
            n: self.n,
            p: self.p,
            design,
            beta0,
            contamination: Contamination {
                rate: self.contamination_rate,
                point,
            },
            replications: self.replications,
            seed: self.seed,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub method: Method,
    pub coefficients: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub retained: Option<usize>,
    pub error: Option<String>,
}

/// Everything needed to rerun a command: the arguments, every resolved
/// parameter, the outputs and where they were written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub settings: EstimatorSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<SimulationScenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSource>,
    pub fits: Vec<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsTable>,
    pub artifacts: Vec<PathBuf>,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSource {
    pub path: PathBuf,
    pub spec: ColumnSpec,
    pub n: usize,
    pub p: usize,
    pub dropped_lines: Vec<usize>,
    pub reps: usize,
}

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError {
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn resolve_methods(flag: &Option<Vec<Method>>, file: Option<&Vec<Method>>) -> Vec<Method> {
    let mut methods = flag
        .clone()
        .or_else(|| file.cloned())
        .unwrap_or_else(|| Method::ALL.to_vec());
    let mut seen = std::collections::HashSet::new();
    methods.retain(|m| seen.insert(*m));
    methods
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

struct Artifacts<'a> {
    dir: Option<&'a Path>,
    written: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    fn new(dir: Option<&'a Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        Ok(Artifacts {
            dir,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = self.dir {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            self.written.push(path);
        }
        Ok(())
    }

    fn finish(mut self, report: &mut RunReport) -> Result<()> {
        if let Some(dir) = self.dir {
            let path = dir.join("report.json");
            self.written.push(path.clone());
            report.artifacts = self.written.clone();
            let json = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Format(format!("report serialization: {e}")))?;
            fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn column_spec(args: &FitArgs) -> Result<ColumnSpec> {
    Ok(ColumnSpec {
        response: args.response.parse::<ColumnRef>()?,
        predictors: parse_column_list(&args.predictors)?,
        skip_header: args.header,
        delimiter: args.delimiter,
        drop_incomplete: args.drop_incomplete,
    })
}

/// Plot-ready `row,fitted,residual,retained` rows for one fit.
fn residual_csv(d: &crate::Dataset, f: &TrimmedFit) -> Result<String> {
    let r = residuals(d, &f.beta)?;
    let mut out = String::from("row,fitted,residual,retained\n");
    for (i, r) in r.as_slice().iter().enumerate() {
        let kept = f.retained.binary_search(&i).is_ok();
        let _ = writeln!(out, "{},{},{},{}", i + 1, d.y(i) - r, r, u8::from(kept));
    }
    Ok(out)
}

pub fn cmd_fit(
    args: &FitArgs,
    command: Vec<String>,
    out: &mut dyn Write,
) -> std::result::Result<RunReport, CommandError> {
    let spec = column_spec(args)?;
    let methods = resolve_methods(&args.est.methods, None);
    let mut settings = EstimatorSettings::default();
    args.est.apply(&mut settings);
    let seed = args.est.seed.unwrap_or(0);
    let reps = args.est.reps.unwrap_or(1);
    if reps == 0 {
        return Err(Error::Config("--reps must be at least 1".into()).into());
    }
    let loaded = load_csv(&args.data, &spec)?;
    let d = &loaded.dataset;
    validate_settings(&settings, &methods, d.n(), d.p())?;
    let mut artifacts = Artifacts::new(args.est.out_dir.as_deref())?;

    writeln!(out, "data: {} (n = {}, p = {})", args.data.display(), d.n(), d.p()).map_err(io_err)?;
    if !loaded.dropped_lines.is_empty() {
        writeln!(out, "dropped {} incomplete rows", loaded.dropped_lines.len()).map_err(io_err)?;
    }
    writeln!(out, "{:<8}{:>12}{:>18}  coefficients", "method", "retained", "objective").map_err(io_err)?;

    let mut fits = Vec::new();
    let mut coef_csv = String::from("method,objective,retained");
    for j in 0..d.p() {
        let _ = write!(coef_csv, ",beta{j}");
    }
    coef_csv.push('\n');
    let mut failed = false;
    for &m in &methods {
        match fit(d, m, &settings, seed) {
            Ok(f) => {
                let coefs: Vec<String> = f.beta.as_slice().iter().map(|b| format!("{b:.10}")).collect();
                writeln!(
                    out,
                    "{:<8}{:>12}{:>18.10}  [{}]",
                    m.as_str(),
                    format!("{}/{}", f.retained.len(), d.n()),
                    f.objective,
                    coefs.join(", ")
                )
                .map_err(io_err)?;
                let _ = write!(coef_csv, "{},{},{}", m, f.objective, f.retained.len());
                for b in f.beta.as_slice() {
                    let _ = write!(coef_csv, ",{b}");
                }
                coef_csv.push('\n');
                artifacts.write(&format!("residuals_{}.csv", m.as_str().to_ascii_lowercase()), &residual_csv(d, &f)?)?;
                fits.push(FitSummary {
                    method: m,
                    retained: Some(f.retained.len()),
                    objective: Some(f.objective),
                    coefficients: Some(f.beta.into_vec()),
                    error: None,
                });
            }
            Err(e) => {
                failed = true;
                writeln!(out, "{:<8}  error: {e}", m.as_str()).map_err(io_err)?;
                fits.push(FitSummary {
                    method: m,
                    coefficients: None,
                    objective: None,
                    retained: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    artifacts.write("coefficients.csv", &coef_csv)?;

    let mut metrics = None;
    if reps > 1 && !failed {
        let pool = thread_pool(args.est.threads)?;
        let study = pool.install(|| stability_study(d, &methods, &settings, reps, seed))?;
        writeln!(out, "\nrepeated fits: {reps}").map_err(io_err)?;
        write!(out, "{}", study.table.to_text()).map_err(io_err)?;
        artifacts.write("metrics.csv", &study.table.to_csv())?;
        artifacts.write("timing.csv", &study.table.timing_csv())?;
        metrics = Some(study.table);
    }

    let mut report = RunReport {
        command,
        seed,
        methods,
        settings,
        scenario: None,
        data: Some(DataSource {
            path: args.data.clone(),
            spec,
            n: d.n(),
            p: d.p(),
            dropped_lines: loaded.dropped_lines.clone(),
            reps,
        }),
        fits,
        metrics,
        artifacts: Vec::new(),
        failed,
    };
    artifacts.finish(&mut report)?;
    if failed {
        let failures: Vec<String> = report
            .fits
            .iter()
            .filter_map(|f| f.error.as_ref().map(|e| format!("{}: {e}", f.method)))
            .collect();
        return Err(CommandError {
            code: 2,
            message: failures.join("; "),
        });
    }
    Ok(report)
}

fn validate_settings(settings: &EstimatorSettings, methods: &[Method], n: usize, p: usize) -> Result<()> {
    if methods.contains(&Method::Lst) {
        settings.lst.validate(n)?;
    }
    if methods.contains(&Method::Lts) {
        settings.lts.resolve(n, p, 0).validate(n)?;
    }
    Ok(())
}

struct PreparedStudy {
    scenario: SimulationScenario,
    methods: Vec<Method>,
    settings: EstimatorSettings,
}

fn prepare_study(args: &SimArgs) -> Result<PreparedStudy> {
    let file = ScenarioFile::load(&args.scenario)?;
    let mut scenario = file.scenario()?;
    if let Some(r) = args.est.reps {
        scenario.replications = r;
    }
    if let Some(s) = args.est.seed {
        scenario.seed = s;
    }
    scenario.validate()?;
    let methods = resolve_methods(&args.est.methods, file.methods.as_ref());
    let mut settings = EstimatorSettings {
        lst: file.lst.clone().unwrap_or_default(),
        lts: file.lts.clone().unwrap_or_default(),
    };
    args.est.apply(&mut settings);
    validate_settings(&settings, &methods, scenario.n, scenario.p)?;
    Ok(PreparedStudy {
        scenario,
        methods,
        settings,
    })
}

fn execute_study(args: &SimArgs, prepared: &PreparedStudy) -> Result<StudyResult> {
    let pool = thread_pool(args.est.threads)?;
    pool.install(|| run_study(&prepared.scenario, &prepared.methods, &prepared.settings))
}

fn replication_failures(table: &MetricsTable) -> std::result::Result<(), CommandError> {
    let failed: Vec<String> = table
        .rows
        .iter()
        .filter(|r| r.failures > 0)
        .map(|r| format!("{} failed on {} of {} replications", r.method, r.failures, r.replications))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CommandError {
            code: 2,
            message: failed.join("; ") + " (results written)",
        })
    }
}

pub fn cmd_sim(
    args: &SimArgs,
    command: Vec<String>,
    out: &mut dyn Write,
) -> std::result::Result<RunReport, CommandError> {
    let prepared = prepare_study(args)?;
    let mut artifacts = Artifacts::new(args.est.out_dir.as_deref())?;
    let s = &prepared.scenario;
    writeln!(
        out,
        "scenario: n = {}, p = {}, contamination = {}, replications = {}, seed = {}",
        s.n, s.p, s.contamination.rate, s.replications, s.seed
    )
    .map_err(io_err)?;
    let study = execute_study(args, &prepared)?;
    write!(out, "{}", study.table.to_text()).map_err(io_err)?;
    artifacts.write("metrics.csv", &study.table.to_csv())?;
    artifacts.write("timing.csv", &study.table.timing_csv())?;
    let mut report = RunReport {
        command,
        seed: s.seed,
        methods: prepared.methods.clone(),
        settings: prepared.settings.clone(),
        scenario: Some(s.clone()),
        data: None,
        fits: Vec::new(),
        failed: study.table.rows.iter().any(|r| r.failures > 0),
        metrics: Some(study.table),
        artifacts: Vec::new(),
    };
    artifacts.finish(&mut report)?;
    replication_failures(report.metrics.as_ref().expect("set above"))?;
    Ok(report)
}

fn quartiles(mut v: Vec<f64>) -> Option<(f64, f64, f64)> {
    if v.is_empty() {
        return None;
    }
    v.sort_unstable_by(f64::total_cmp);
    let q = |f: f64| {
        let pos = f * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Some((q(0.25), q(0.5), q(0.75)))
}

/// Per-method quartiles `(q1, median, q3)` of the squared deviations.
pub fn deviation_quartiles(study: &StudyResult, method: Method) -> Option<(f64, f64, f64)> {
    quartiles(
        study
            .records
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.squared_deviation)
            .collect(),
    )
}

pub fn cmd_boxplot_data(
    args: &SimArgs,
    command: Vec<String>,
    out: &mut dyn Write,
) -> std::result::Result<RunReport, CommandError> {
    let prepared = prepare_study(args)?;
    let dir = args.est.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut artifacts = Artifacts::new(Some(&dir))?;
    let study = execute_study(args, &prepared)?;
    artifacts.write("squared_deviations.csv", &study.squared_deviation_csv())?;
    writeln!(out, "{:<8}{:>12}{:>12}{:>12}", "method", "q1", "median", "q3").map_err(io_err)?;
    for &m in &prepared.methods {
        if let Some((q1, q2, q3)) = deviation_quartiles(&study, m) {
            writeln!(out, "{:<8}{q1:>12.4}{q2:>12.4}{q3:>12.4}", m.as_str()).map_err(io_err)?;
        }
    }
    let mut report = RunReport {
        command,
        seed: prepared.scenario.seed,
        methods: prepared.methods.clone(),
        settings: prepared.settings.clone(),
        scenario: Some(prepared.scenario.clone()),
        data: None,
        fits: Vec::new(),
        failed: study.table.rows.iter().any(|r| r.failures > 0),
        metrics: Some(study.table),
        artifacts: Vec::new(),
    };
    artifacts.finish(&mut report)?;
    replication_failures(report.metrics.as_ref().expect("set above"))?;
    Ok(report)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, command, out),
        Command::Sim(a) => cmd_sim(a, command, out),
        Command::BoxplotData(a) => cmd_boxplot_data(a, command, out),
    };
    match result {
        Ok(_) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
