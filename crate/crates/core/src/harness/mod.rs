//! Scenario files, orchestration, persistence and convergence studies.
//!
//! A scenario is a TOML file (see `scenarios/` and the README for the
//! schema). Unknown keys are rejected. Reports are JSON; field dumps are CSV
//! with round-trip decimal formatting, so a rerun of the echoed config
//! reproduces every number bit-for-bit.

mod config;
mod study;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{
    CertificateRequest, CutoffConfig, FlowConfig, GridConfig, InitialConfig, Scenario,
    ScenarioConfig, SpaceConfig, WarpConfig, WeightConfig, WindowConfig,
};
pub use study::{convergence_study, ConvergenceTable, LevelResult, Reference};

use crate::boundary::{boundary_certificate, index_comparison_check};
use crate::error::{Error, Result};
use crate::estimates::{
    derive_fields, gradient_certificate, harnack_certificate, lemma_residual, li_yau_diagnostic,
    liouville_check, reaction_bounds, Certificate, CertificateKind, LiouvilleSetup, Quantity,
    Verdict,
};
use crate::solver::{field_to_csv, solve, BoundViolation, SolverStats, Trajectory};

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes shared by the CLI and batch summaries.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

/// Error as embedded in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub class: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        let class = match e {
            Error::Domain { .. } => "domain",
            Error::Pole => "pole",
            Error::Config(_) => "config",
            Error::Positivity(_) => "positivity",
            Error::Solver { .. } => "solver",
            Error::Divergence { .. } => "divergence",
            Error::FlowExtinction { .. } => "flow_extinction",
            Error::Hypothesis(_) => "hypothesis",
            Error::Io(_) => "io",
        };
        Self {
            class,
            message: e.to_string(),
        }
    }
}

impl ErrorRecord {
    pub fn is_hypothesis_or_config(&self) -> bool {
        matches!(self.class, "config" | "hypothesis" | "domain" | "pole")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateOutcome {
    pub request: CertificateRequest,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

impl CertificateOutcome {
    pub fn exit_code(&self) -> i32 {
        match (&self.certificate, &self.error) {
            (_, Some(e)) if e.is_hypothesis_or_config() => EXIT_HYPOTHESIS,
            (_, Some(_)) => EXIT_FAIL,
            (Some(c), None) if c.passed() => EXIT_PASS,
            _ => EXIT_FAIL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub stats: SolverStats,
    pub bound_held: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_violation: Option<BoundViolation>,
    pub value_min: f64,
    pub value_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
    pub scenario: ScenarioConfig,
    /// Dyadic level the certificates were compared against (0 = none).
    pub refine: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve_error: Option<ErrorRecord>,
    pub certificates: Vec<CertificateOutcome>,
    /// Emitted files, relative to the output directory.
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// The report minus the wall clock: the bytes of `certificates.json`.
#[derive(Serialize)]
struct DeterministicView<'a> {
    schema_version: u32,
    artifact_version: &'static str,
    config_hash: &'a str,
    name: &'a str,
    refine: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve: &'a Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve_error: &'a Option<ErrorRecord>,
    certificates: &'a [CertificateOutcome],
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        let from_solve = match &self.solve_error {
            Some(e) if e.is_hypothesis_or_config() => EXIT_HYPOTHESIS,
            Some(_) => EXIT_FAIL,
            None => EXIT_PASS,
        };
        self.certificates
            .iter()
            .map(CertificateOutcome::exit_code)
            .fold(from_solve, i32::max)
    }

    pub fn certificates_json(&self) -> String {
        let view = DeterministicView {
            schema_version: self.schema_version,
            artifact_version: self.artifact_version,
            config_hash: &self.config_hash,
            name: &self.scenario.name,
            refine: self.refine,
            solve: &self.solve,
            solve_error: &self.solve_error,
            certificates: &self.certificates,
        };
        serde_json::to_string_pretty(&view).expect("reports serialize") + "\n"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Attach a refinement comparison against this dyadic level (0 = none).
    pub refine: u32,
    /// Solve and persist fields only.
    pub solve_only: bool,
    /// Directory for the report and CSVs; nothing is written when `None`.
    pub out: Option<PathBuf>,
}

pub fn config_hash(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

/// Solves the scenario on its own grid and metric.
pub fn solve_scenario(scenario: &Scenario) -> Result<Trajectory> {
    let cfg = &scenario.config;
    match &scenario.flow {
        Some(flow) => flow.solve_on_flow(
            &cfg.equation,
            &scenario.grid,
            &scenario.initial,
            &scenario.window,
            &cfg.solver,
        ),
        None => solve(
            &scenario.space,
            &cfg.equation,
            &scenario.grid,
            &scenario.initial,
            &scenario.window,
            &cfg.solver,
        ),
    }
}

fn needs_trajectory(req: &CertificateRequest) -> bool {
    !matches!(
        req,
        CertificateRequest::Liouville { .. } | CertificateRequest::IndexComparison { .. }
    )
}

/// One certificate on a solved trajectory. Never mutates `traj`.
pub fn evaluate(
    scenario: &Scenario,
    traj: Option<&Trajectory>,
    req: &CertificateRequest,
) -> Result<Certificate> {
    use CertificateRequest as R;
    let summary = scenario.space.comparison_quantities()?;
    let traj_ref = || traj.ok_or_else(|| Error::Config("certificate needs the trajectory".into()));
    let domain = || {
        scenario
            .domain
            .as_ref()
            .ok_or_else(|| Error::Config("certificate needs a [domain] table".into()))
    };
    match req {
        R::Lemma21 { tol } | R::Lemma31 { tol } | R::Lemma41 { tol } => {
            let traj = traj_ref()?;
            let quantity = if traj.eq.is_log_power() {
                Quantity::Log
            } else {
                Quantity::Sqrt
            };
            let derived = derive_fields(traj, quantity)?;
            let bounds = reaction_bounds(&traj.eq, traj);
            lemma_residual(traj, &derived, &bounds, summary.k_eff, req.kind(), *tol)
        }
        R::Thm11 { radius } | R::Thm12 { radius } | R::Thm13 { radius } => {
            let traj = traj_ref()?;
            let bounds = reaction_bounds(&traj.eq, traj);
            gradient_certificate(traj, &bounds, &summary, req.kind(), *radius)
        }
        R::Thm14 { radius, tol } | R::Thm15 { radius, tol } | R::Main5 { radius, tol } => {
            boundary_certificate(domain()?, traj_ref()?, req.kind(), *radius, *tol)
        }
        R::Harnack { pairs } => {
            let pairs: Vec<(f64, f64)> = pairs.iter().map(|p| (p[0], p[1])).collect();
            harnack_certificate(traj_ref()?, summary.k_eff, &pairs)
        }
        R::Liouville { duration } => {
            let setup = LiouvilleSetup {
                grid: scenario.grid,
                guess: scenario.initial.clone(),
                initial: scenario.initial.clone(),
                duration: *duration,
            };
            liouville_check(
                &scenario.space,
                &scenario.config.equation,
                &setup,
                &scenario.config.solver,
            )
        }
        R::LiYau { radius, tol } => li_yau_diagnostic(traj_ref()?, *radius, *tol),
        R::IndexComparison { radius } => index_comparison_check(domain()?, *radius),
    }
}

/// Whether a refinement comparison means anything for this kind.
fn refinable(kind: CertificateKind) -> bool {
    !matches!(
        kind,
        CertificateKind::Liouville | CertificateKind::IndexComparison
    )
}

fn outcome(request: &CertificateRequest, result: Result<Certificate>) -> CertificateOutcome {
    match result {
        Ok(c) => CertificateOutcome {
            request: request.clone(),
            certificate: Some(c),
            error: None,
        },
        Err(e) => CertificateOutcome {
            request: request.clone(),
            certificate: None,
            error: Some(ErrorRecord::from(&e)),
        },
    }
}

fn write(dir: &Path, name: &str, body: &str, files: &mut Vec<String>) -> Result<()> {
    std::fs::write(dir.join(name), body)?;
    files.push(name.to_string());
    Ok(())
}

/// Solves, computes the requested certificates and, with `options.out`,
/// writes `report.json`, `certificates.json` and the CSV fields.
///
/// Solver and hypothesis failures are embedded per certificate; only I/O
/// errors abort the run.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunReport> {
    let started = Instant::now();
    let traj = solve_scenario(scenario);
    let fine_traj = if options.refine > 0 && !options.solve_only && traj.is_ok() {
        let any = scenario
            .config
            .certificates
            .iter()
            .any(|r| refinable(r.kind()) && needs_trajectory(r));
        if any {
            Some(
                scenario
                    .refined(options.refine)
                    .and_then(|s| solve_scenario(&s).map(|t| (s, t))),
            )
        } else {
            None
        }
    } else {
        None
    };
    let mut certificates = Vec::new();
    if !options.solve_only {
        for req in &scenario.config.certificates {
            let result = match (&traj, needs_trajectory(req)) {
                (Err(e), true) => Err(e.clone()),
                (t, _) => evaluate(scenario, t.as_ref().ok(), req),
            };
            let result = match (result, &fine_traj) {
                (Ok(c), Some(fine)) if refinable(req.kind()) => match fine {
                    Ok((s, t)) => match evaluate(s, Some(t), req) {
                        Ok(f) => Ok(c.with_refinement(&f)),
                        Err(e) => {
                            let mut c = c;
                            c.notes.push(format!("refined level failed: {e}"));
                            Ok(c)
                        }
                    },
                    Err(e) => {
                        let mut c = c;
                        c.notes.push(format!("refined solve failed: {e}"));
                        Ok(c)
                    }
                },
                (r, _) => r,
            };
            certificates.push(outcome(req, result));
        }
    }
    let (solve, solve_error) = match &traj {
        Ok(t) => {
            let (lo, hi) = t.value_range();
            let s = SolveSummary {
                stats: t.stats,
                bound_held: t.bound_held(),
                bound_violation: t.bound_violation,
                value_min: lo,
                value_max: hi,
            };
            (Some(s), None)
        }
        Err(e) => (None, Some(ErrorRecord::from(e))),
    };
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION,
        config_hash: config_hash(&scenario.source),
        scenario: scenario.config.clone(),
        refine: if options.solve_only {
            0
        } else {
            options.refine
        },
        solve,
        solve_error,
        certificates,
        files: Vec::new(),
        wall_clock_seconds: 0.0,
    };
    if let Some(dir) = &options.out {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        write(
            dir,
            "initial.csv",
            &field_to_csv(&scenario.grid, &scenario.initial),
            &mut files,
        )?;
        if let Ok(t) = &traj {
            write(dir, "trajectory.csv", &t.to_csv(), &mut files)?;
        }
        write(dir, "config.toml", &scenario.source, &mut files)?;
        files.push("certificates.json".into());
        files.push("report.json".into());
        report.files = files;
        std::fs::write(dir.join("certificates.json"), report.certificates_json())?;
        report.wall_clock_seconds = started.elapsed().as_secs_f64();
        std::fs::write(dir.join("report.json"), report.to_json())?;
    } else {
        report.wall_clock_seconds = started.elapsed().as_secs_f64();
    }
    Ok(report)
}

/// One batch entry: scenario name (or file stem on config errors) and exit code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchEntry {
    pub file: String,
    pub name: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub verdicts: Vec<(CertificateKind, Option<Verdict>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub schema_version: u32,
    pub entries: Vec<BatchEntry>,
}

impl BatchReport {
    pub fn exit_code(&self) -> i32 {
        self.entries
            .iter()
            .map(|e| e.exit_code)
            .max()
            .unwrap_or(EXIT_PASS)
    }
}

/// Scenario files in `path`: the file itself, or every `*.toml` in the
/// directory in lexicographic order.
pub fn scenario_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!(
            "no scenario files in {}",
            path.display()
        )));
    }
    Ok(files)
}

/// Runs every scenario into `out/<file stem>/` and writes `out/batch.json`.
/// Scenarios run one after another; each owns its directory.
pub fn run_batch(files: &[PathBuf], out: &Path, refine: u32) -> Result<BatchReport> {
    let mut entries = Vec::new();
    for file in files {
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let entry = match Scenario::load(file) {
            Ok(scenario) => {
                let options = RunOptions {
                    refine,
                    solve_only: false,
                    out: Some(out.join(&stem)),
                };
                let report = run_scenario(&scenario, &options)?;
                BatchEntry {
                    file: stem,
                    name: scenario.config.name.clone(),
                    exit_code: report.exit_code(),
                    config_hash: Some(report.config_hash.clone()),
                    error: report.solve_error.clone(),
                    verdicts: report
                        .certificates
                        .iter()
                        .map(|o| (o.request.kind(), o.certificate.as_ref().map(|c| c.verdict)))
                        .collect(),
                }
            }
            Err(e) => BatchEntry {
                file: stem.clone(),
                name: stem,
                exit_code: if e.is_hypothesis_or_config() {
                    EXIT_HYPOTHESIS
                } else {
                    EXIT_FAIL
                },
                config_hash: None,
                error: Some(ErrorRecord::from(&e)),
                verdicts: Vec::new(),
            },
        };
        entries.push(entry);
    }
    let report = BatchReport {
        schema_version: SCHEMA_VERSION,
        entries,
    };
    std::fs::create_dir_all(out)?;
    std::fs::write(
        out.join("batch.json"),
        serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
    )?;
    Ok(report)
}
