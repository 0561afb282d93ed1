//! Executes `evolve`, `study` and `admit` and writes their artifacts.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ConfigError, ExperimentConfig, InitialCondition};
use super::output::{plot_script, read_snapshot, trajectory_csv, write_atomic, write_csv, write_snapshot};
use crate::diagnostics::{conservation_report, run_study, ConvergenceReport, StudyProblem};
use crate::error::Error;
use crate::grid::{random_band_limited_spectrum, RealField, SpectralField};
use crate::operators::{check_admissibility, AdmissibilityReport};
use crate::splitting::evolve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Study,
    Admit,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Study => "study",
            Command::Admit => "admit",
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    Config(ConfigError),
    Solver(Error),
    AuditFailed(Vec<String>),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "{e}"),
            HarnessError::Solver(e) => write!(f, "{e}"),
            HarnessError::AuditFailed(d) => write!(f, "admissibility audit failed: {}", d.join("; ")),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<Error> for HarnessError {
    fn from(e: Error) -> Self {
        HarnessError::Solver(e)
    }
}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e)
    }
}

/// Machine-readable failure description written to stderr and `error.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
    pub details: Vec<String>,
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_VALIDATION,
            HarnessError::AuditFailed(_) => EXIT_OTHER,
            HarnessError::Solver(e) => match e {
                Error::InvalidGrid(_)
                | Error::NonFinite
                | Error::DimensionMismatch(_)
                | Error::InvalidParameter(_)
                | Error::RejectedOperator(_)
                | Error::NegativeTimeDiffusive(_)
                | Error::Snapshot(_) => EXIT_VALIDATION,
                Error::GuardTrip { .. } | Error::MaxSubsteps { .. } => EXIT_GUARD,
                Error::ReferenceNotConverged { .. } => EXIT_CERTIFICATE,
                Error::TooFewRows(_) | Error::Io(_) => EXIT_OTHER,
            },
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let kind = match self {
            HarnessError::Config(_) => "validation",
            HarnessError::AuditFailed(_) => "audit_failed",
            HarnessError::Solver(e) => match e {
                Error::GuardTrip { .. } => "guard_trip",
                Error::MaxSubsteps { .. } => "max_substeps",
                Error::ReferenceNotConverged { .. } => "certificate_failure",
                Error::TooFewRows(_) => "too_few_rows",
                Error::Io(_) => "io",
                _ => "validation",
            },
        };
        let details = match self {
            HarnessError::Config(e) => e.issues.iter().map(|i| i.to_string()).collect(),
            HarnessError::AuditFailed(d) => d.clone(),
            HarnessError::Solver(_) => Vec::new(),
        };
        let message = match self {
            HarnessError::Config(e) => format!("invalid configuration ({} problems)", e.issues.len()),
            other => other.to_string(),
        };
        ErrorRecord {
            status: "error",
            kind,
            exit_code: self.exit_code(),
            message,
            details,
        }
    }

    pub fn record_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("error record serializes")
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub reports: Vec<ConvergenceReport>,
    pub admissibility: Option<AdmissibilityReport>,
}

/// Builds the configured initial state.
pub fn initial_field(cfg: &ExperimentConfig) -> Result<SpectralField, Error> {
    let grid = cfg.grid;
    let last = grid.dims() - 1;
    match &cfg.init {
        InitialCondition::SinX => RealField::from_fn(grid, |x| x[0].sin())?.forward(),
        InitialCondition::TwoMode => RealField::from_fn(grid, |x| x[0].sin() + (2.0 * x[last]).cos())?.forward(),
        InitialCondition::Constant(c) => RealField::constant(grid, *c)?.forward(),
        InitialCondition::Random { seed, decay, zero_mean } => {
            random_band_limited_spectrum(grid, *seed, *decay, *zero_mean)
        }
        InitialCondition::Snapshot(path) => {
            let snap = read_snapshot(path)?;
            if snap.field.grid() != grid {
                return Err(Error::DimensionMismatch(format!(
                    "snapshot {} has dims = {}, n = {}; the configuration asks for dims = {}, n = {}",
                    path.display(),
                    snap.field.grid().dims(),
                    snap.field.grid().n(),
                    grid.dims(),
                    grid.n()
                )));
            }
            snap.field.forward()
        }
    }
}

/// Runs `command` and writes its artifacts into `out`. On failure an
/// `error.json` record is written there as well.
pub fn run(cfg: &ExperimentConfig, command: Command, out: &Path) -> Result<RunOutcome, HarnessError> {
    let result = match command {
        Command::Evolve => run_evolve(cfg, out),
        Command::Study => run_study_command(cfg, out),
        Command::Admit => run_admit(cfg, out),
    };
    if let Err(e) = &result {
        if let Err(io) = write_atomic(&out.join("error.json"), format!("{}\n", e.record_json()).as_bytes()) {
            log::error!("could not write error record: {io}");
        }
    }
    result
}

fn run_evolve(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, HarnessError> {
    let u0 = initial_field(cfg)?;
    log::info!(
        "evolve {} on {}^{} with {} steps of dt = {}",
        cfg.preset_id,
        cfg.grid.n(),
        cfg.grid.dims(),
        cfg.split.steps(),
        cfg.split.dt
    );
    let (traj, failure) = match evolve(&u0, &cfg.split) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    let mut outcome = RunOutcome::default();
    for (i, (field, time)) in traj.fields.iter().zip(&traj.times).enumerate() {
        let path = out.join("snapshots").join(format!("snap_{:06}.bin", traj.steps[i]));
        write_snapshot(&path, &field.inverse()?, *time)?;
        outcome.artifacts.push(path);
    }
    let csv = out.join("trajectory.csv");
    write_atomic(&csv, trajectory_csv(&traj).as_bytes())?;
    outcome.artifacts.push(csv);
    if let Some(e) = failure {
        return Err(e.into());
    }
    let report = conservation_report(&traj, &cfg.split.a)?;
    for (flag, what) in [
        (report.mass_flag, "mass drift"),
        (report.monotonicity_flag, "L2 growth under diffusive A"),
        (report.isometry_flag, "A-flow isometry defect"),
    ] {
        if flag {
            log::warn!("conservation check flagged: {what}");
        }
    }
    let json = out.join("conservation.json");
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&json, format!("{text}\n").as_bytes())?;
    outcome.artifacts.push(json);
    Ok(outcome)
}

fn norm_tag(s: f64) -> String {
    format!("{s}").replace('.', "p")
}

fn run_study_command(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, HarnessError> {
    let problem = StudyProblem {
        id: cfg.preset_id.clone(),
        u0: initial_field(cfg)?,
        a: cfg.split.a.clone(),
        v: cfg.split.v.clone(),
        horizon: cfg.split.horizon,
        bflow: cfg.split.bflow,
    };
    let dts = cfg.study_dts();
    let mut outcome = RunOutcome::default();
    let mut names = Vec::new();
    let mut first_error: Option<HarnessError> = None;
    for &method in &cfg.study.methods {
        log::info!("study {} / {method}: dts {:?}, refinement {}", cfg.preset_id, dts, cfg.study.refinement);
        let runs = match run_study(&problem, method, &dts, cfg.study.refinement) {
            Ok(r) => r,
            Err(e) => {
                first_error.get_or_insert(e.into());
                continue;
            }
        };
        for &s in &cfg.study.norms {
            match runs.report(s) {
                Ok(report) => {
                    let name = format!("study_{}_{}_s{}.csv", cfg.preset_id, method.name(), norm_tag(s));
                    let path = out.join(&name);
                    write_csv(&report, &path)?;
                    if let Some(fit) = report.fit() {
                        log::info!("{method} H^{s}: rate {:.4}, residual {:.3e}", fit.rate, fit.residual);
                    }
                    outcome.artifacts.push(path);
                    outcome.reports.push(report);
                    names.push(name);
                }
                Err(e) => {
                    first_error.get_or_insert(e.into());
                }
            }
        }
    }
    if !names.is_empty() {
        let path = out.join("plot_study.py");
        write_atomic(&path, plot_script(&names).as_bytes())?;
        outcome.artifacts.push(path);
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

fn run_admit(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, HarnessError> {
    let report = check_admissibility(&cfg.split.a, &cfg.split.v, &cfg.grid, cfg.admit.trials, cfg.admit.seed)?;
    let path = out.join("admissibility.json");
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&path, format!("{text}\n").as_bytes())?;
    if !report.passed {
        return Err(HarnessError::AuditFailed(report.diagnosis.clone()));
    }
    Ok(RunOutcome {
        artifacts: vec![path],
        reports: Vec::new(),
        admissibility: Some(report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let guard = HarnessError::Solver(Error::GuardTrip {
            time: 0.1,
            index: 4.0,
            norm: 1e9,
            threshold: 1e3,
        });
        assert_eq!(guard.exit_code(), EXIT_GUARD);
        let cert = HarnessError::Solver(Error::ReferenceNotConverged {
            certificate: 1.0,
            bound: 0.1,
        });
        assert_eq!(cert.exit_code(), EXIT_CERTIFICATE);
        assert_eq!(
            HarnessError::Solver(Error::InvalidGrid("x".into())).exit_code(),
            EXIT_VALIDATION
        );
        let json: serde_json::Value = serde_json::from_str(&guard.record_json()).unwrap();
        assert_eq!(json["kind"], "guard_trip");
        assert_eq!(json["exit_code"], 3);
    }
}
