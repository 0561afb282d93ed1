//! Convergence studies against certified references, log-log rate fits, and
//! conservation/dissipation monitors.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::SpectralField;
use crate::operators::{ASpec, Classification, VSpec};
use crate::splitting::{evolve_final, reference_solution, Method, ReferenceSolution, SplitConfig, Trajectory};
use crate::subflows::{AFlow, BFlowControl};

/// Errors at or below this level count as exact.
pub const EXACT_TOL: f64 = 1e-12;

/// Least-squares slope of `log(error)` against `log(dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    /// Largest absolute deviation of the fit in log space.
    pub residual: f64,
    pub used_rows: usize,
    /// Rows dropped because their error was zero.
    pub zero_rows: usize,
}

pub fn fit_rate(rows: &[(f64, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(dt, e)| *dt > 0.0 && *e > 0.0 && dt.is_finite() && e.is_finite())
        .map(|(dt, e)| (dt.ln(), e.ln()))
        .collect();
    let zero_rows = rows.iter().filter(|(_, e)| *e == 0.0).count();
    if usable.len() < 3 {
        return Err(Error::TooFewRows(usable.len()));
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("rate fit needs distinct dt values".into()));
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let residual = usable
        .iter()
        .map(|(x, y)| (y - (intercept + rate * x)).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        rate,
        residual,
        used_rows: usable.len(),
        zero_rows,
    })
}

/// One initial-value problem to study.
#[derive(Debug, Clone)]
pub struct StudyProblem {
    pub id: String,
    pub u0: SpectralField,
    pub a: ASpec,
    pub v: VSpec,
    pub horizon: f64,
    pub bflow: BFlowControl,
}

/// `dt_j = T / 2^{first + j}` for `j = 0 … count − 1`.
pub fn halving_dts(horizon: f64, first_divisor_log2: u32, count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| horizon / 2f64.powi((first_divisor_log2 as usize + j) as i32))
        .collect()
}

fn check_dt_list(horizon: f64, dts: &[f64]) -> Result<()> {
    if dts.is_empty() {
        return Err(Error::InvalidParameter("study needs at least one dt".into()));
    }
    for w in dts.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::InvalidParameter("study dts must be strictly decreasing".into()));
        }
    }
    for &dt in dts {
        let ratio = horizon / dt;
        let j = ratio.log2().round();
        if !(dt > 0.0) || (ratio - 2f64.powi(j as i32)).abs() > 1e-9 * ratio || j < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dt = {dt} is not T/2^j for T = {horizon}; all runs must share the endpoint"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RowStatus {
    Valid,
    /// Run aborted, e.g. by the blow-up guard; excluded from the fit.
    Failed(String),
}

#[derive(Debug, Clone)]
struct RowRun {
    dt: f64,
    outcome: std::result::Result<SpectralField, Error>,
    wall_seconds: f64,
}

/// Final states of every run of a study plus the shared reference; reports
/// for any norm are assembled from it without re-running.
#[derive(Debug, Clone)]
pub struct StudyRuns {
    pub preset: String,
    pub method: Method,
    pub horizon: f64,
    u0_l2: f64,
    rows: Vec<RowRun>,
    pub reference: ReferenceSolution,
}

/// Runs one splitting evolution per `dt` plus the certified reference.
pub fn run_study(problem: &StudyProblem, method: Method, dts: &[f64], refinement: u32) -> Result<StudyRuns> {
    check_dt_list(problem.horizon, dts)?;
    let smallest = *dts.last().expect("non-empty");
    let base = SplitConfig {
        method,
        dt: smallest,
        horizon: problem.horizon,
        a: problem.a.clone(),
        v: problem.v.clone(),
        bflow: problem.bflow,
        record_every: 1,
    };
    base.validate()?;

    let (reference, rows) = rayon::join(
        || reference_solution(&problem.u0, &base, refinement),
        || {
            dts.par_iter()
                .map(|&dt| {
                    let start = Instant::now();
                    let cfg = SplitConfig { dt, ..base.clone() };
                    let outcome = evolve_final(&problem.u0, &cfg);
                    RowRun {
                        dt,
                        outcome,
                        wall_seconds: start.elapsed().as_secs_f64(),
                    }
                })
                .collect::<Vec<_>>()
        },
    );
    Ok(StudyRuns {
        preset: problem.id.clone(),
        method,
        horizon: problem.horizon,
        u0_l2: problem.u0.l2_norm(),
        rows,
        reference: reference?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub dt: f64,
    /// `‖u^{⌊T/dt⌋} − u_ref‖_{H^s}`; NaN for failed rows.
    pub error: f64,
    pub status: RowStatus,
    pub wall_seconds: f64,
    /// `|‖u^{⌊T/dt⌋}‖_{L²} − ‖u0‖_{L²}| / ‖u0‖_{L²}`.
    pub l2_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Regime {
    /// Every error is at roundoff level: splitting is exact for this problem.
    Exact,
    Rate(RateFit),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub preset: String,
    pub method: Method,
    pub norm_index: f64,
    /// Sorted by decreasing dt.
    pub rows: Vec<StudyRow>,
    pub regime: Regime,
    /// Reference self-convergence in the study norm.
    pub certificate: f64,
}

impl ConvergenceReport {
    pub fn fitted_rate(&self) -> Option<f64> {
        match &self.regime {
            Regime::Rate(f) => Some(f.rate),
            Regime::Exact => None,
        }
    }

    pub fn fit(&self) -> Option<&RateFit> {
        match &self.regime {
            Regime::Rate(f) => Some(f),
            Regime::Exact => None,
        }
    }
}

impl StudyRuns {
    /// Assembles the report for `H^s` errors, enforcing the reference
    /// certificate against the smallest measured error.
    pub fn report(&self, s: f64) -> Result<ConvergenceReport> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for run in &self.rows {
            let row = match &run.outcome {
                Ok(u) => StudyRow {
                    dt: run.dt,
                    error: u.sub(&self.reference.field).sobolev_norm(s)?,
                    status: RowStatus::Valid,
                    wall_seconds: run.wall_seconds,
                    l2_deviation: if self.u0_l2 > 0.0 {
                        (u.l2_norm() - self.u0_l2).abs() / self.u0_l2
                    } else {
                        0.0
                    },
                },
                Err(e) => {
                    log::warn!("row dt = {} excluded from the fit: {e}", run.dt);
                    StudyRow {
                        dt: run.dt,
                        error: f64::NAN,
                        status: RowStatus::Failed(e.to_string()),
                        wall_seconds: run.wall_seconds,
                        l2_deviation: f64::NAN,
                    }
                }
            };
            rows.push(row);
        }
        let valid: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.status == RowStatus::Valid)
            .map(|r| (r.dt, r.error))
            .collect();
        let certificate = self.reference.certificate_in(s)?;

        let exact = !valid.is_empty() && valid.iter().all(|(_, e)| *e <= EXACT_TOL);
        let regime = if exact {
            Regime::Exact
        } else {
            let smallest = valid.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            let bound = crate::splitting::CERTIFICATE_FACTOR * smallest;
            if !(certificate <= bound) {
                return Err(Error::ReferenceNotConverged { certificate, bound });
            }
            Regime::Rate(fit_rate(&valid)?)
        };
        Ok(ConvergenceReport {
            preset: self.preset.clone(),
            method: self.method,
            norm_index: s,
            rows,
            regime,
            certificate,
        })
    }
}

/// One study for one norm; see [`run_study`] for reusing runs across norms.
pub fn convergence_study(
    problem: &StudyProblem,
    method: Method,
    dts: &[f64],
    s: f64,
    refinement: u32,
) -> Result<ConvergenceReport> {
    run_study(problem, method, dts, refinement)?.report(s)
}

pub const MASS_TOL: f64 = 1e-12;
pub const ISOMETRY_TOL: f64 = 1e-12;
/// Allowed relative L² growth per recorded step for diffusive `A`.
pub const MONOTONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationRow {
    pub time: f64,
    pub mass: f64,
    pub l2: f64,
    pub h4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub classification: Classification,
    pub rows: Vec<ConservationRow>,
    /// `max_n |m_n − m_0|` over the mass scale `max(|m_0|, (2π)^{d/2}‖u_0‖_{L²})`.
    pub mass_drift: f64,
    pub mass_flag: bool,
    /// Largest relative L² increase between consecutive snapshots.
    pub max_l2_increase: f64,
    /// L² grew for a diffusive `A` beyond [`MONOTONE_TOL`].
    pub monotonicity_flag: bool,
    /// Largest relative L² change of `Φ_A` applied to the recorded states
    /// (dispersive `A` only).
    pub a_isometry_defect: Option<f64>,
    pub isometry_flag: bool,
    /// Largest relative L² change between snapshots; reported, never flagged,
    /// since the transport step changes L² whenever `div v(u) ≠ 0`.
    pub max_l2_change: f64,
}

pub fn conservation_report(traj: &Trajectory, a: &ASpec) -> Result<ConservationReport> {
    if traj.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "conservation report needs >= 2 snapshots, got {}",
            traj.len()
        )));
    }
    let rows: Vec<ConservationRow> = traj
        .times
        .iter()
        .zip(&traj.diagnostics)
        .map(|(&time, d)| ConservationRow {
            time,
            mass: d.mass,
            l2: d.l2,
            h4: d.h4,
        })
        .collect();
    let grid = traj.fields[0].grid();
    let scale = rows[0].mass.abs().max(grid.volume().sqrt() * rows[0].l2);
    let mass_drift = if scale > 0.0 {
        rows.iter().map(|r| (r.mass - rows[0].mass).abs()).fold(0.0, f64::max) / scale
    } else {
        0.0
    };

    let mut max_increase: f64 = 0.0;
    let mut max_change: f64 = 0.0;
    for w in rows.windows(2) {
        if w[0].l2 > 0.0 {
            let rel = (w[1].l2 - w[0].l2) / w[0].l2;
            max_increase = max_increase.max(rel);
            max_change = max_change.max(rel.abs());
        }
    }

    let classification = a.classification();
    let a_isometry_defect = if classification == Classification::Dispersive {
        let flow = AFlow::new(a, &grid)?;
        let mut worst: f64 = 0.0;
        for (i, u) in traj.fields.iter().enumerate().skip(1) {
            let dt = traj.times[i] - traj.times[i - 1];
            let before = u.l2_norm();
            if before > 0.0 {
                let after = flow.propagate(dt, u)?.l2_norm();
                worst = worst.max((after - before).abs() / before);
            }
        }
        Some(worst)
    } else {
        None
    };

    Ok(ConservationReport {
        classification,
        mass_flag: mass_drift > MASS_TOL,
        monotonicity_flag: classification == Classification::Diffusive && max_increase > MONOTONE_TOL,
        isometry_flag: a_isometry_defect.is_some_and(|d| d > ISOMETRY_TOL),
        rows,
        mass_drift,
        max_l2_increase: max_increase,
        a_isometry_defect,
        max_l2_change: max_change,
    })
}
