//! Godunov and Strang splitting of `u_t + div(u v(u)) = A(u)`.
//!
//! Godunov: `u^{n+1} = Φ_A(Δt) Φ_B(Δt) u^n`.
//! Strang: `u^{n+1} = Φ_B(Δt/2) Φ_A(Δt) Φ_B(Δt/2) u^n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpectralField;
use crate::operators::{ASpec, VSpec};
use crate::subflows::{AFlow, BFlow, BFlowControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Godunov,
    Strang,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Godunov => "godunov",
            Method::Strang => "strang",
        }
    }

    /// Formal order of accuracy.
    pub fn order(&self) -> u32 {
        match self {
            Method::Godunov => 1,
            Method::Strang => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "godunov" | "lie" => Ok(Method::Godunov),
            "strang" => Ok(Method::Strang),
            other => Err(Error::InvalidParameter(format!(
                "unknown splitting method '{other}' (expected godunov or strang)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub method: Method,
    pub dt: f64,
    pub horizon: f64,
    pub a: ASpec,
    pub v: VSpec,
    pub bflow: BFlowControl,
    pub record_every: usize,
}

impl SplitConfig {
    pub fn new(method: Method, dt: f64, horizon: f64, a: ASpec, v: VSpec) -> Self {
        Self {
            method,
            dt,
            horizon,
            a,
            v,
            bflow: BFlowControl::default(),
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon T must be > 0, got {}",
                self.horizon
            )));
        }
        if self.steps() < 1 {
            return Err(Error::InvalidParameter(format!(
                "dt = {} exceeds the horizon T = {}",
                self.dt, self.horizon
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        self.bflow.validate()
    }

    /// `⌊T/Δt⌋`, tolerant of roundoff when `Δt` divides `T`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    /// Final time `⌊T/Δt⌋·Δt`.
    pub fn final_time(&self) -> f64 {
        self.steps() as f64 * self.dt
    }
}

fn shift_time(err: Error, offset: f64) -> Error {
    match err {
        Error::GuardTrip {
            time,
            index,
            norm,
            threshold,
        } => Error::GuardTrip {
            time: time + offset,
            index,
            norm,
            threshold,
        },
        other => other,
    }
}

/// Both sub-flows tabulated for one grid, plus a resolved guard.
pub struct Splitter {
    method: Method,
    a_flow: AFlow,
    b_flow: BFlow,
    ctrl: BFlowControl,
}

impl Splitter {
    /// Binds `cfg` to the grid of `u0`; a relative guard is pinned to `u0`.
    pub fn new(cfg: &SplitConfig, u0: &SpectralField) -> Result<Self> {
        cfg.bflow.validate()?;
        let grid = u0.grid();
        Ok(Self {
            method: cfg.method,
            a_flow: AFlow::new(&cfg.a, &grid)?,
            b_flow: BFlow::new(&cfg.v, &grid)?,
            ctrl: cfg.bflow.resolved_for(u0)?,
        })
    }

    pub fn step(&self, u: &SpectralField, dt: f64) -> Result<SpectralField> {
        match self.method {
            Method::Godunov => self.godunov(u, dt),
            Method::Strang => self.strang(u, dt),
        }
    }

    fn godunov(&self, u: &SpectralField, dt: f64) -> Result<SpectralField> {
        let half = self.b_flow.propagate(dt, u, &self.ctrl)?;
        self.a_flow.propagate(dt, &half)
    }

    fn strang(&self, u: &SpectralField, dt: f64) -> Result<SpectralField> {
        let quarter = self.b_flow.propagate(0.5 * dt, u, &self.ctrl)?;
        let three_quarter = self.a_flow.propagate(dt, &quarter)?;
        self.b_flow
            .propagate(0.5 * dt, &three_quarter, &self.ctrl)
            .map_err(|e| shift_time(e, 0.5 * dt))
    }
}

/// `Φ_A(Δt) ∘ Φ_B(Δt)`.
pub fn godunov_step(u: &SpectralField, dt: f64, cfg: &SplitConfig) -> Result<SpectralField> {
    Splitter::new(&SplitConfig { method: Method::Godunov, ..cfg.clone() }, u)?.godunov(u, dt)
}

/// `Φ_B(Δt/2) ∘ Φ_A(Δt) ∘ Φ_B(Δt/2)`.
pub fn strang_step(u: &SpectralField, dt: f64, cfg: &SplitConfig) -> Result<SpectralField> {
    Splitter::new(&SplitConfig { method: Method::Strang, ..cfg.clone() }, u)?.strang(u, dt)
}

/// Monitors recorded with each snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotDiagnostics {
    pub mass: f64,
    pub l2: f64,
    pub h4: f64,
}

impl SnapshotDiagnostics {
    pub fn of(u: &SpectralField) -> Self {
        Self {
            mass: u.mass(),
            l2: u.l2_norm(),
            h4: u.sobolev_weighted(|k2| (1.0 + k2).powi(4)),
        }
    }
}

/// Recorded states of a splitting run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    pub fields: Vec<SpectralField>,
    pub diagnostics: Vec<SnapshotDiagnostics>,
}

impl Trajectory {
    fn record(&mut self, step: usize, time: f64, u: &SpectralField) {
        self.times.push(time);
        self.steps.push(step);
        self.fields.push(u.clone());
        self.diagnostics.push(SnapshotDiagnostics::of(u));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SpectralField> {
        self.fields.last()
    }
}

/// A failed evolution with everything recorded before the failure.
#[derive(Debug, Clone)]
pub struct EvolveFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl fmt::Display for EvolveFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} recorded snapshots)",
            self.error,
            self.partial.len()
        )
    }
}

impl std::error::Error for EvolveFailure {}

impl From<Error> for EvolveFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: Trajectory::default(),
        }
    }
}

/// Applies `⌊T/Δt⌋` steps, recording every `record_every` steps and the
/// final state.
pub fn evolve(u0: &SpectralField, cfg: &SplitConfig) -> std::result::Result<Trajectory, EvolveFailure> {
    cfg.validate()?;
    let splitter = Splitter::new(cfg, u0)?;
    let steps = cfg.steps();
    let mut traj = Trajectory::default();
    traj.record(0, 0.0, u0);
    let mut u = u0.clone();
    for n in 1..=steps {
        let t0 = (n - 1) as f64 * cfg.dt;
        u = match splitter.step(&u, cfg.dt) {
            Ok(next) => next,
            Err(e) => {
                return Err(EvolveFailure {
                    error: shift_time(e, t0),
                    partial: traj,
                })
            }
        };
        if n % cfg.record_every == 0 || n == steps {
            traj.record(n, n as f64 * cfg.dt, &u);
        }
    }
    Ok(traj)
}

/// Final state only; skips snapshot bookkeeping.
pub fn evolve_final(u0: &SpectralField, cfg: &SplitConfig) -> Result<SpectralField> {
    cfg.validate()?;
    let splitter = Splitter::new(cfg, u0)?;
    let mut u = u0.clone();
    for n in 0..cfg.steps() {
        u = splitter
            .step(&u, cfg.dt)
            .map_err(|e| shift_time(e, n as f64 * cfg.dt))?;
    }
    Ok(u)
}

/// Fine Strang solution standing in for the exact solution, with its own
/// self-convergence certificate.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub field: SpectralField,
    /// The same evolution at `2Δt_ref`.
    pub coarse: SpectralField,
    pub dt_ref: f64,
    pub refinement: u32,
    /// `‖ref(Δt_ref) − ref(2Δt_ref)‖_{L²}`.
    pub certificate: f64,
}

/// Required margin between the certificate and the smallest measured error.
pub const CERTIFICATE_FACTOR: f64 = 0.01;

impl ReferenceSolution {
    /// Certificate measured in `H^s` instead of `L²`.
    pub fn certificate_in(&self, s: f64) -> Result<f64> {
        self.field.sub(&self.coarse).sobolev_norm(s)
    }

    /// Accepts the reference for errors no smaller than `smallest_error`.
    pub fn certify(&self, smallest_error: f64) -> Result<()> {
        let bound = CERTIFICATE_FACTOR * smallest_error;
        if self.certificate <= bound {
            Ok(())
        } else {
            Err(Error::ReferenceNotConverged {
                certificate: self.certificate,
                bound,
            })
        }
    }
}

/// Strang evolution at `Δt_ref = cfg.dt / 2^refinement` (with the B-flow
/// substep cap tightened by the same factor), certified against the run at
/// `2Δt_ref`. `cfg.dt` is the smallest step of the study.
pub fn reference_solution(
    u0: &SpectralField,
    cfg: &SplitConfig,
    refinement: u32,
) -> Result<ReferenceSolution> {
    if refinement < 4 {
        return Err(Error::InvalidParameter(format!(
            "reference refinement must be >= 4, got {refinement}"
        )));
    }
    cfg.validate()?;
    let factor = 2f64.powi(refinement as i32);
    let dt_ref = cfg.dt / factor;
    let bflow = BFlowControl {
        substep_cap: cfg.bflow.substep_cap / factor,
        max_substeps: cfg.bflow.max_substeps.saturating_mul(factor as usize),
        blowup: cfg.bflow.resolved_for(u0)?.blowup,
        ..cfg.bflow
    };
    let fine = SplitConfig {
        method: Method::Strang,
        dt: dt_ref,
        bflow,
        ..cfg.clone()
    };
    let coarse = SplitConfig {
        dt: 2.0 * dt_ref,
        ..fine.clone()
    };
    let (fine_u, coarse_u) = rayon::join(|| evolve_final(u0, &fine), || evolve_final(u0, &coarse));
    let field = fine_u?;
    let coarse = coarse_u?;
    let certificate = field.sub(&coarse).l2_norm();
    Ok(ReferenceSolution {
        field,
        coarse,
        dt_ref,
        refinement,
        certificate,
    })
}
