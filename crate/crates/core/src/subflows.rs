//! The two sub-flows composed by the splitting schemes: the exact linear
//! propagator `Φ_A` of `u_t = A(u)` and the pseudo-spectral RK4 integrator
//! `Φ_B` of the transport equation `u_t + div(u v(u)) = 0`.

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dealias_in_place, fft_nd, GridSpec, SpectralField};
use crate::operators::{ASpec, Classification, VSpec, VelocityOperator};

/// Level at which the blow-up guard trips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlowupThreshold {
    /// Multiple of the guard norm of the initial data.
    RelativeToInitial(f64),
    Absolute(f64),
}

/// Substep and guard controls for `Φ_B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BFlowControl {
    /// CFL-like safety factor `c` in `τ_max = c / (max|v| k_max)`.
    pub substep_cap: f64,
    pub max_substeps: usize,
    pub blowup: BlowupThreshold,
    /// Sobolev index of the guard norm.
    pub guard_index: f64,
}

impl Default for BFlowControl {
    fn default() -> Self {
        Self {
            substep_cap: 0.5,
            max_substeps: 100_000,
            blowup: BlowupThreshold::RelativeToInitial(100.0),
            guard_index: 4.0,
        }
    }
}

impl BFlowControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.substep_cap > 0.0 && self.substep_cap <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "substep cap must lie in (0, 1], got {}",
                self.substep_cap
            )));
        }
        if self.max_substeps == 0 {
            return Err(Error::InvalidParameter("max_substeps must be >= 1".into()));
        }
        let level = match self.blowup {
            BlowupThreshold::RelativeToInitial(x) | BlowupThreshold::Absolute(x) => x,
        };
        if !(level > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "blow-up threshold must be > 0, got {level}"
            )));
        }
        if !(self.guard_index >= 0.0) || !self.guard_index.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "guard index must be >= 0, got {}",
                self.guard_index
            )));
        }
        Ok(())
    }

    /// Pins a relative threshold to the guard norm of `u0`.
    pub fn resolved_for(&self, u0: &SpectralField) -> Result<BFlowControl> {
        self.validate()?;
        let blowup = match self.blowup {
            BlowupThreshold::RelativeToInitial(factor) => {
                let norm = u0.sobolev_norm(self.guard_index)?;
                // a zero field can never trip a relative guard
                BlowupThreshold::Absolute(if norm > 0.0 { factor * norm } else { f64::INFINITY })
            }
            abs => abs,
        };
        Ok(BFlowControl { blowup, ..*self })
    }

    fn threshold(&self, u0: &SpectralField) -> Result<f64> {
        match self.resolved_for(u0)?.blowup {
            BlowupThreshold::Absolute(x) => Ok(x),
            BlowupThreshold::RelativeToInitial(_) => unreachable!(),
        }
    }
}

/// `Φ_A(t, u0)`: `û(k) ↦ e^{σ(k) t} û(k)`.
pub fn phi_a(t: f64, u0: &SpectralField, a: &ASpec) -> Result<SpectralField> {
    AFlow::new(a, &u0.grid())?.propagate(t, u0)
}

/// `Φ_A` with the symbol tabulated once for a grid.
#[derive(Debug, Clone)]
pub struct AFlow {
    grid: GridSpec,
    sigma: Vec<Complex64>,
    classification: Classification,
}

impl AFlow {
    pub fn new(a: &ASpec, grid: &GridSpec) -> Result<Self> {
        if a.classification() == Classification::Rejected {
            return Err(Error::RejectedOperator(format!(
                "A = {} has a symbol with positive real part",
                a.describe()
            )));
        }
        Ok(Self {
            grid: *grid,
            sigma: a.symbol_table(grid)?,
            classification: a.classification(),
        })
    }

    pub fn propagate(&self, t: f64, u0: &SpectralField) -> Result<SpectralField> {
        if u0.grid() != self.grid {
            return Err(Error::DimensionMismatch("field and A-flow grids differ".into()));
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("A-flow time must be finite, got {t}")));
        }
        if t < 0.0 && self.classification != Classification::Dispersive {
            return Err(Error::NegativeTimeDiffusive(t));
        }
        if t == 0.0 {
            return Ok(u0.clone());
        }
        let coeffs = u0
            .coeffs()
            .iter()
            .zip(&self.sigma)
            .map(|(c, s)| c * (s * t).exp())
            .collect();
        Ok(SpectralField::from_raw(self.grid, coeffs))
    }
}

/// `B(u) = −div(u v(u))`, pseudo-spectrally with dealiased products.
pub fn b_rhs(u: &SpectralField, v: &VSpec) -> Result<SpectralField> {
    Ok(BFlow::new(v, &u.grid())?.rhs(u))
}

/// `Φ_B(t, u0)` with the substep count chosen from `ctrl`.
pub fn phi_b(t: f64, u0: &SpectralField, v: &VSpec, ctrl: &BFlowControl) -> Result<SpectralField> {
    BFlow::new(v, &u0.grid())?.propagate(t, u0, ctrl)
}

/// `Φ_B` with the velocity multiplier tabulated once for a grid.
#[derive(Debug, Clone)]
pub struct BFlow {
    grid: GridSpec,
    velocity: VelocityOperator,
}

impl BFlow {
    pub fn new(v: &VSpec, grid: &GridSpec) -> Result<Self> {
        Ok(Self {
            grid: *grid,
            velocity: v.bind(grid)?,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.velocity.is_zero()
    }

    /// `−div(u v(u))`; the mean mode of the result is exactly zero.
    pub fn rhs(&self, u: &SpectralField) -> SpectralField {
        let grid = self.grid;
        let total = grid.total();
        let scale = 1.0 / total as f64;

        let mut ud = u.coeffs().to_vec();
        dealias_in_place(grid, &mut ud);
        let mut u_phys = ud.clone();
        fft_nd(grid, &mut u_phys, FftDirection::Inverse);

        let mut out = vec![Complex64::default(); total];
        let mut vj = vec![Complex64::default(); total];
        for (axis, m) in self.velocity.components().iter().enumerate() {
            for ((dst, c), mk) in vj.iter_mut().zip(&ud).zip(m) {
                *dst = c * mk;
            }
            fft_nd(grid, &mut vj, FftDirection::Inverse);
            for (p, uu) in vj.iter_mut().zip(&u_phys) {
                *p = Complex64::new(p.re * uu.re * scale, 0.0);
            }
            fft_nd(grid, &mut vj, FftDirection::Forward);
            dealias_in_place(grid, &mut vj);
            for (f, (o, p)) in out.iter_mut().zip(&vj).enumerate() {
                let k = grid.wavevector(f)[axis];
                *o -= Complex64::new(0.0, k as f64) * p;
            }
        }
        out[0] = Complex64::default();
        SpectralField::from_raw(grid, out)
    }

    /// `max_j max_x |v_j(u)(x)|`.
    pub fn max_speed(&self, u: &SpectralField) -> f64 {
        let mut speed: f64 = 0.0;
        for m in self.velocity.components() {
            let mut vj: Vec<Complex64> = u.coeffs().iter().zip(m).map(|(c, mk)| c * mk).collect();
            fft_nd(self.grid, &mut vj, FftDirection::Inverse);
            speed = vj.iter().fold(speed, |s, c| s.max(c.re.abs()));
        }
        speed
    }

    /// Substep count `max(1, ⌈t / τ_max⌉)` for a step of length `t` from `u0`.
    pub fn substeps_for(&self, t: f64, u0: &SpectralField, ctrl: &BFlowControl) -> usize {
        let k_max = (self.grid.n() / 2) as f64;
        let tau_max = ctrl.substep_cap / (self.max_speed(u0) * k_max + f64::EPSILON);
        ((t / tau_max).ceil() as usize).max(1)
    }

    pub fn propagate(&self, t: f64, u0: &SpectralField, ctrl: &BFlowControl) -> Result<SpectralField> {
        ctrl.validate()?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("B-flow time must be finite and >= 0, got {t}")));
        }
        if t == 0.0 || self.is_trivial() {
            return Ok(u0.clone());
        }
        let needed = self.substeps_for(t, u0, ctrl);
        if needed > ctrl.max_substeps {
            return Err(Error::MaxSubsteps {
                needed,
                max: ctrl.max_substeps,
            });
        }
        self.propagate_substeps(t, u0, needed, ctrl)
    }

    /// Classical RK4 with exactly `substeps` equal substeps.
    pub fn propagate_substeps(
        &self,
        t: f64,
        u0: &SpectralField,
        substeps: usize,
        ctrl: &BFlowControl,
    ) -> Result<SpectralField> {
        if u0.grid() != self.grid {
            return Err(Error::DimensionMismatch("field and B-flow grids differ".into()));
        }
        if substeps == 0 {
            return Err(Error::InvalidParameter("substeps must be >= 1".into()));
        }
        let threshold = ctrl.threshold(u0)?;
        let weights: Vec<f64> = self
            .grid
            .k_squared()
            .into_iter()
            .map(|k2| (1.0 + k2).powf(ctrl.guard_index))
            .collect();
        let volume = self.grid.volume();
        let tau = t / substeps as f64;

        let mut u = u0.clone();
        for step in 0..substeps {
            let k1 = self.rhs(&u);
            let k2 = self.rhs(&u.axpy(0.5 * tau, &k1));
            let k3 = self.rhs(&u.axpy(0.5 * tau, &k2));
            let k4 = self.rhs(&u.axpy(tau, &k3));
            let coeffs = u.coeffs_mut();
            for i in 0..coeffs.len() {
                coeffs[i] += (k1.coeffs()[i]
                    + k2.coeffs()[i] * 2.0
                    + k3.coeffs()[i] * 2.0
                    + k4.coeffs()[i])
                    * (tau / 6.0);
            }
            let norm = (volume
                * u.coeffs()
                    .iter()
                    .zip(&weights)
                    .map(|(c, w)| w * c.norm_sqr())
                    .sum::<f64>())
            .sqrt();
            if !(norm <= threshold) {
                return Err(Error::GuardTrip {
                    time: tau * (step + 1) as f64,
                    index: ctrl.guard_index,
                    norm,
                    threshold,
                });
            }
        }
        Ok(u)
    }
}
