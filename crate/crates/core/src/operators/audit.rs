//! Sampled audit of the admissibility conditions on `(A, v)`.
//!
//! Every check is evaluated on random band-limited fields. The quantities are
//! sample statistics, so a passing audit is a sanity check rather than a
//! proof: commutativity and the sign condition are exact for multipliers and
//! hold to roundoff, while the commutator-estimate constant is only required
//! to come out finite.

use serde::Serialize;

use super::{divergence, ASpec, Classification, VSpec};
use crate::error::{Error, Result};
use crate::grid::{random_band_limited_spectrum, GridSpec, SpectralField};

/// Tolerance for the commutativity residual.
pub const COMMUTATIVITY_TOL: f64 = 1e-12;
/// Tolerance for `∫A(u)u dx / ‖u‖²_{L²}`.
pub const SIGN_TOL: f64 = 1e-12;
/// Sobolev index `k` used for the commutator estimate.
pub const COMMUTATOR_INDEX: f64 = 3.0;
/// Spectral decay of the sampled fields.
const SAMPLE_DECAY: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub a: String,
    pub v: String,
    pub dims: usize,
    pub n: usize,
    pub trials: usize,
    pub classification: Classification,
    /// `max_i ‖A(v_i(u)) − v_i(A(u))‖_{L²} / ‖u‖_{L²}`.
    pub commutativity_residual: f64,
    /// `max ‖div v(u)‖_{L²} / ‖u‖_{L²}`.
    pub divergence_ratio: f64,
    /// `max ∫A(u)u dx / ‖u‖²_{L²}`, by grid quadrature.
    pub energy_ratio: f64,
    /// Sample constant of `‖A(fg) − fA(g) − gA(f)‖_{H^k} ≤ C ‖f‖_{H^{k+m−1}} ‖g‖_{H^{k+m−1}}`.
    pub commutator_constant: f64,
    pub commutator_index: f64,
    /// `m = max{α, 2}` with `α` the order of `A`.
    pub commutator_shift: f64,
    /// Some sample had a vanishing denominator or `A = 0`.
    pub degenerate: bool,
    pub passed: bool,
    pub diagnosis: Vec<String>,
}

/// Runs the audit over `trials` random field pairs drawn from `seed`.
pub fn check_admissibility(
    a: &ASpec,
    v: &VSpec,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
) -> Result<AdmissibilityReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("admissibility audit needs trials >= 1".into()));
    }
    let mut pairs = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let base = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * t);
        let f = random_band_limited_spectrum(*grid, base, SAMPLE_DECAY, false)?;
        let g = random_band_limited_spectrum(*grid, base + 1, SAMPLE_DECAY, false)?;
        pairs.push((f, g));
    }
    audit_fields(a, v, grid, &pairs)
}

fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        *degenerate = true;
        0.0
    }
}

/// Runs the audit on explicit `(f, g)` pairs; the first member of each pair
/// also drives the single-field checks.
pub fn audit_fields(
    a: &ASpec,
    v: &VSpec,
    grid: &GridSpec,
    pairs: &[(SpectralField, SpectralField)],
) -> Result<AdmissibilityReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("admissibility audit needs trials >= 1".into()));
    }
    let sigma = a.symbol_table(grid)?;
    let vel = v.bind(grid)?;
    let shift = a.order().max(2.0);
    let high = COMMUTATOR_INDEX + shift - 1.0;

    let mut degenerate = a.is_zero();
    let mut commutativity: f64 = 0.0;
    let mut div_ratio: f64 = 0.0;
    let mut energy = f64::NEG_INFINITY;
    let mut constant: f64 = 0.0;
    let mut diagnosis = Vec::new();

    for (f, g) in pairs {
        if f.grid() != *grid || g.grid() != *grid {
            return Err(Error::DimensionMismatch("audit field on a different grid".into()));
        }
        let norm = f.l2_norm();

        let af = f.multiplied(&sigma);
        let v_of_af = vel.apply(&af)?;
        for (vi, vi_af) in vel.apply(f)?.iter().zip(&v_of_af) {
            let r = vi.multiplied(&sigma).sub(vi_af).l2_norm();
            commutativity = commutativity.max(ratio(r, norm, &mut degenerate));
        }

        let div = divergence(&vel.apply(f)?)?.l2_norm();
        div_ratio = div_ratio.max(ratio(div, norm, &mut degenerate));

        // ∫A(u)u dx by grid quadrature, independent of the spectral symbol sum
        let au = af.inverse()?;
        let u = f.inverse()?;
        let w = grid.spacing().powi(grid.dims() as i32);
        let integral: f64 = w * au.values().iter().zip(u.values()).map(|(x, y)| x * y).sum::<f64>();
        energy = energy.max(ratio(integral, norm * norm, &mut degenerate));

        let fg = f.dealiased_product(g);
        let defect = fg
            .multiplied(&sigma)
            .sub(&f.dealiased_product(&g.multiplied(&sigma)))
            .sub(&g.dealiased_product(&af));
        let num = defect.sobolev_norm(COMMUTATOR_INDEX)?;
        let den = f.sobolev_norm(high)? * g.sobolev_norm(high)?;
        constant = constant.max(ratio(num, den, &mut degenerate));
    }

    let grid_violation = sigma.iter().enumerate().find(|(_, s)| {
        s.re > SIGN_TOL * s.norm().max(1.0)
    });
    let classification = a.classification();
    if classification == Classification::Rejected {
        diagnosis.push(format!(
            "A amplifies: Re σ(k) > 0 at sampled k = {:?}",
            a.violation().unwrap_or_default()
        ));
    } else if let Some((f, s)) = grid_violation {
        diagnosis.push(format!(
            "A amplifies on this grid: Re σ = {:e} at k = {:?}",
            s.re,
            grid.wavevector(f)
        ));
    }
    if commutativity > COMMUTATIVITY_TOL {
        diagnosis.push(format!(
            "commutativity residual {commutativity:e} exceeds {COMMUTATIVITY_TOL:e}"
        ));
    }
    if energy > SIGN_TOL {
        diagnosis.push(format!(
            "∫A(u)u dx / ‖u‖² = {energy:e} is positive: A is neither conservative nor diffusive"
        ));
    }
    if !constant.is_finite() {
        diagnosis.push("commutator estimate constant is not finite".into());
    }
    if degenerate {
        log::warn!("admissibility audit saw degenerate input (A = 0 or a zero field)");
    }

    Ok(AdmissibilityReport {
        a: a.describe(),
        v: v.describe(),
        dims: grid.dims(),
        n: grid.n(),
        trials: pairs.len(),
        classification,
        commutativity_residual: commutativity,
        divergence_ratio: div_ratio,
        energy_ratio: energy,
        commutator_constant: constant,
        commutator_index: COMMUTATOR_INDEX,
        commutator_shift: shift,
        degenerate,
        passed: diagnosis.is_empty(),
        diagnosis,
    })
}
