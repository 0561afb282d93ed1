//! Periodic grids on the torus `[0, 2π)^dims`, scalar fields in physical and
//! Fourier representation, and the spectral primitives built on them.
//!
//! Fourier coefficients use the normalized convention
//! `û(k) = N_total⁻¹ Σ_x u(x) e^{−ik·x}`, so that `u(x) = Σ_k û(k) e^{ik·x}`
//! and a single mode `sin x` has `û(±1) = ∓i/2`.

mod fft;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use fft::fft_nd;

/// Uniform periodic grid with the same power-of-two resolution in every
/// dimension. The domain length is `2π` per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dims: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(dims: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dims) {
            return Err(Error::InvalidGrid(format!("dims must be 1, 2 or 3, got {dims}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per dimension must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { dims, n })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Points per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    /// Domain volume `(2π)^dims`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dims as i32)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Signed wavenumber of FFT index `i`, in `−n/2 … n/2 − 1`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Largest retained wavenumber magnitude under the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        self.n as i64 / 3
    }

    /// The unpaired Nyquist wavenumber `−n/2`.
    pub fn nyquist(&self) -> i64 {
        -(self.n as i64) / 2
    }

    /// Per-axis indices of a flat row-major offset (axis 0 slowest).
    pub fn indices(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dims).rev() {
            idx[axis] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    /// Wavevector at a flat offset; unused axes are zero.
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let idx = self.indices(flat);
        let mut k = [0i64; 3];
        for axis in 0..self.dims {
            k[axis] = self.wavenumber(idx[axis]);
        }
        k
    }

    /// Flat offset of wavevector `k`, if representable on this grid.
    pub fn offset_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let mut flat = 0usize;
        for (axis, &kj) in k.iter().enumerate() {
            if axis >= self.dims {
                if kj != 0 {
                    return None;
                }
                continue;
            }
            if kj < -n / 2 || kj >= n / 2 {
                return None;
            }
            flat = flat * self.n + kj.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    /// Physical coordinates of a flat offset.
    pub fn coordinates(&self, flat: usize) -> [f64; 3] {
        let idx = self.indices(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dims {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// Squared wavevector magnitudes, one per flat offset.
    pub fn k_squared(&self) -> Vec<f64> {
        (0..self.total())
            .map(|f| self.wavevector(f).iter().map(|&k| (k * k) as f64).sum())
            .collect()
    }
}

/// Derivative multi-index `l = (l_1, …, l_dims)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(orders: Vec<u32>) -> Self {
        Self(orders)
    }

    /// Zeroth-order index in `dims` dimensions.
    pub fn zero(dims: usize) -> Self {
        Self(vec![0; dims])
    }

    /// `∂^order` along a single axis.
    pub fn axis(dims: usize, axis: usize, order: u32) -> Self {
        let mut l = vec![0; dims];
        l[axis] = order;
        Self(l)
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    /// Total order `|l|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Fourier symbol `Π_j (i k_j)^{l_j}`, with the Nyquist mode zeroed along
    /// any axis differentiated an odd number of times.
    pub fn symbol(&self, grid: &GridSpec, k: [i64; 3]) -> Complex64 {
        let mut real = 1.0;
        for (axis, &lj) in self.0.iter().enumerate() {
            if lj == 0 {
                continue;
            }
            if lj % 2 == 1 && k[axis] == grid.nyquist() {
                return Complex64::new(0.0, 0.0);
            }
            real *= (k[axis] as f64).powi(lj as i32);
        }
        i_pow(self.order()) * real
    }
}

/// `i^p`, exact.
pub(crate) fn i_pow(p: u32) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Scalar field sampled at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values, got {}",
                grid.total(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` at every grid point; `x` has length `dims`.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.total())
            .map(|i| f(&grid.coordinates(i)[..grid.dims()]))
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.total()])
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Grid-quadrature L² norm `((2π/n)^dims Σ u²)^{1/2}`.
    pub fn l2_quadrature(&self) -> f64 {
        let w = self.grid.spacing().powi(self.grid.dims as i32);
        (w * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Grid-quadrature integral `∫ u dx`.
    pub fn integral(&self) -> f64 {
        let w = self.grid.spacing().powi(self.grid.dims as i32);
        w * self.values.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Forward transform to Fourier coefficients.
    pub fn forward(&self) -> Result<SpectralField> {
        forward(self)
    }
}

/// Fourier coefficients indexed by wavevector in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.total() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                grid.total(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.total()],
        }
    }

    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.total());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of wavevector `k`, zero if not representable.
    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.grid
            .offset_of(k)
            .map(|f| self.coeffs[f])
            .unwrap_or_default()
    }

    /// The mean mode `û(0)`.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Total mass `∫ u dx = (2π)^dims û(0)`.
    pub fn mass(&self) -> f64 {
        self.grid.volume() * self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn inverse(&self) -> Result<RealField> {
        inverse(self)
    }

    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        sobolev_norm(self, s)
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_weighted(|_| 1.0)
    }

    pub(crate) fn sobolev_weighted(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (f, c) in self.coeffs.iter().enumerate() {
            let k2: f64 = self
                .grid
                .wavevector(f)
                .iter()
                .map(|&k| (k * k) as f64)
                .sum();
            acc += weight(k2) * c.norm_sqr();
        }
        (self.grid.volume() * acc).sqrt()
    }

    /// Largest deviation from conjugate symmetry `û(−k) = conj(û(k))` over
    /// the paired modes.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (f, c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavevector(f);
            if let Some(g) = self.grid.offset_of([-k[0], -k[1], -k[2]]) {
                worst = worst.max((self.coeffs[g] - c.conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        Self::from_raw(self.grid, self.coeffs.iter().map(|c| c * a).collect())
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> SpectralField {
        debug_assert_eq!(self.grid, other.grid);
        Self::from_raw(
            self.grid,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + y * a)
                .collect(),
        )
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.axpy(1.0, other)
    }

    /// Pointwise product with another field, formed in physical space with
    /// both factors and the result dealiased.
    pub fn dealiased_product(&self, other: &SpectralField) -> SpectralField {
        let mut a = dealias(self).coeffs;
        let mut b = dealias(other).coeffs;
        fft_nd(self.grid, &mut a, FftDirection::Inverse);
        fft_nd(self.grid, &mut b, FftDirection::Inverse);
        let mut prod: Vec<Complex64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| Complex64::new(x.re * y.re, 0.0))
            .collect();
        fft_nd(self.grid, &mut prod, FftDirection::Forward);
        let scale = 1.0 / self.grid.total() as f64;
        prod.iter_mut().for_each(|c| *c *= scale);
        dealias_in_place(self.grid, &mut prod);
        Self::from_raw(self.grid, prod)
    }

    /// Mode-wise product with a multiplier table.
    pub(crate) fn multiplied(&self, symbol: &[Complex64]) -> SpectralField {
        Self::from_raw(
            self.grid,
            self.coeffs.iter().zip(symbol).map(|(c, m)| c * m).collect(),
        )
    }
}

/// Forward transform `û(k) = N_total⁻¹ Σ_x u(x) e^{−ik·x}`.
pub fn forward(field: &RealField) -> Result<SpectralField> {
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let grid = field.grid;
    let mut data: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(grid, &mut data, FftDirection::Forward);
    let scale = 1.0 / grid.total() as f64;
    data.iter_mut().for_each(|c| *c *= scale);
    Ok(SpectralField::from_raw(grid, data))
}

/// Inverse transform `u(x) = Σ_k û(k) e^{ik·x}`; the imaginary residue of a
/// conjugate-symmetric field is discarded.
pub fn inverse(field: &SpectralField) -> Result<RealField> {
    if !field.is_finite() {
        return Err(Error::NonFinite);
    }
    let values = physical_values(field);
    Ok(RealField {
        grid: field.grid,
        values,
    })
}

pub(crate) fn physical_values(field: &SpectralField) -> Vec<f64> {
    let mut data = field.coeffs.clone();
    fft_nd(field.grid, &mut data, FftDirection::Inverse);
    data.into_iter().map(|c| c.re).collect()
}

/// Direction selector for [`transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A field in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Real(RealField),
    Spectral(SpectralField),
}

/// Transforms `field` in `direction`. Passing a field already in the target
/// representation is a dimension error.
pub fn transform(field: &Field, direction: Direction) -> Result<Field> {
    match (field, direction) {
        (Field::Real(u), Direction::Forward) => forward(u).map(Field::Spectral),
        (Field::Spectral(u), Direction::Inverse) => inverse(u).map(Field::Real),
        _ => Err(Error::DimensionMismatch(
            "field is already in the requested representation".into(),
        )),
    }
}

/// `D^l u`: coefficients multiplied by `Π_j (i k_j)^{l_j}`.
pub fn spectral_derivative(field: &SpectralField, l: &MultiIndex) -> Result<SpectralField> {
    let grid = field.grid;
    if l.dims() != grid.dims() {
        return Err(Error::DimensionMismatch(format!(
            "multi-index has {} entries on a {}-d grid",
            l.dims(),
            grid.dims()
        )));
    }
    if l.order() == 0 {
        return Ok(field.clone());
    }
    let coeffs = field
        .coeffs
        .iter()
        .enumerate()
        .map(|(f, c)| c * l.symbol(&grid, grid.wavevector(f)))
        .collect();
    Ok(SpectralField::from_raw(grid, coeffs))
}

/// Two-thirds rule: zero every mode with some `|k_j| > n/3`.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    dealias_in_place(field.grid, &mut out.coeffs);
    out
}

pub(crate) fn dealias_in_place(grid: GridSpec, coeffs: &mut [Complex64]) {
    let cutoff = grid.dealias_cutoff();
    for (f, c) in coeffs.iter_mut().enumerate() {
        if grid.wavevector(f).iter().any(|k| k.abs() > cutoff) {
            *c = Complex64::default();
        }
    }
}

/// `‖u‖_{H^s} = ((2π)^dims Σ_k (1+|k|²)^s |û(k)|²)^{1/2}`.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Sobolev index must be finite and >= 0, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(field.l2_norm());
    }
    Ok(field.sobolev_weighted(|k2| (1.0 + k2).powf(s)))
}

/// Deterministic real test field: modes with `|k| ≤ n/4` get magnitude
/// `(1+|k|²)^{−decay/2}` and a uniformly random phase, paired so that the
/// field is real. Everything above the band is exactly zero.
pub fn random_band_limited_field(
    grid: GridSpec,
    seed: u64,
    decay: f64,
    zero_mean: bool,
) -> Result<RealField> {
    Ok(random_band_limited_spectrum(grid, seed, decay, zero_mean)?.inverse()?)
}

pub(crate) fn random_band_limited_spectrum(
    grid: GridSpec,
    seed: u64,
    decay: f64,
    zero_mean: bool,
) -> Result<SpectralField> {
    if !(decay > 0.0) || !decay.is_finite() {
        return Err(Error::InvalidParameter(format!("decay must be > 0, got {decay}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = (grid.n() / 4) as f64;
    let mut coeffs = vec![Complex64::default(); grid.total()];
    for f in 0..grid.total() {
        let k = grid.wavevector(f);
        let k2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
        if k2 > band * band {
            continue;
        }
        let magnitude = (1.0 + k2).powf(-decay / 2.0);
        // first nonzero component decides which half of each ±k pair draws
        match k.iter().find(|&&x| x != 0) {
            None => {
                if !zero_mean {
                    coeffs[f] = Complex64::new(magnitude, 0.0);
                }
            }
            Some(&lead) if lead > 0 => {
                let phase = rng.gen_range(0.0..2.0 * PI);
                let c = Complex64::from_polar(magnitude, phase);
                coeffs[f] = c;
                let g = grid
                    .offset_of([-k[0], -k[1], -k[2]])
                    .expect("band-limited modes have partners");
                coeffs[g] = c.conj();
            }
            Some(_) => {}
        }
    }
    Ok(SpectralField::from_raw(grid, coeffs))
}
