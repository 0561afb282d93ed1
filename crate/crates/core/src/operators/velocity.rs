//! Velocity operators `v(u)`, all realized as vector Fourier multipliers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField, SpectralField};

/// Interaction potential for the aggregation velocity `∇Φ ⋆ u`.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `Φ = 1 − e^{−|x|}`.
    ExpAbs,
    /// `Φ = 1 − e^{−|x|²}`.
    Gaussian,
    /// Periodic samples of `Φ` at the grid points, origin at index 0.
    Sampled(RealField),
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::ExpAbs => "exp",
            Kernel::Gaussian => "gaussian",
            Kernel::Sampled(_) => "sampled",
        }
    }

    fn radial(&self, r: f64) -> f64 {
        match self {
            Kernel::ExpAbs => 1.0 - (-r).exp(),
            Kernel::Gaussian => 1.0 - (-r * r).exp(),
            Kernel::Sampled(_) => unreachable!("sampled kernels are not radial"),
        }
    }
}

/// User-supplied multiplier table: `v_j(u)^(k) = m_j(k) û(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomMultiplier {
    grid: GridSpec,
    components: Vec<Vec<Complex64>>,
}

impl CustomMultiplier {
    pub fn new(grid: GridSpec, components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.len() != grid.dims() {
            return Err(Error::DimensionMismatch(format!(
                "custom multiplier needs {} components, got {}",
                grid.dims(),
                components.len()
            )));
        }
        for c in &components {
            if c.len() != grid.total() {
                return Err(Error::DimensionMismatch(format!(
                    "custom multiplier component has {} entries, grid has {}",
                    c.len(),
                    grid.total()
                )));
            }
            if c.iter().any(|m| !m.re.is_finite() || !m.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { grid, components })
    }
}

/// Velocity operator description.
#[derive(Debug, Clone, PartialEq)]
pub enum VSpec {
    /// `v(u) = a u`, one dimension only.
    Burgers { a: f64 },
    /// `v(u) = curl (−Δ)^{−β/2} u`, two dimensions only.
    Sqg { beta: f64 },
    /// `v(u) = ∇Φ ⋆ u`, two or three dimensions.
    Convolution(Kernel),
    Custom(CustomMultiplier),
}

impl VSpec {
    pub fn describe(&self) -> String {
        match self {
            VSpec::Burgers { a } => format!("burgers(a={a})"),
            VSpec::Sqg { beta } => format!("sqg(beta={beta})"),
            VSpec::Convolution(k) => format!(
                "convolution(kernel={}, periodized by grid sampling about the domain midpoint)",
                k.name()
            ),
            VSpec::Custom(_) => "custom multiplier".into(),
        }
    }

    /// Tabulates the multiplier on `grid`.
    pub fn bind(&self, grid: &GridSpec) -> Result<VelocityOperator> {
        let components = match self {
            VSpec::Burgers { a } => {
                if grid.dims() != 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "Burgers velocity requires dims = 1, grid has dims = {}",
                        grid.dims()
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidParameter("Burgers coefficient must be finite".into()));
                }
                vec![vec![Complex64::new(*a, 0.0); grid.total()]]
            }
            VSpec::Sqg { beta } => {
                if grid.dims() != 2 {
                    return Err(Error::DimensionMismatch(format!(
                        "SQG velocity requires dims = 2, grid has dims = {}",
                        grid.dims()
                    )));
                }
                if !(1.0..=2.0).contains(beta) {
                    return Err(Error::InvalidParameter(format!(
                        "SQG beta must lie in [1, 2], got {beta}"
                    )));
                }
                sqg_tables(grid, *beta)
            }
            VSpec::Convolution(kernel) => {
                if grid.dims() < 2 {
                    return Err(Error::DimensionMismatch(
                        "aggregation velocity requires dims >= 2".into(),
                    ));
                }
                convolution_tables(grid, kernel)?
            }
            VSpec::Custom(custom) => {
                if custom.grid != *grid {
                    return Err(Error::DimensionMismatch(
                        "custom multiplier was tabulated on a different grid".into(),
                    ));
                }
                custom.components.clone()
            }
        };
        Ok(VelocityOperator {
            grid: *grid,
            components,
        })
    }
}

/// `m(k) = (−i k₂, i k₁) |k|^{−β}`, `m(0) = 0`.
fn sqg_tables(grid: &GridSpec, beta: f64) -> Vec<Vec<Complex64>> {
    let mut m1 = vec![Complex64::default(); grid.total()];
    let mut m2 = vec![Complex64::default(); grid.total()];
    for f in 0..grid.total() {
        let k = grid.wavevector(f);
        if k[0] == 0 && k[1] == 0 {
            continue;
        }
        if k[0] == grid.nyquist() || k[1] == grid.nyquist() {
            continue;
        }
        let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        let inv = k2.powf(-beta / 2.0);
        m1[f] = Complex64::new(0.0, -(k[1] as f64) * inv);
        m2[f] = Complex64::new(0.0, (k[0] as f64) * inv);
    }
    vec![m1, m2]
}

/// `m_j(k) = i k_j Φ̂(k)` with `Φ̂` the torus-convolution symbol of the
/// periodized kernel.
fn convolution_tables(grid: &GridSpec, kernel: &Kernel) -> Result<Vec<Vec<Complex64>>> {
    let volume = grid.volume();
    let phi_hat: Vec<Complex64> = match kernel {
        Kernel::Sampled(samples) => {
            if samples.grid() != *grid {
                return Err(Error::DimensionMismatch(
                    "kernel samples live on a different grid".into(),
                ));
            }
            samples.forward()?.coeffs().iter().map(|c| c * volume).collect()
        }
        radial => {
            // samples Φ(x − π) centred on the domain midpoint, then shifts the
            // centre back to the origin with the phase e^{ik·π} = (−1)^{Σk}
            let centred = RealField::from_fn(*grid, |x| {
                let r2: f64 = x.iter().map(|xi| (xi - PI).powi(2)).sum();
                radial.radial(r2.sqrt())
            })?;
            let spectrum = centred.forward()?;
            spectrum
                .coeffs()
                .iter()
                .enumerate()
                .map(|(f, c)| {
                    let parity: i64 = grid.wavevector(f).iter().sum();
                    let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    c * (sign * volume)
                })
                .collect()
        }
    };
    let mut tables = vec![vec![Complex64::default(); grid.total()]; grid.dims()];
    for f in 0..grid.total() {
        let k = grid.wavevector(f);
        for (axis, table) in tables.iter_mut().enumerate() {
            if k[axis] == grid.nyquist() {
                continue;
            }
            table[f] = Complex64::new(0.0, k[axis] as f64) * phi_hat[f];
        }
    }
    Ok(tables)
}

/// A velocity operator tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityOperator {
    grid: GridSpec,
    components: Vec<Vec<Complex64>>,
}

impl VelocityOperator {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    /// True when every multiplier entry is zero, i.e. `v ≡ 0`.
    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.iter().all(|m| m.norm() == 0.0))
    }

    pub fn apply(&self, u: &SpectralField) -> Result<Vec<SpectralField>> {
        if u.grid() != self.grid {
            return Err(Error::DimensionMismatch("field and velocity grids differ".into()));
        }
        Ok(self.components.iter().map(|m| u.multiplied(m)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqg_multiplier_is_divergence_free() {
        let g = GridSpec::new(2, 16).unwrap();
        for beta in [1.0, 1.5, 2.0] {
            let op = VSpec::Sqg { beta }.bind(&g).unwrap();
            for f in 0..g.total() {
                let k = g.wavevector(f);
                let div = op.components[0][f] * k[0] as f64 + op.components[1][f] * k[1] as f64;
                let scale = op.components[0][f].norm() + op.components[1][f].norm();
                assert!(div.norm() <= 1e-15 * scale * (k[0].abs() + k[1].abs()) as f64);
            }
            assert_eq!(op.components[0][0], Complex64::default());
        }
    }

    #[test]
    fn dimension_rules() {
        let g1 = GridSpec::new(1, 16).unwrap();
        let g2 = GridSpec::new(2, 16).unwrap();
        assert!(VSpec::Sqg { beta: 2.0 }.bind(&g1).is_err());
        assert!(VSpec::Burgers { a: 1.0 }.bind(&g2).is_err());
        assert!(VSpec::Convolution(Kernel::Gaussian).bind(&g1).is_err());
        assert!(VSpec::Sqg { beta: 0.5 }.bind(&g2).is_err());
        assert!(CustomMultiplier::new(g2, vec![vec![Complex64::default(); 256]]).is_err());
    }

    #[test]
    fn named_kernel_matches_origin_sampled_kernel() {
        // Φ sampled at the wrapped distance from the origin must give the same symbol
        let g = GridSpec::new(2, 16).unwrap();
        let wrapped = RealField::from_fn(g, |x| {
            let r2: f64 = x
                .iter()
                .map(|&xi| if xi >= PI { xi - 2.0 * PI } else { xi })
                .map(|xi| xi * xi)
                .sum();
            1.0 - (-r2).exp()
        })
        .unwrap();
        let a = VSpec::Convolution(Kernel::Gaussian).bind(&g).unwrap();
        let b = VSpec::Convolution(Kernel::Sampled(wrapped)).bind(&g).unwrap();
        for (ca, cb) in a.components.iter().zip(&b.components) {
            for (x, y) in ca.iter().zip(cb) {
                assert!((x - y).norm() < 1e-12);
            }
        }
        assert_eq!(a.components[0][0], Complex64::default());
    }

    #[test]
    fn custom_multiplier_binds_on_its_grid_only() {
        let g = GridSpec::new(2, 8).unwrap();
        let table = vec![vec![Complex64::new(0.5, 0.0); 64]; 2];
        let v = VSpec::Custom(CustomMultiplier::new(g, table).unwrap());
        assert!(v.bind(&g).is_ok());
        assert!(v.bind(&GridSpec::new(2, 16).unwrap()).is_err());
    }
}
