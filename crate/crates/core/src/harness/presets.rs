//! The shipped equation presets.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::MultiIndex;
use crate::operators::{ASpec, ATerm, Kernel, TermKind, VSpec};

/// Named interaction kernel of the aggregation preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Gaussian,
    Exp,
}

impl KernelChoice {
    pub fn kernel(self) -> Kernel {
        match self {
            KernelChoice::Gaussian => Kernel::Gaussian,
            KernelChoice::Exp => Kernel::ExpAbs,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian" => Some(KernelChoice::Gaussian),
            "exp" | "exp_abs" => Some(KernelChoice::Exp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `u_t + (u²)_x = u_xxx`.
    Kdv,
    /// `A = −(−∂_x²)^{α/2}`, Burgers velocity.
    ViscousBurgers { alpha: f64 },
    /// `A = −∂_x³ + ∂_x⁵`, Burgers velocity.
    Kawahara,
    /// `A = −(−Δ)^{α/2}`, `v = curl (−Δ)^{−β/2} u`.
    Sqg { alpha: f64, beta: f64 },
    /// `A = −(−Δ)^{α/2}`, `v = ∇Φ ⋆ u`.
    Aggregation { alpha: f64, kernel: KernelChoice },
}

pub const PRESET_IDS: [&str; 5] = ["kdv", "viscous_burgers", "kawahara", "sqg", "aggregation"];

impl Preset {
    pub fn id(&self) -> &'static str {
        match self {
            Preset::Kdv => "kdv",
            Preset::ViscousBurgers { .. } => "viscous_burgers",
            Preset::Kawahara => "kawahara",
            Preset::Sqg { .. } => "sqg",
            Preset::Aggregation { .. } => "aggregation",
        }
    }

    /// Every preset at its default parameters.
    pub fn shipped() -> Vec<Preset> {
        vec![
            Preset::Kdv,
            Preset::ViscousBurgers { alpha: 2.0 },
            Preset::Kawahara,
            Preset::Sqg { alpha: 2.0, beta: 2.0 },
            Preset::Aggregation {
                alpha: 2.0,
                kernel: KernelChoice::Gaussian,
            },
        ]
    }

    pub fn default_dims(&self) -> usize {
        match self {
            Preset::Kdv | Preset::ViscousBurgers { .. } | Preset::Kawahara => 1,
            Preset::Sqg { .. } | Preset::Aggregation { .. } => 2,
        }
    }

    /// `Ok` when the preset can live in `dims` dimensions.
    pub fn check_dims(&self, dims: usize) -> std::result::Result<(), String> {
        let ok = match self {
            Preset::Kdv | Preset::ViscousBurgers { .. } | Preset::Kawahara => dims == 1,
            Preset::Sqg { .. } => dims == 2,
            Preset::Aggregation { .. } => dims == 2 || dims == 3,
        };
        if ok {
            return Ok(());
        }
        Err(match self {
            Preset::Sqg { .. } => format!("preset sqg requires dims = 2, got {dims}"),
            Preset::Aggregation { .. } => format!("preset aggregation requires dims = 2 or 3, got {dims}"),
            other => format!("preset {} requires dims = 1 (Burgers velocity), got {dims}", other.id()),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |name: &str, x: f64, lo: f64, lo_open: bool| {
            let above = if lo_open { x > lo } else { x >= lo };
            if above && x <= 2.0 {
                Ok(())
            } else {
                let open = if lo_open { "(" } else { "[" };
                Err(Error::InvalidParameter(format!(
                    "{} {name} must lie in {open}{lo}, 2], got {x}",
                    self.id()
                )))
            }
        };
        match *self {
            Preset::Kdv | Preset::Kawahara => Ok(()),
            Preset::ViscousBurgers { alpha } => in_range("alpha", alpha, 1.0, false),
            Preset::Sqg { alpha, beta } => {
                in_range("alpha", alpha, 1.0, false)?;
                in_range("beta", beta, 1.0, false)
            }
            Preset::Aggregation { alpha, .. } => in_range("alpha", alpha, 1.0, true),
        }
    }

    pub fn a_spec(&self) -> Result<ASpec> {
        self.validate()?;
        match *self {
            Preset::Kdv => ASpec::derivative(1.0, MultiIndex::axis(1, 0, 3)),
            Preset::Kawahara => ASpec::new(vec![
                ATerm::new(-1.0, TermKind::Derivative(MultiIndex::axis(1, 0, 3))),
                ATerm::new(1.0, TermKind::Derivative(MultiIndex::axis(1, 0, 5))),
            ]),
            Preset::ViscousBurgers { alpha }
            | Preset::Sqg { alpha, .. }
            | Preset::Aggregation { alpha, .. } => ASpec::fractional_diffusion(alpha),
        }
    }

    pub fn v_spec(&self) -> VSpec {
        match *self {
            Preset::Kdv | Preset::ViscousBurgers { .. } | Preset::Kawahara => VSpec::Burgers { a: 1.0 },
            Preset::Sqg { beta, .. } => VSpec::Sqg { beta },
            Preset::Aggregation { kernel, .. } => VSpec::Convolution(kernel.kernel()),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Kdv | Preset::Kawahara => write!(f, "{}", self.id()),
            Preset::ViscousBurgers { alpha } => write!(f, "viscous_burgers(alpha={alpha})"),
            Preset::Sqg { alpha, beta } => write!(f, "sqg(alpha={alpha}, beta={beta})"),
            Preset::Aggregation { alpha, kernel } => {
                write!(f, "aggregation(alpha={alpha}, kernel={})", kernel.kernel().name())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::operators::Classification;
    use num_complex::Complex64;

    #[test]
    fn preset_symbols() {
        let g = GridSpec::new(1, 16).unwrap();
        let kdv = Preset::Kdv.a_spec().unwrap();
        assert_eq!(kdv.symbol(&g, [2, 0, 0]), Complex64::new(0.0, -8.0));
        let kaw = Preset::Kawahara.a_spec().unwrap();
        // −(ik)³ + (ik)⁵ = i k³ + i k⁵
        assert_eq!(kaw.symbol(&g, [2, 0, 0]), Complex64::new(0.0, 8.0 + 32.0));
        assert_eq!(kaw.classification(), Classification::Dispersive);
        let vb = Preset::ViscousBurgers { alpha: 2.0 }.a_spec().unwrap();
        assert_eq!(vb.symbol(&g, [3, 0, 0]), Complex64::new(-9.0, 0.0));
    }

    #[test]
    fn parameter_windows() {
        assert!(Preset::ViscousBurgers { alpha: 0.5 }.validate().is_err());
        assert!(Preset::Sqg { alpha: 2.0, beta: 2.5 }.validate().is_err());
        assert!(Preset::Aggregation { alpha: 1.0, kernel: KernelChoice::Exp }.validate().is_err());
        assert!(Preset::Aggregation { alpha: 1.5, kernel: KernelChoice::Exp }.validate().is_ok());
        for p in Preset::shipped() {
            p.validate().unwrap();
            p.check_dims(p.default_dims()).unwrap();
        }
        assert!(Preset::Sqg { alpha: 2.0, beta: 2.0 }.check_dims(1).is_err());
        assert!(Preset::Kdv.check_dims(2).is_err());
    }
}
