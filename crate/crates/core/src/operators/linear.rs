//! The linear operator `A` as a Fourier multiplier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{i_pow, GridSpec, MultiIndex};

/// One building block of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TermKind {
    /// `D^l`.
    Derivative(MultiIndex),
    /// `−(−Δ)^{α/2}`, symbol `−|k|^α`.
    FractionalLaplacian { alpha: f64 },
    /// `−(−Δ)^{α/2} D^l`, symbol `−|k|^α Π_j (i k_j)^{l_j}`.
    Mixed { alpha: f64, l: MultiIndex },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ATerm {
    pub coefficient: f64,
    pub kind: TermKind,
}

impl ATerm {
    pub fn new(coefficient: f64, kind: TermKind) -> Self {
        Self { coefficient, kind }
    }

    fn alpha(&self) -> Option<f64> {
        match &self.kind {
            TermKind::Derivative(_) => None,
            TermKind::FractionalLaplacian { alpha } | TermKind::Mixed { alpha, .. } => Some(*alpha),
        }
    }

    fn multi_index(&self) -> Option<&MultiIndex> {
        match &self.kind {
            TermKind::Derivative(l) | TermKind::Mixed { l, .. } => Some(l),
            TermKind::FractionalLaplacian { .. } => None,
        }
    }

    /// Number of derivatives carried by the term.
    pub fn order(&self) -> f64 {
        self.multi_index().map_or(0.0, |l| l.order() as f64) + self.alpha().unwrap_or(0.0)
    }

    /// Symbol at a real wavevector, ignoring grid effects.
    fn symbol_free(&self, k: [f64; 3]) -> Complex64 {
        let deriv = |l: &MultiIndex| {
            let real: f64 = l
                .as_slice()
                .iter()
                .zip(k)
                .map(|(&lj, kj)| kj.powi(lj as i32))
                .product();
            i_pow(l.order()) * real
        };
        let frac = |alpha: f64| -(k.iter().map(|x| x * x).sum::<f64>()).powf(alpha / 2.0);
        self.coefficient
            * match &self.kind {
                TermKind::Derivative(l) => deriv(l),
                TermKind::FractionalLaplacian { alpha } => Complex64::new(frac(*alpha), 0.0),
                TermKind::Mixed { alpha, l } => deriv(l) * frac(*alpha),
            }
    }

    fn symbol_on_grid(&self, grid: &GridSpec, k: [i64; 3]) -> Complex64 {
        let k2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
        let frac = |alpha: f64| -k2.powf(alpha / 2.0);
        self.coefficient
            * match &self.kind {
                TermKind::Derivative(l) => l.symbol(grid, k),
                TermKind::FractionalLaplacian { alpha } => Complex64::new(frac(*alpha), 0.0),
                TermKind::Mixed { alpha, l } => l.symbol(grid, k) * frac(*alpha),
            }
    }
}

/// Sign class of `Re σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `σ` purely imaginary: `Φ_A` is an isometry.
    Dispersive,
    /// `Re σ ≤ 0`: `Φ_A` is a contraction.
    Diffusive,
    /// `Re σ > 0` somewhere: `Φ_A` amplifies and is not admissible.
    Rejected,
}

/// Linear combination of derivative and fractional-Laplacian terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ASpec {
    terms: Vec<ATerm>,
    classification: Classification,
    /// First sampled wavevector with `Re σ > 0`, for rejected operators.
    violation: Option<[f64; 3]>,
}

const SIGN_TOL: f64 = 1e-12;

impl ASpec {
    pub fn new(terms: Vec<ATerm>) -> Result<Self> {
        let mut dims = None;
        for t in &terms {
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient in A".into()));
            }
            if let Some(alpha) = t.alpha() {
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "fractional order must be > 0, got {alpha}"
                    )));
                }
            }
            if let Some(l) = t.multi_index() {
                if !(1..=3).contains(&l.dims()) {
                    return Err(Error::InvalidParameter(format!(
                        "multi-index must have 1 to 3 entries, got {}",
                        l.dims()
                    )));
                }
                match dims {
                    None => dims = Some(l.dims()),
                    Some(d) if d != l.dims() => {
                        return Err(Error::DimensionMismatch(
                            "multi-indices of A have different lengths".into(),
                        ))
                    }
                    _ => {}
                }
            }
        }
        let (classification, violation) = classify(&terms, dims.unwrap_or(3));
        Ok(Self {
            terms,
            classification,
            violation,
        })
    }

    /// `A = 0`.
    pub fn zero() -> Self {
        Self::new(Vec::new()).expect("empty operator is valid")
    }

    /// `c · D^l`.
    pub fn derivative(coefficient: f64, l: MultiIndex) -> Result<Self> {
        Self::new(vec![ATerm::new(coefficient, TermKind::Derivative(l))])
    }

    /// `−(−Δ)^{α/2}`.
    pub fn fractional_diffusion(alpha: f64) -> Result<Self> {
        Self::new(vec![ATerm::new(1.0, TermKind::FractionalLaplacian { alpha })])
    }

    pub fn terms(&self) -> &[ATerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient == 0.0)
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn violation(&self) -> Option<[f64; 3]> {
        self.violation
    }

    /// Highest number of derivatives over all terms.
    pub fn order(&self) -> f64 {
        self.terms.iter().map(ATerm::order).fold(0.0, f64::max)
    }

    /// Dimension fixed by the multi-indices, if any term carries one.
    pub fn dims(&self) -> Option<usize> {
        self.terms.iter().find_map(|t| t.multi_index().map(MultiIndex::dims))
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        match self.dims() {
            Some(d) if d != grid.dims() => Err(Error::DimensionMismatch(format!(
                "A is {d}-dimensional but the grid is {}-dimensional",
                grid.dims()
            ))),
            _ => Ok(()),
        }
    }

    /// `σ(k)` on `grid`, Nyquist-safe for odd derivatives.
    pub fn symbol(&self, grid: &GridSpec, k: [i64; 3]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.symbol_on_grid(grid, k))
            .sum()
    }

    /// `σ` tabulated over every mode of `grid`.
    pub fn symbol_table(&self, grid: &GridSpec) -> Result<Vec<Complex64>> {
        self.check_grid(grid)?;
        Ok((0..grid.total())
            .map(|f| self.symbol(grid, grid.wavevector(f)))
            .collect())
    }

    /// Human-readable form, e.g. `1*D(3) + -1*L(2)`.
    pub fn describe(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let fmt_l = |l: &MultiIndex| {
            l.as_slice()
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        self.terms
            .iter()
            .map(|t| match &t.kind {
                TermKind::Derivative(l) => format!("{}*D({})", t.coefficient, fmt_l(l)),
                TermKind::FractionalLaplacian { alpha } => format!("{}*L({alpha})", t.coefficient),
                TermKind::Mixed { alpha, l } => {
                    format!("{}*M({alpha}|{})", t.coefficient, fmt_l(l))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Samples `Re σ` on a dense integer lattice and on geometric rays out to
/// `|k| ~ 10⁶`, which is where the leading-order term dominates.
fn classify(terms: &[ATerm], dims: usize) -> (Classification, Option<[f64; 3]>) {
    let radius: i64 = match dims {
        1 => 64,
        2 => 24,
        _ => 10,
    };
    let mut samples: Vec<[f64; 3]> = Vec::new();
    let side = 2 * radius + 1;
    for flat in 0..side.pow(dims as u32) {
        let mut k = [0.0; 3];
        let mut rem = flat;
        for kj in k.iter_mut().take(dims) {
            *kj = (rem % side - radius) as f64;
            rem /= side;
        }
        samples.push(k);
    }
    let mut directions = Vec::new();
    for flat in 0..3i64.pow(dims as u32) {
        let mut d = [0.0; 3];
        let mut rem = flat;
        for dj in d.iter_mut().take(dims) {
            *dj = (rem % 3 - 1) as f64;
            rem /= 3;
        }
        if d.iter().any(|&x| x != 0.0) {
            directions.push(d);
        }
    }
    for m in 0..=20 {
        let scale = 2f64.powi(m);
        for d in &directions {
            samples.push([d[0] * scale, d[1] * scale, d[2] * scale]);
        }
    }

    let mut dispersive = true;
    for k in samples {
        let parts: Vec<Complex64> = terms.iter().map(|t| t.symbol_free(k)).collect();
        let re: f64 = parts.iter().map(|c| c.re).sum();
        let scale: f64 = parts.iter().map(|c| c.norm()).sum();
        let tol = SIGN_TOL * scale.max(1.0);
        if re > tol {
            return (Classification::Rejected, Some(k));
        }
        if re.abs() > tol {
            dispersive = false;
        }
    }
    let class = if dispersive {
        Classification::Dispersive
    } else {
        Classification::Diffusive
    };
    (class, None)
}
