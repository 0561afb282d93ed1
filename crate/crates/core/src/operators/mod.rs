//! Fourier-multiplier operators: the linear part `A`, the velocity `v`, the
//! splitting commutator `[A, B]`, and a numeric admissibility audit.

mod audit;
mod linear;
mod velocity;

pub use audit::{audit_fields, check_admissibility, AdmissibilityReport};
pub use linear::{ASpec, ATerm, Classification, TermKind};
pub use velocity::{CustomMultiplier, Kernel, VSpec, VelocityOperator};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpectralField;

/// `A(u)`: coefficients multiplied by `σ(k)`.
pub fn apply_a(u: &SpectralField, a: &ASpec) -> Result<SpectralField> {
    let table = a.symbol_table(&u.grid())?;
    Ok(u.multiplied(&table))
}

/// Velocity components `v_j(u)`.
pub fn velocity(u: &SpectralField, v: &VSpec) -> Result<Vec<SpectralField>> {
    v.bind(&u.grid())?.apply(u)
}

/// `div w = Σ_j ∂_j w_j`, spectrally.
pub fn divergence(components: &[SpectralField]) -> Result<SpectralField> {
    let first = components
        .first()
        .ok_or_else(|| Error::InvalidParameter("divergence of an empty vector".into()))?;
    let grid = first.grid();
    if components.len() != grid.dims() {
        return Err(Error::DimensionMismatch(format!(
            "{} components on a {}-d grid",
            components.len(),
            grid.dims()
        )));
    }
    let mut out = vec![Complex64::default(); grid.total()];
    for (axis, w) in components.iter().enumerate() {
        for (f, (o, c)) in out.iter_mut().zip(w.coeffs()).enumerate() {
            let k = grid.wavevector(f)[axis];
            if k != grid.nyquist() {
                *o += Complex64::new(0.0, k as f64) * c;
            }
        }
    }
    Ok(SpectralField::from_raw(grid, out))
}

/// `[A, B](f) = −div(A(f v(f)) − f A(v(f)) − A(f) v(f))`, every product
/// dealiased.
pub fn commutator_ab(f: &SpectralField, a: &ASpec, v: &VSpec) -> Result<SpectralField> {
    let grid = f.grid();
    let sigma = a.symbol_table(&grid)?;
    let vf = v.bind(&grid)?.apply(f)?;
    let af = f.multiplied(&sigma);
    let mut w = Vec::with_capacity(vf.len());
    for vj in &vf {
        let a_of_product = f.dealiased_product(vj).multiplied(&sigma);
        let f_a_v = f.dealiased_product(&vj.multiplied(&sigma));
        let af_v = af.dealiased_product(vj);
        w.push(a_of_product.sub(&f_a_v).sub(&af_v));
    }
    Ok(divergence(&w)?.scaled(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{random_band_limited_spectrum, GridSpec, MultiIndex, RealField};
    use proptest::prelude::*;

    fn max_err(a: &SpectralField, b: &RealField) -> f64 {
        a.inverse()
            .unwrap()
            .values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn spec_of(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> SpectralField {
        RealField::from_fn(grid, f).unwrap().forward().unwrap()
    }

    fn kdv() -> ASpec {
        ASpec::derivative(1.0, MultiIndex::axis(1, 0, 3)).unwrap()
    }

    fn heat1() -> ASpec {
        ASpec::derivative(1.0, MultiIndex::axis(1, 0, 2)).unwrap()
    }

    #[test]
    fn apply_a_examples() {
        let g = GridSpec::new(1, 32).unwrap();
        let s = spec_of(g, |x| x[0].sin());
        let expect = RealField::from_fn(g, |x| -x[0].sin()).unwrap();
        let e = max_err(&apply_a(&s, &heat1()).unwrap(), &expect);
        assert!(e < 1e-12, "{e}");

        let half = ASpec::fractional_diffusion(1.0).unwrap();
        let s2 = spec_of(g, |x| (2.0 * x[0]).sin());
        let expect = RealField::from_fn(g, |x| -2.0 * (2.0 * x[0]).sin()).unwrap();
        assert!(max_err(&apply_a(&s2, &half).unwrap(), &expect) < 1e-14);

        let a = ASpec::new(vec![
            ATerm::new(1.0, TermKind::Derivative(MultiIndex::axis(1, 0, 3))),
            ATerm::new(0.7, TermKind::Derivative(MultiIndex::axis(1, 0, 5))),
        ])
        .unwrap();
        let c = spec_of(g, |_| 3.0);
        assert!(apply_a(&c, &a).unwrap().coeffs().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn velocity_examples() {
        let g1 = GridSpec::new(1, 16).unwrap();
        let u = spec_of(g1, |x| x[0].cos() + 0.3);
        let v = velocity(&u, &VSpec::Burgers { a: 1.0 }).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0], u);

        // k = (1,1): stream function u/2, velocity (−ψ_y, ψ_x)
        let g2 = GridSpec::new(2, 16).unwrap();
        let u = spec_of(g2, |x| (x[0] + x[1]).sin());
        let v = velocity(&u, &VSpec::Sqg { beta: 2.0 }).unwrap();
        let e1 = RealField::from_fn(g2, |x| -(x[0] + x[1]).cos() / 2.0).unwrap();
        let e2 = RealField::from_fn(g2, |x| (x[0] + x[1]).cos() / 2.0).unwrap();
        assert!(max_err(&v[0], &e1) < 1e-14);
        assert!(max_err(&v[1], &e2) < 1e-14);

        let c = spec_of(g2, |_| 2.5);
        for kernel in [Kernel::Gaussian, Kernel::ExpAbs] {
            let v = velocity(&c, &VSpec::Convolution(kernel)).unwrap();
            assert!(v.iter().all(|w| w.l2_norm() < 1e-14));
        }
        assert!(velocity(&c, &VSpec::Burgers { a: 1.0 }).is_err());
    }

    #[test]
    fn commutator_examples() {
        let g = GridSpec::new(1, 64).unwrap();
        let f = spec_of(g, |x| x[0].sin());
        let c = commutator_ab(&f, &heat1(), &VSpec::Burgers { a: 1.0 }).unwrap();
        let expect = RealField::from_fn(g, |x| 2.0 * (2.0 * x[0]).sin()).unwrap();
        assert!(max_err(&c, &expect) <= 1e-10);

        let konst = spec_of(g, |_| 1.7);
        for a in [heat1(), kdv(), ASpec::fractional_diffusion(1.5).unwrap()] {
            let c = commutator_ab(&konst, &a, &VSpec::Burgers { a: 1.0 }).unwrap();
            assert!(c.l2_norm() < 1e-13);
        }
        let g2 = GridSpec::new(2, 16).unwrap();
        let konst2 = spec_of(g2, |_| 0.4);
        let c = commutator_ab(
            &konst2,
            &ASpec::fractional_diffusion(2.0).unwrap(),
            &VSpec::Sqg { beta: 1.5 },
        )
        .unwrap();
        assert!(c.l2_norm() < 1e-13);

        let r = random_band_limited_spectrum(g, 3, 4.0, false).unwrap();
        let c = commutator_ab(&r, &ASpec::zero(), &VSpec::Burgers { a: 1.0 }).unwrap();
        assert_eq!(c.l2_norm(), 0.0);
    }

    #[test]
    fn sqg_divergence_vanishes() {
        let g = GridSpec::new(2, 32).unwrap();
        for seed in 0..10 {
            let u = random_band_limited_spectrum(g, seed, 3.0, false).unwrap();
            let v = velocity(&u, &VSpec::Sqg { beta: 1.3 }).unwrap();
            assert!(divergence(&v).unwrap().l2_norm() <= 1e-12 * u.l2_norm());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // For A = ∂², Burgers v: A(f²) − 2fA(f) = 2 f_x², so [A,B]f = −∂_x(2 f_x²).
        #[test]
        fn commutator_matches_leibniz(seed in any::<u64>()) {
            let g = GridSpec::new(1, 64).unwrap();
            // band |k| <= 10 keeps the quadratic terms inside the two-thirds cutoff
            let mut f = random_band_limited_spectrum(g, seed, 3.0, false).unwrap();
            for (i, z) in f.coeffs_mut().iter_mut().enumerate() {
                if g.wavenumber(i).abs() > 10 {
                    *z = Default::default();
                }
            }
            let c = commutator_ab(&f, &heat1(), &VSpec::Burgers { a: 1.0 }).unwrap();
            let fx = crate::grid::spectral_derivative(&f, &MultiIndex::axis(1, 0, 1)).unwrap();
            let fx_phys = fx.inverse().unwrap();
            let sq = RealField::new(g, fx_phys.values().iter().map(|v| 2.0 * v * v).collect()).unwrap();
            let oracle = crate::grid::spectral_derivative(&sq.forward().unwrap(), &MultiIndex::axis(1, 0, 1))
                .unwrap()
                .scaled(-1.0);
            let diff = c.inverse().unwrap().values().iter()
                .zip(oracle.inverse().unwrap().values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            prop_assert!(diff <= 1e-10);
        }

        #[test]
        fn operators_are_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let g = GridSpec::new(2, 16).unwrap();
            let f = random_band_limited_spectrum(g, seed, 3.0, false).unwrap();
            let h = random_band_limited_spectrum(g, seed.wrapping_add(1), 3.0, false).unwrap();
            let combo = f.scaled(a).axpy(b, &h);
            let op = ASpec::fractional_diffusion(1.5).unwrap();
            let lhs = apply_a(&combo, &op).unwrap();
            let rhs = apply_a(&f, &op).unwrap().scaled(a).axpy(b, &apply_a(&h, &op).unwrap());
            prop_assert!(lhs.sub(&rhs).l2_norm() <= 1e-13 * (1.0 + lhs.l2_norm()));
            let vs = VSpec::Convolution(Kernel::Gaussian);
            let lv = velocity(&combo, &vs).unwrap();
            let fv = velocity(&f, &vs).unwrap();
            let hv = velocity(&h, &vs).unwrap();
            for j in 0..2 {
                let rhs = fv[j].scaled(a).axpy(b, &hv[j]);
                prop_assert!(lv[j].sub(&rhs).l2_norm() <= 1e-13 * (1.0 + lv[j].l2_norm()));
            }
        }
    }
}
