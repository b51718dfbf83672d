//! Vector- and matrix-valued functions on the unit circle, sampled at the
//! roots of unity, and rational matrix inner functions built from
//! Blaschke–Potapov factors.

mod grid;
mod inner;
#[allow(clippy::module_inception)]
mod matfun;
mod vecfun;

pub use grid::{same_grid, Grid};
pub use inner::{blaschke, build_inner, InnerFunction, InnerRepr, PotapovFactor};
pub use matfun::{fourier_coeffs, MatFun};
pub use vecfun::{combine, VecFun};

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;
    use crate::config::GlobalConfig;
    use crate::error::Error;
    use crate::linalg::{c, eye, frob, CMat, ONE, ZERO};
    use crate::random;
    use crate::testutil::{cfg, grid, half, mat, r, scalar, zpow};

    const TOL: f64 = 1e-12;

    fn near(a: &CMat, b: &CMat) -> f64 {
        frob(&(a - b))
    }

    #[test]
    fn single_zero_at_origin_is_z() {
        let t = zpow(1, 1);
        assert_eq!(t.degree(), 1);
        assert!(t.theta0()[(0, 0)].norm() < TOL);
        let g = t.grid();
        for k in 0..g.q() {
            assert!((t.fun().sample(k)[(0, 0)] - g.node(k)).norm() < TOL);
        }
    }

    #[test]
    fn full_rank_zero_at_origin_is_z_identity() {
        let t = zpow(2, 1);
        assert_eq!(t.degree(), 2);
        let z = c(0.3, -0.4);
        assert!(near(&t.eval(z), &(eye(2) * z)) < TOL);
        assert_eq!(t.monomial_power(TOL), Some(1));
    }

    #[test]
    fn half_blaschke_values() {
        let t = half();
        assert_eq!(t.degree(), 1);
        assert!((t.theta0()[(0, 0)] - r(-0.5)).norm() < TOL);
        // grid node 0 is z = 1
        assert!((t.fun().sample(0)[(0, 0)] - ONE).norm() < TOL);
        assert!((t.eval(ONE)[(0, 0)] - ONE).norm() < TOL);
        assert!(t.inner_deviation() < 1e-13);
    }

    #[test]
    fn samples_of_z_on_four_points() {
        let g = Grid::new(4);
        let f = MatFun::monomial(&g, 2, 1);
        assert!(near(f.sample(1), &(eye(2) * c(0.0, 1.0))) < TOL);
        assert!(near(f.sample(2), &(eye(2) * r(-1.0))) < TOL);
        let one = MatFun::constant(&g, eye(1));
        assert!(one.samples().iter().all(|m| (m[(0, 0)] - ONE).norm() < TOL));
    }

    #[test]
    fn fourier_of_monomials() {
        let g = grid();
        let z2 = MatFun::monomial(&g, 1, 2);
        let cs = fourier_coeffs(&g, z2.samples(), 0, 3).unwrap();
        for (n, m) in &cs {
            let want = if *n == 2 { 1.0 } else { 0.0 };
            assert!((m[(0, 0)] - r(want)).norm() < TOL, "n = {n}");
        }
        let zbar = MatFun::monomial(&g, 1, -1);
        let cs = fourier_coeffs(&g, zbar.samples(), -1, 1).unwrap();
        assert!((cs[&-1][(0, 0)] - ONE).norm() < TOL);
        assert!(cs[&0][(0, 0)].norm() < TOL && cs[&1][(0, 0)].norm() < TOL);
    }

    #[test]
    fn fourier_of_half_blaschke() {
        // (z − 1/2) Σ (z/2)^k = −1/2 + (3/4) z + (3/8) z² + …
        let t = half();
        let cs = fourier_coeffs(t.grid(), t.fun().samples(), 0, 20).unwrap();
        assert!((cs[&0][(0, 0)] - r(-0.5)).norm() < TOL);
        assert!((cs[&1][(0, 0)] - r(0.75)).norm() < TOL);
        for n in 2..=20 {
            let want = 0.75 * 0.5f64.powi(n as i32 - 1);
            assert!((cs[&n][(0, 0)] - r(want)).norm() < TOL, "n = {n}");
        }
    }

    #[test]
    fn band_wider_than_grid_is_rejected() {
        let g = Grid::new(8);
        let f = MatFun::identity(&g, 1);
        assert!(matches!(
            fourier_coeffs(&g, f.samples(), -4, 4),
            Err(Error::BandTooWide { .. })
        ));
    }

    #[test]
    fn adjoint_examples() {
        let g = grid();
        let z = MatFun::monomial(&g, 2, 1);
        let za = z.adjoint();
        assert!(near(za.coeff(-1), &eye(2)) < TOL);
        assert!(frob(za.coeff(1)) < TOL);

        let h = mat(&[&[r(2.0), c(1.0, -1.0)], &[c(1.0, 1.0), r(-3.0)]]);
        let hf = MatFun::constant(&g, h.clone());
        assert!(near(hf.adjoint().coeff(0), &h) < TOL);

        let a = mat(&[&[c(1.0, 2.0), r(0.5)], &[c(0.0, -1.0), r(3.0)]]);
        let b = mat(&[&[r(1.0), c(0.0, 1.0)], &[r(2.0), c(4.0, 1.0)]]);
        let terms = BTreeMap::from([(1, a.clone()), (0, b.clone())]);
        let f = MatFun::from_coeffs(&g, 2, &terms).unwrap().adjoint();
        assert!(near(f.coeff(-1), &a.adjoint()) < TOL);
        assert!(near(f.coeff(0), &b.adjoint()) < TOL);
        assert_eq!(f.band(), Some((-1, 0)));
    }

    #[test]
    fn tilde_examples() {
        let t = zpow(2, 1);
        let tt = t.tilde(&cfg(2)).unwrap();
        assert!(near(&tt.eval(c(0.2, 0.7)), &(eye(2) * c(0.2, 0.7))) < TOL);

        let t = half();
        let tt = t.tilde(&cfg(1)).unwrap();
        let z = c(-0.1, 0.6);
        assert!(near(&tt.eval(z), &t.eval(z)) < TOL);

        let t = scalar(&[c(0.0, 0.5)]);
        let tt = t.tilde(&cfg(1)).unwrap();
        assert!(tt.eval(c(0.0, -0.5))[(0, 0)].norm() < TOL);
        assert!((tt.eval(c(0.0, 0.5))[(0, 0)]).norm() > 0.5);
        assert!((tt.factors()[0].w() - c(0.0, -0.5)).norm() < TOL);
    }

    #[test]
    fn invalid_factors() {
        assert!(matches!(
            PotapovFactor::new(r(1.0), &eye(1)),
            Err(Error::InvalidFactor(_))
        ));
        let not_proj = mat(&[&[r(0.7), ZERO], &[ZERO, ZERO]]);
        assert!(matches!(
            PotapovFactor::new(ZERO, &not_proj),
            Err(Error::InvalidFactor(_))
        ));
        // round-off in a projection is cleaned, not rejected
        let p = mat(&[&[r(1.0 + 1e-9), ZERO], &[ZERO, ZERO]]);
        assert_eq!(PotapovFactor::new(ZERO, &p).unwrap().rank(), 1);
    }

    #[test]
    fn rejected_inner_data() {
        let g = grid();
        let f = vec![PotapovFactor::new(ZERO, &eye(1)).unwrap()];
        let bad_u = eye(1) * r(2.0);
        assert!(matches!(
            build_inner(&bad_u, f.clone(), &g, &cfg(1)),
            Err(Error::NotUnitary { .. })
        ));
        // a rank-one factor leaves a unimodular direction in C^2
        let p = mat(&[&[ONE, ZERO], &[ZERO, ZERO]]);
        let fs = vec![PotapovFactor::new(r(0.3), &p).unwrap()];
        assert!(matches!(
            build_inner(&eye(2), fs, &g, &cfg(2)),
            Err(Error::NotPure { .. })
        ));
        // zeros close to the circle alias on a small grid
        let g = Grid::new(16);
        let fs = vec![PotapovFactor::new(r(0.95), &eye(1)).unwrap()];
        assert!(matches!(
            build_inner(&eye(1), fs, &g, &GlobalConfig::new(1, 16)),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn constant_inner_is_not_pure() {
        let t = InnerFunction::constant(&eye(2), &grid(), &cfg(2)).unwrap();
        assert_eq!(t.degree(), 0);
        assert!(!t.is_pure());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_products_are_inner(seed in any::<u64>(), d in 1usize..=3, extra in 0usize..=3) {
            let mut rng = random::rng(seed);
            let g = grid();
            let t = random::inner(&mut rng, d, d + extra, 0.6, &g, &cfg(d)).unwrap();
            prop_assert!(t.inner_deviation() <= 1e-10);
            prop_assert!(t.is_pure());
            let back = t.tilde(&cfg(d)).unwrap().tilde(&cfg(d)).unwrap();
            let gap = (0..g.q()).map(|k| near(back.fun().sample(k), t.fun().sample(k))).fold(0.0, f64::max);
            prop_assert!(gap <= 1e-12);
        }

        #[test]
        fn parseval_and_roundtrip(seed in any::<u64>(), d in 1usize..=3, lo in -5i64..=0, width in 0i64..=6) {
            let mut rng = random::rng(seed);
            let g = grid();
            let f = random::laurent(&mut rng, &g, d, lo, lo + width);
            let energy: f64 = (lo..=lo + width).map(|n| frob(f.coeff(n)).powi(2)).sum();
            let mean: f64 = f.samples().iter().map(|m| frob(m).powi(2)).sum::<f64>() / g.q() as f64;
            prop_assert!((energy - mean).abs() <= 1e-12 * energy.max(1.0));
            let back = MatFun::from_samples(&g, f.samples().to_vec());
            for n in lo..=lo + width {
                prop_assert!(near(back.coeff(n), f.coeff(n)) <= 1e-12);
            }
            prop_assert!(back.aliasing_tail() <= 1e-12);
        }

        #[test]
        fn vector_parseval(seed in any::<u64>(), d in 1usize..=3) {
            let mut rng = random::rng(seed);
            let g = grid();
            let terms: Vec<_> = (0..5).map(|k| (k as i64 - 2, random::gaussian_vec(&mut rng, d))).collect();
            let f = VecFun::from_terms(&g, d, &terms);
            prop_assert!(f.parseval_gap() <= 1e-12);
            let back = VecFun::from_samples(&g, &f.samples());
            prop_assert!((&back - &f).norm() <= 1e-12);
        }
    }
}
