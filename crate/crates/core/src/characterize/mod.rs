//! Membership in `MT(Θ₁, Θ₂)` through the compressed-shift identities
//!
//! ```text
//! A − S₂ A S₁*  = B₁ D₁ + D₂ B₂*      (plain)
//! A − S₂* A S₁  = B̃₁ D̃₁ + D̃₂ B̃₂*      (tilde)
//! ```
//!
//! together with symbol recovery, reconstruction from a certificate, and
//! transfer of operators and certificates under `τ`.

mod certificate;
mod oracle;
mod transfer;

use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::error::Result;
use crate::linalg::CMat;
use crate::modelspace::{DefectKind, ModelSpace};
use crate::ops::{compressed_shift, defect_ops, omega};

pub use certificate::{
    build_from_b, build_from_b_with, certificate_image, compressed_residual, is_matto,
    is_matto_with, recover_symbol, residual_with, shift_residual, solve_certificate,
    solve_certificate_with, CaraCertificate, MembershipReport, Verdict, Witness,
};
pub use oracle::{monomial_frame, toeplitz_oracle, toeplitz_oracle_blocks, OracleVerdict};
pub use transfer::{plain_to_tilde_certificate, tau_transfer, tilde_certificate_convert};

pub use crate::ops::tau_transfer_symbol;

/// Which shift identity a certificate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Plain,
    Tilde,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Plain => "plain",
            Flavor::Tilde => "tilde",
        }
    }

    pub(crate) fn defect_kind(self) -> DefectKind {
        match self {
            Flavor::Plain => DefectKind::Plain,
            Flavor::Tilde => DefectKind::Tilde,
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(Flavor::Plain),
            "tilde" => Ok(Flavor::Tilde),
            other => Err(format!(
                "unknown flavor `{other}` (expected plain or tilde)"
            )),
        }
    }
}

/// Model operators of one space, computed once and reused.
#[derive(Debug, Clone)]
pub struct SpaceOps {
    pub space: Arc<ModelSpace>,
    pub shift: CMat,
    pub defect: CMat,
    pub defect_tilde: CMat,
    /// `Ω_Θ` on frame coordinates of `𝒟_Θ`.
    pub omega: CMat,
}

impl SpaceOps {
    pub fn new(space: &Arc<ModelSpace>, cfg: &GlobalConfig) -> Result<Self> {
        let (s, _) = compressed_shift(space, cfg)?;
        let (d, dt) = defect_ops(space, cfg)?;
        let om = omega(space, cfg)?;
        Ok(Self {
            space: space.clone(),
            shift: s.into_mat(),
            defect: d.into_mat(),
            defect_tilde: dt.into_mat(),
            omega: om,
        })
    }

    pub fn defect_op(&self, flavor: Flavor) -> &CMat {
        match flavor {
            Flavor::Plain => &self.defect,
            Flavor::Tilde => &self.defect_tilde,
        }
    }

    /// Orthonormal frame of the defect subspace of the given flavor.
    pub fn frame(&self, flavor: Flavor) -> &CMat {
        self.space.defect_of(flavor.defect_kind()).frame()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::error::Error;
    use crate::linalg::{c, eye, frob, ONE, ZERO};
    use crate::matfun::MatFun;
    use crate::ops::{compressed_shift, matto, tau_between, OperatorMatrix};
    use crate::random;
    use crate::testutil::{cfg, grid, mat, r, space, zpow};

    const TOL: f64 = 1e-12;

    fn ops(m: &Arc<ModelSpace>) -> SpaceOps {
        SpaceOps::new(m, &cfg(m.d())).unwrap()
    }

    fn random_space(seed: u64, d: usize, degree: usize) -> Arc<ModelSpace> {
        let mut rng = random::rng(seed);
        space(&random::inner(&mut rng, d, degree, 0.6, &grid(), &cfg(d)).unwrap())
    }

    fn zero_op(m1: &Arc<ModelSpace>, m2: &Arc<ModelSpace>) -> OperatorMatrix {
        OperatorMatrix::new(CMat::zeros(m2.dim(), m1.dim()), m1.clone(), m2.clone(), "0")
    }

    #[test]
    fn shift_residual_examples() {
        let m = space(&zpow(1, 2));
        let c1 = cfg(1);
        let r0 = shift_residual(&zero_op(&m, &m), Flavor::Plain, &c1).unwrap();
        assert!(frob(r0.mat()) == 0.0);
        // S² = 0 on K_{z²}, so S − S S S* = S
        let (s, _) = compressed_shift(&m, &c1).unwrap();
        let rs = shift_residual(&s, Flavor::Plain, &c1).unwrap();
        assert!(frob(&(rs.mat() - s.mat())) < TOL);
        let m = space(&zpow(2, 1));
        let id = OperatorMatrix::new(eye(2), m.clone(), m.clone(), "I");
        let ri = shift_residual(&id, Flavor::Plain, &cfg(2)).unwrap();
        assert!(frob(&(ri.mat() - eye(2))) < TOL);
    }

    #[test]
    fn certificate_of_analytic_symbol() {
        let c2 = cfg(2);
        let m1 = random_space(1, 2, 3);
        let m2 = random_space(2, 2, 4);
        let psi = random::laurent(&mut random::rng(3), &grid(), 2, 0, 2);
        let a = matto(&psi, &m1, &m2, &c2).unwrap();
        let (o1, o2) = (ops(&m1), ops(&m2));
        let cert = solve_certificate_with(a.mat(), &o1, &o2, Flavor::Plain, &c2).unwrap();
        assert!(cert.relative_residual < 1e-12);

        // B₁ = P₂ M_Ψ Ω₁ in frame coordinates, B₂ = 0
        let mut mpsi = CMat::zeros(m2.dim(), 2);
        for j in 0..2 {
            let x = crate::linalg::unit(2, j);
            let f = psi.apply(&crate::matfun::VecFun::constant(&grid(), &x));
            mpsi.set_column(j, &m2.project_coords(&f, &c2).unwrap());
        }
        let expected = mpsi * &o1.omega;
        let want = certificate_image(
            &expected,
            &CMat::zeros(m1.dim(), 2),
            &o1,
            &o2,
            Flavor::Plain,
        );
        let got = certificate_image(&cert.b1, &cert.b2, &o1, &o2, Flavor::Plain);
        assert!(frob(&(got - want)) < 1e-11);
        // only the part of B₁ off the defect space is determined
        let q2 = m2.defect().complement_projector();
        assert!(frob(&(&q2 * (&cert.b1 - &expected))) < 1e-11);
    }

    #[test]
    fn zero_operator_has_zero_certificate_and_symbol() {
        let m1 = random_space(4, 2, 2);
        let m2 = random_space(5, 2, 3);
        let c2 = cfg(2);
        let a = zero_op(&m1, &m2);
        let cert = solve_certificate(&a, Flavor::Plain, &c2).unwrap();
        assert!(frob(&cert.b1) == 0.0 && frob(&cert.b2) == 0.0);
        let rep = is_matto(&a, Flavor::Plain, &c2).unwrap();
        assert!(rep.is_member);
        let pair = rep.recovered_symbol.unwrap();
        assert!(pair.psi.sup_norm() < TOL && pair.xi.sup_norm() < TOL);
        let built = build_from_b(&cert.b1, &cert.b2, &m1, &m2, &c2).unwrap();
        assert!(frob(built.mat()) == 0.0);
    }

    #[test]
    fn diagonal_on_z_squared_is_not_toeplitz() {
        let m = space(&zpow(1, 2));
        let c1 = cfg(1);
        let a = OperatorMatrix::new(
            mat(&[&[ONE, ZERO], &[ZERO, ZERO]]),
            m.clone(),
            m.clone(),
            "diag",
        );
        let cert = solve_certificate(&a, Flavor::Plain, &c1).unwrap();
        assert!(cert.relative_residual > 0.1);
        let rep = is_matto(&a, Flavor::Plain, &c1).unwrap();
        assert!(!rep.is_member);
        let w = rep.witness.unwrap();
        assert!(w.value > 0.1);
        let oracle = toeplitz_oracle(&a, &c1).unwrap();
        assert!(!oracle.is_member);
    }

    #[test]
    fn shift_is_a_member() {
        let c1 = cfg(1);
        let m = space(&zpow(1, 2));
        let (s, _) = compressed_shift(&m, &c1).unwrap();
        let rep = is_matto(&s, Flavor::Plain, &c1).unwrap();
        assert!(rep.is_member);
        let pair = rep.recovered_symbol.unwrap();
        let back = matto(&pair.symbol(), &m, &m, &c1).unwrap();
        assert!(frob(&(back.mat() - s.mat())) < 1e-12);

        let m = random_space(6, 2, 4);
        let (s, _) = compressed_shift(&m, &cfg(2)).unwrap();
        assert!(is_matto(&s, Flavor::Tilde, &cfg(2)).unwrap().is_member);
    }

    #[test]
    fn laurent_symbol_between_monomial_spaces() {
        let c1 = cfg(1);
        let m1 = space(&zpow(1, 3));
        let m2 = space(&zpow(1, 2));
        let phi = random::laurent(&mut random::rng(7), &grid(), 1, -2, 1);
        let a = matto(&phi, &m1, &m2, &c1).unwrap();
        let rep = is_matto(&a, Flavor::Plain, &c1).unwrap();
        assert!(rep.is_member);
        assert!(rep.roundtrip_error.unwrap() <= 1e-8);
    }

    #[test]
    fn analytic_roundtrip_on_z_cubed() {
        let c1 = cfg(1);
        let m = space(&zpow(1, 3));
        let psi = random::laurent(&mut random::rng(8), &grid(), 1, 0, 3);
        let a = matto(&psi, &m, &m, &c1).unwrap();
        let cert = solve_certificate(&a, Flavor::Plain, &c1).unwrap();
        let pair = recover_symbol(&cert, &m, &m, &c1).unwrap();
        let back = matto(&pair.symbol(), &m, &m, &c1).unwrap();
        assert!(frob(&(back.mat() - a.mat())) <= 1e-9);
        assert!(pair.analyticity_defect() < 1e-12);
        let tilde = solve_certificate(&a, Flavor::Tilde, &c1).unwrap();
        assert!(matches!(
            recover_symbol(&tilde, &m, &m, &c1),
            Err(Error::FlavorMismatch { .. })
        ));
    }

    #[test]
    fn build_from_b_gives_jordan_block() {
        let c1 = cfg(1);
        let m = space(&zpow(1, 2));
        let o = ops(&m);
        // B₁ = (1 ↦ z) ∘ Ω in frame coordinates
        let z = crate::matfun::VecFun::monomial(&grid(), 1, &crate::linalg::unit(1, 0));
        let b1 = CMat::from_column_slice(2, 1, m.coords(&z, &c1).unwrap().as_slice()) * &o.omega;
        let a = build_from_b_with(&b1, &CMat::zeros(2, 1), &o, &o, &c1).unwrap();
        let jordan = mat(&[&[ZERO, ZERO], &[ONE, ZERO]]);
        assert!(frob(&(a.mat() - jordan)) < 1e-12);
    }

    #[test]
    fn random_certificates_build_members() {
        let c1 = cfg(1);
        let m1 = space(&zpow(1, 3));
        let m2 = space(&zpow(1, 2));
        let mut rng = random::rng(9);
        let b1 = random::ginibre(&mut rng, 2, 1);
        let b2 = random::ginibre(&mut rng, 3, 1);
        let a = build_from_b(&b1, &b2, &m1, &m2, &c1).unwrap();
        let rep = is_matto(&a, Flavor::Plain, &c1).unwrap();
        assert!(rep.is_member && rep.lsq_residual <= 1e-9);
        assert!(matches!(
            build_from_b(&b2, &b1, &m1, &m2, &c1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn tau_transfer_examples() {
        let c2 = cfg(2);
        let m = random_space(10, 2, 4);
        let t = crate::ops::tau(&m, &c2).unwrap();
        let (s, _) = compressed_shift(&m, &c2).unwrap();
        let (st, _) = compressed_shift(t.codomain(), &c2).unwrap();
        let moved = tau_transfer(&s, &t, &t).unwrap();
        assert!(frob(&(moved.mat() - st.mat().adjoint())) < 1e-12);

        // Φ = I: Ψ(z) = Θ(z̄)*Θ(z̄) = I
        let id = MatFun::identity(&grid(), 2);
        let psi = tau_transfer_symbol(&id, m.theta(), m.theta());
        assert!((&psi - &id).sup_norm() < 1e-12);

        // transferring twice returns A
        let m2 = random_space(11, 2, 3);
        let t2 = crate::ops::tau(&m2, &c2).unwrap();
        let phi = random::laurent(&mut random::rng(12), &grid(), 2, -2, 2);
        let a = matto(&phi, &m, &m2, &c2).unwrap();
        let once = tau_transfer(&a, &t, &t2).unwrap();
        let back1 = tau_between(t.codomain(), &m, &c2).unwrap();
        let back2 = tau_between(t2.codomain(), &m2, &c2).unwrap();
        let twice = tau_transfer(&once, &back1, &back2).unwrap();
        assert!(frob(&(twice.mat() - a.mat())) < 1e-12);
        let psi = tau_transfer_symbol(&phi, m.theta(), m2.theta());
        let direct = matto(&psi, t.codomain(), t2.codomain(), &c2).unwrap();
        assert!(frob(&(direct.mat() - once.mat())) < 1e-10);
    }

    #[test]
    fn tilde_certificate_conversion() {
        let c1 = cfg(1);
        let m = space(&zpow(1, 2));
        let t = crate::ops::tau(&m, &c1).unwrap();
        let (o, ot) = (ops(&m), ops(t.codomain()));
        let (s, _) = compressed_shift(&m, &c1).unwrap();
        let cert = solve_certificate_with(s.mat(), &o, &o, Flavor::Tilde, &c1).unwrap();
        let plain = tilde_certificate_convert(&cert, &t, &t, &c1).unwrap();
        let moved = tau_transfer(&s, &t, &t).unwrap();
        let r = residual_with(moved.mat(), &ot, &ot, Flavor::Plain).unwrap();
        let img = certificate_image(&plain.b1, &plain.b2, &ot, &ot, Flavor::Plain);
        assert!(frob(&(r - img)) < 1e-12);
        let back = plain_to_tilde_certificate(&plain, &t, &t).unwrap();
        assert!(frob(&(back.b1 - &cert.b1)) < 1e-12 && frob(&(back.b2 - &cert.b2)) < 1e-12);

        let zero = CaraCertificate {
            b1: CMat::zeros(2, 1),
            b2: CMat::zeros(2, 1),
            residual: 0.0,
            relative_residual: 0.0,
            flavor: Flavor::Tilde,
        };
        let z = tilde_certificate_convert(&zero, &t, &t, &c1).unwrap();
        assert!(frob(&z.b1) == 0.0 && frob(&z.b2) == 0.0);
        assert!(matches!(
            tilde_certificate_convert(&plain, &t, &t, &c1),
            Err(Error::FlavorMismatch { .. })
        ));
    }

    #[test]
    fn oracle_examples() {
        let (a, b, cc) = (c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0));
        let m = mat(&[&[a, b], &[cc, a]]);
        let v = toeplitz_oracle_blocks(2, 2, 1, &m, 1e-12).unwrap();
        assert!(v.is_member);
        assert!((v.symbol[&1][(0, 0)] - cc).norm() < TOL);
        assert!((v.symbol[&0][(0, 0)] - a).norm() < TOL);
        assert!((v.symbol[&-1][(0, 0)] - b).norm() < TOL);
        let d = mat(&[&[ONE, ZERO], &[ZERO, ZERO]]);
        assert!(
            !toeplitz_oracle_blocks(2, 2, 1, &d, 1e-12)
                .unwrap()
                .is_member
        );
        let any = random::ginibre(&mut random::rng(1), 2, 2);
        assert!(
            toeplitz_oracle_blocks(1, 1, 2, &any, 1e-12)
                .unwrap()
                .is_member
        );
        assert!(matches!(
            monomial_frame(&random_space(3, 1, 2), &cfg(1)),
            Err(Error::NotMonomial)
        ));
    }

    #[test]
    fn band_between_thresholds_is_inconsistent() {
        let c1 = cfg(1);
        let m = space(&zpow(1, 3));
        let phi = random::laurent(&mut random::rng(2), &grid(), 1, -1, 1);
        let a = matto(&phi, &m, &m, &c1).unwrap();
        let mut bumped = a.mat().clone();
        bumped[(0, 0)] += r(10.0 * c1.tol_member * frob(a.mat()));
        let b = a.with_mat(bumped, "bumped");
        assert!(matches!(
            is_matto(&b, Flavor::Plain, &c1),
            Err(Error::Inconsistent { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn members_certify_and_flavors_agree(seed in any::<u64>(), d in 1usize..=2, e1 in 0usize..=2, e2 in 0usize..=2) {
            let c = cfg(d);
            let mut rng = random::rng(seed);
            let m1 = space(&random::inner(&mut rng, d, d + e1, 0.6, &grid(), &c).unwrap());
            let m2 = space(&random::inner(&mut rng, d, d + e2, 0.6, &grid(), &c).unwrap());
            let (o1, o2) = (ops(&m1), ops(&m2));
            let phi = random::laurent(&mut rng, &grid(), d, -2, 2);
            let a = matto(&phi, &m1, &m2, &c).unwrap();
            let plain = is_matto_with(&a, &o1, &o2, Flavor::Plain, &c).unwrap();
            let tilde = is_matto_with(&a, &o1, &o2, Flavor::Tilde, &c).unwrap();
            prop_assert!(plain.is_member && tilde.is_member);
            prop_assert!(plain.lsq_residual <= 1e-8);
            prop_assert!(plain.roundtrip_error.unwrap() <= 1e-8);

            let noise = random::ginibre(&mut rng, m2.dim(), m1.dim());
            let scale = 1e-2 * frob(a.mat()).max(1.0) / frob(&noise);
            let b = a.with_mat(a.mat() + noise * crate::linalg::c(scale, 0.0), "perturbed");
            // a random perturbation of this size leaves the class unless the
            // spaces are too small to have any room
            if let (Ok(p), Ok(t)) = (is_matto_with(&b, &o1, &o2, Flavor::Plain, &c), is_matto_with(&b, &o1, &o2, Flavor::Tilde, &c)) {
                prop_assert_eq!(p.is_member, t.is_member);
            }

            let cert = solve_certificate_with(a.mat(), &o1, &o2, Flavor::Plain, &c).unwrap();
            let built = build_from_b_with(&cert.b1, &cert.b2, &o1, &o2, &c).unwrap();
            prop_assert!(frob(&(built.mat() - a.mat())) <= 1e-8 * frob(a.mat()).max(1.0));
        }
    }
}
