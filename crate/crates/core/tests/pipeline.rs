//! End-to-end runs through the public API: build spaces, form operators,
//! decide membership, recover and rebuild.

use std::sync::Arc;

use mattolab::characterize::{
    build_from_b, is_matto, solve_certificate, tau_transfer, toeplitz_oracle, Flavor,
};
use mattolab::linalg::{c, frob, unitary_deviation};
use mattolab::matfun::Grid;
use mattolab::modelspace::build_model_space;
use mattolab::ops::{crofoot, crofoot_symbol, matto, tau, CrofootParams};
use mattolab::random;
use mattolab::GlobalConfig;

fn setup(
    seed: u64,
    d: usize,
    n1: usize,
    n2: usize,
) -> (
    GlobalConfig,
    Arc<Grid>,
    Arc<mattolab::modelspace::ModelSpace>,
    Arc<mattolab::modelspace::ModelSpace>,
) {
    let cfg = GlobalConfig::new(d, 256).with_seed(seed);
    let grid = Grid::new(256);
    let mut rng = random::rng(seed);
    let t1 = random::inner(&mut rng, d, n1, 0.6, &grid, &cfg).unwrap();
    let t2 = random::inner(&mut rng, d, n2, 0.6, &grid, &cfg).unwrap();
    let m1 = Arc::new(build_model_space(&t1, &cfg).unwrap());
    let m2 = Arc::new(build_model_space(&t2, &cfg).unwrap());
    (cfg, grid, m1, m2)
}

#[test]
fn symbol_to_operator_and_back() {
    for seed in 0..4 {
        let (cfg, grid, m1, m2) = setup(seed, 2, 3, 4);
        let phi = random::laurent(&mut random::rng(100 + seed), &grid, 2, -3, 3);
        let a = matto(&phi, &m1, &m2, &cfg).unwrap();
        let rep = is_matto(&a, Flavor::Plain, &cfg).unwrap();
        assert!(rep.is_member, "seed {seed}");
        assert!(rep.roundtrip_error.unwrap() <= 1e-8);
        let cert = rep.certificate.unwrap();
        let built = build_from_b(&cert.b1, &cert.b2, &m1, &m2, &cfg).unwrap();
        assert!(frob(&(built.mat() - a.mat())) <= 1e-8 * frob(a.mat()));
    }
}

#[test]
fn perturbed_operators_are_rejected() {
    let (cfg, grid, m1, m2) = setup(7, 2, 4, 4);
    let phi = random::laurent(&mut random::rng(8), &grid, 2, -1, 1);
    let a = matto(&phi, &m1, &m2, &cfg).unwrap();
    let noise = random::ginibre(&mut random::rng(9), m2.dim(), m1.dim());
    let b = a.with_mat(a.mat() + noise * c(1e-3, 0.0), "perturbed");
    let rep = is_matto(&b, Flavor::Plain, &cfg).unwrap();
    assert!(!rep.is_member);
    let w = rep.witness.unwrap();
    assert!(w.value > 0.0);
    assert!(!is_matto(&b, Flavor::Tilde, &cfg).unwrap().is_member);
}

#[test]
fn tau_preserves_membership() {
    // with dim K = d the defect space is everything and every operator is
    // a member, so both spaces need room beyond d
    let (cfg, grid, m1, m2) = setup(3, 2, 3, 4);
    let t1 = tau(&m1, &cfg).unwrap();
    let t2 = tau(&m2, &cfg).unwrap();
    let phi = random::laurent(&mut random::rng(4), &grid, 2, -2, 2);
    let a = matto(&phi, &m1, &m2, &cfg).unwrap();
    let moved = tau_transfer(&a, &t1, &t2).unwrap();
    assert!(is_matto(&moved, Flavor::Plain, &cfg).unwrap().is_member);
    let noise = random::ginibre(&mut random::rng(5), m2.dim(), m1.dim());
    let b = a.with_mat(a.mat() + noise * c(1e-2, 0.0), "perturbed");
    let moved = tau_transfer(&b, &t1, &t2).unwrap();
    assert!(!is_matto(&moved, Flavor::Plain, &cfg).unwrap().is_member);
}

#[test]
fn crofoot_preserves_membership() {
    let q = 2048;
    let cfg = GlobalConfig::new(1, q);
    let grid = Grid::new(q);
    let t = random::monomial_inner(1, 3, &grid, &cfg).unwrap();
    let m = Arc::new(build_model_space(&t, &cfg).unwrap());
    let p = CrofootParams::new(random::contraction(&mut random::rng(1), 1, 0.6), &cfg).unwrap();
    let (_, j) = crofoot(&m, &p, &cfg).unwrap();
    assert!(unitary_deviation(j.mat()) <= 1e-9);
    let phi = random::laurent(&mut random::rng(2), &grid, 1, -2, 2);
    let a = matto(&phi, &m, &m, &cfg).unwrap();
    let moved = a.with_mat(j.mat() * a.mat() * j.mat().adjoint(), "J A J*");
    let moved = mattolab::ops::OperatorMatrix::new(
        moved.into_mat(),
        j.codomain().clone(),
        j.codomain().clone(),
        "J A J*",
    );
    let rep = is_matto(&moved, Flavor::Plain, &cfg).unwrap();
    assert!(rep.is_member);
    let psi = crofoot_symbol(&phi, &p, &p, m.theta(), m.theta()).unwrap();
    let direct = matto(&psi, j.codomain(), j.codomain(), &cfg).unwrap();
    assert!(frob(&(direct.mat() - moved.mat())) <= 1e-8 * frob(moved.mat()));
}

#[test]
fn oracle_agrees_on_monomial_spaces() {
    let cfg = GlobalConfig::new(2, 256);
    let grid = Grid::new(256);
    let m1 = Arc::new(
        build_model_space(&random::monomial_inner(2, 3, &grid, &cfg).unwrap(), &cfg).unwrap(),
    );
    let m2 = Arc::new(
        build_model_space(&random::monomial_inner(2, 2, &grid, &cfg).unwrap(), &cfg).unwrap(),
    );
    let mut rng = random::rng(6);
    for k in 0..10 {
        let phi = random::laurent(&mut rng, &grid, 2, -2, 2);
        let mut a = matto(&phi, &m1, &m2, &cfg).unwrap();
        if k % 2 == 1 {
            let noise = random::ginibre(&mut rng, m2.dim(), m1.dim());
            a = a.with_mat(a.mat() + noise * c(1e-3, 0.0), "perturbed");
        }
        let ours = is_matto(&a, Flavor::Plain, &cfg).unwrap().is_member;
        let oracle = toeplitz_oracle(&a, &cfg).unwrap().is_member;
        assert_eq!(ours, oracle, "case {k}");
        assert_eq!(ours, k % 2 == 0);
    }
}

#[test]
fn certificates_are_reproducible() {
    let (cfg, grid, m1, m2) = setup(12, 2, 3, 3);
    let phi = random::laurent(&mut random::rng(13), &grid, 2, -1, 2);
    let a = matto(&phi, &m1, &m2, &cfg).unwrap();
    let x = solve_certificate(&a, Flavor::Plain, &cfg).unwrap();
    let (cfg2, grid2, n1, n2) = setup(12, 2, 3, 3);
    let phi2 = random::laurent(&mut random::rng(13), &grid2, 2, -1, 2);
    let b = matto(&phi2, &n1, &n2, &cfg2).unwrap();
    let y = solve_certificate(&b, Flavor::Plain, &cfg2).unwrap();
    assert_eq!(a.mat(), b.mat());
    assert_eq!(x.b1, y.b1);
    assert_eq!(x.b2, y.b2);
}
