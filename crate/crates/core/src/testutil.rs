//! Small fixtures shared by the unit tests.

use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::linalg::{c, eye, CMat, C64};
use crate::matfun::{build_inner, Grid, InnerFunction, PotapovFactor};
use crate::modelspace::{build_model_space, ModelSpace};

pub const Q: usize = 256;

pub fn cfg(d: usize) -> GlobalConfig {
    GlobalConfig::new(d, Q)
}

pub fn grid() -> Arc<Grid> {
    Grid::new(Q)
}

/// Scalar Blaschke product with the given zeros.
pub fn scalar(zeros: &[C64]) -> InnerFunction {
    let fs = zeros
        .iter()
        .map(|&w| PotapovFactor::new(w, &eye(1)).unwrap())
        .collect();
    build_inner(&eye(1), fs, &grid(), &cfg(1)).unwrap()
}

/// `zᴺ I_d`.
pub fn zpow(d: usize, n: usize) -> InnerFunction {
    crate::random::monomial_inner(d, n, &grid(), &cfg(d)).unwrap()
}

/// `(z − 1/2)/(1 − z/2)`.
pub fn half() -> InnerFunction {
    scalar(&[c(0.5, 0.0)])
}

pub fn space(theta: &InnerFunction) -> Arc<ModelSpace> {
    Arc::new(build_model_space(theta, &cfg(theta.d())).unwrap())
}

pub fn mat(rows: &[&[C64]]) -> CMat {
    CMat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

pub fn r(x: f64) -> C64 {
    c(x, 0.0)
}
