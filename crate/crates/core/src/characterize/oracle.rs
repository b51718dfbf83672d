use std::collections::BTreeMap;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{frob, unit, CMat};
use crate::matfun::VecFun;
use crate::modelspace::ModelSpace;
use crate::ops::OperatorMatrix;

/// Outcome of the block-Toeplitz test.
#[derive(Debug, Clone)]
pub struct OracleVerdict {
    pub is_member: bool,
    /// `‖A − T‖_F` for the nearest block-Toeplitz `T`.
    pub deviation: f64,
    /// Coefficients `Φ_n`, `n = j − k` for block row `j` and column `k`,
    /// read off as diagonal averages.
    pub symbol: BTreeMap<i64, CMat>,
}

/// Structural test on a matrix whose rows are indexed by `zʲe_p` (`j < n2`)
/// and columns by `zᵏe_q` (`k < n1`), both in the order `index·d + p`.
pub fn toeplitz_oracle_blocks(
    n1: usize,
    n2: usize,
    d: usize,
    a: &CMat,
    tol: f64,
) -> Result<OracleVerdict> {
    if a.shape() != (n2 * d, n1 * d) {
        return Err(Error::DimensionMismatch(format!(
            "matrix {:?} is not {n2}x{n1} blocks of size {d}",
            a.shape()
        )));
    }
    let block = |j: usize, k: usize| a.view((j * d, k * d), (d, d)).into_owned();
    let mut symbol = BTreeMap::new();
    for n in -(n1 as i64 - 1)..n2 as i64 {
        let cells: Vec<(usize, usize)> = (0..n2)
            .filter_map(|j| {
                let k = j as i64 - n;
                (0..n1 as i64).contains(&k).then_some((j, k as usize))
            })
            .collect();
        let mut avg = CMat::zeros(d, d);
        for &(j, k) in &cells {
            avg += block(j, k);
        }
        avg /= crate::linalg::c(cells.len() as f64, 0.0);
        symbol.insert(n, avg);
    }
    let mut fitted = CMat::zeros(n2 * d, n1 * d);
    for j in 0..n2 {
        for k in 0..n1 {
            fitted
                .view_mut((j * d, k * d), (d, d))
                .copy_from(&symbol[&(j as i64 - k as i64)]);
        }
    }
    let deviation = frob(&(a - fitted));
    Ok(OracleVerdict {
        is_member: deviation <= tol * frob(a).max(1.0),
        deviation,
        symbol,
    })
}

/// Columns are the coordinates of `zᵏe_j` in the canonical basis of
/// `K_{zᴺI}`, ordered `k·d + j`. Unitary.
pub fn monomial_frame(m: &ModelSpace, cfg: &GlobalConfig) -> Result<CMat> {
    let n = m
        .theta()
        .monomial_power(cfg.tol_id)
        .ok_or(Error::NotMonomial)?;
    let d = m.d();
    let mut frame = CMat::zeros(m.dim(), n * d);
    for k in 0..n {
        for j in 0..d {
            let f = VecFun::monomial(m.grid(), k as i64, &unit(d, j));
            frame.set_column(k * d + j, &m.coords(&f, cfg)?);
        }
    }
    Ok(frame)
}

/// Block-Toeplitz membership test for `A` between spaces of monomial
/// inner functions, independent of the shift identities.
pub fn toeplitz_oracle(a: &OperatorMatrix, cfg: &GlobalConfig) -> Result<OracleVerdict> {
    let f1 = monomial_frame(a.domain(), cfg)?;
    let f2 = monomial_frame(a.codomain(), cfg)?;
    let d = a.domain().d();
    let mono = f2.adjoint() * a.mat() * &f1;
    toeplitz_oracle_blocks(
        f1.ncols() / d.max(1),
        f2.ncols() / d.max(1),
        d,
        &mono,
        cfg.tol_id,
    )
}
