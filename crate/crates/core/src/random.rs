//! Seeded generators for test instances. Every stream is a ChaCha8
//! generator keyed by `rng_seed`, so instances are reproducible across
//! platforms.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{c, gram_schmidt, spectral_norm, CMat, CVec, C64};
use crate::matfun::{build_inner, Grid, InnerFunction, MatFun, PotapovFactor};

pub type TestRng = ChaCha8Rng;

const MAX_REDRAWS: usize = 64;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn substream(seed: u64, stream: u64) -> TestRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| gaussian(rng))
}

/// Haar-distributed unitary (Gram–Schmidt of a Ginibre matrix).
pub fn unitary(rng: &mut impl Rng, d: usize) -> CMat {
    gram_schmidt(&ginibre(rng, d, d))
}

/// Orthogonal projection of the given rank onto a uniformly random subspace.
pub fn projection(rng: &mut impl Rng, d: usize, rank: usize) -> CMat {
    let frame = gram_schmidt(&ginibre(rng, d, rank));
    &frame * frame.adjoint()
}

/// Uniform point in the disk `|w| ≤ radius`.
pub fn disk_point(rng: &mut impl Rng, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = std::f64::consts::TAU * rng.random::<f64>();
    C64::from_polar(r, t)
}

/// Random strict contraction with spectral norm exactly `norm`.
pub fn contraction(rng: &mut impl Rng, d: usize, norm: f64) -> CMat {
    let m = ginibre(rng, d, d);
    let s = spectral_norm(&m);
    m * c(norm / s, 0.0)
}

/// Potapov factors of total rank `degree` with zeros in `|w| ≤ radius`.
pub fn factors(rng: &mut impl Rng, d: usize, degree: usize, radius: f64) -> Vec<PotapovFactor> {
    let mut out = Vec::new();
    let mut left = degree;
    while left > 0 {
        let rank = rng.random_range(1..=d.min(left));
        left -= rank;
        let p = projection(rng, d, rank);
        let w = disk_point(rng, radius);
        out.push(PotapovFactor::new(w, &p).expect("generated factor is valid"));
    }
    out
}

/// Random pure inner function of the given McMillan degree.
///
/// Purity needs `degree ≥ d`: with fewer factor ranks some direction is
/// left fixed by every factor and `‖Θ(0)‖ = 1`. Draws that still come out
/// non-pure are redrawn a bounded number of times.
pub fn inner(
    rng: &mut impl Rng,
    d: usize,
    degree: usize,
    radius: f64,
    grid: &Arc<Grid>,
    cfg: &GlobalConfig,
) -> Result<InnerFunction> {
    if degree < d {
        return Err(Error::NotPure { norm: 1.0 });
    }
    let mut last = None;
    for _ in 0..MAX_REDRAWS {
        let u0 = unitary(rng, d);
        let fs = factors(rng, d, degree, radius);
        match build_inner(&u0, fs, grid, cfg) {
            Err(e @ Error::NotPure { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one draw"))
}

/// `zᴺ I_d` as a Potapov product.
pub fn monomial_inner(
    d: usize,
    n: usize,
    grid: &Arc<Grid>,
    cfg: &GlobalConfig,
) -> Result<InnerFunction> {
    let fs = (0..n)
        .map(|_| PotapovFactor::new(crate::linalg::ZERO, &CMat::identity(d, d)))
        .collect::<Result<Vec<_>>>()?;
    build_inner(&CMat::identity(d, d), fs, grid, cfg)
}

/// Laurent polynomial with Ginibre coefficients on `lo..=hi`.
pub fn laurent(rng: &mut impl Rng, grid: &Arc<Grid>, d: usize, lo: i64, hi: i64) -> MatFun {
    let terms: BTreeMap<i64, CMat> = (lo..=hi).map(|n| (n, ginibre(rng, d, d))).collect();
    MatFun::from_coeffs(grid, d, &terms).expect("band fits the grid")
}
