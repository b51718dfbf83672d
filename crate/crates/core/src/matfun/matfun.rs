use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, ZERO};

use super::{Grid, VecFun};

/// A `d × d` matrix function on the circle, held by its samples at the grid
/// nodes together with the matching Laurent coefficients.
#[derive(Debug, Clone)]
pub struct MatFun {
    grid: Arc<Grid>,
    d: usize,
    samples: Vec<CMat>,
    coeffs: Vec<CMat>,
    band: Option<(i64, i64)>,
}

fn check_band(q: usize, lo: i64, hi: i64) -> Result<()> {
    let half = (q / 2) as i64;
    if lo > hi || lo < -half || hi >= half {
        return Err(Error::BandTooWide { lo, hi, q });
    }
    Ok(())
}

/// Per-entry DFT of a sequence of `d × d` matrices.
fn transform(grid: &Grid, input: &[CMat], d: usize, forward: bool) -> Vec<CMat> {
    let q = grid.q();
    let mut out = vec![CMat::zeros(d, d); q];
    let mut buf = vec![ZERO; q];
    for i in 0..d {
        for j in 0..d {
            for k in 0..q {
                buf[k] = input[k][(i, j)];
            }
            if forward {
                grid.analyze(&mut buf);
            } else {
                grid.synthesize(&mut buf);
            }
            for k in 0..q {
                out[k][(i, j)] = buf[k];
            }
        }
    }
    out
}

/// Fourier coefficients `F_n = (1/q) Σ_k conj(z_k)^n F(z_k)` for `n` in
/// `[lo, hi]`.
pub fn fourier_coeffs(
    grid: &Arc<Grid>,
    samples: &[CMat],
    lo: i64,
    hi: i64,
) -> Result<BTreeMap<i64, CMat>> {
    check_band(grid.q(), lo, hi)?;
    assert_eq!(samples.len(), grid.q());
    let d = samples.first().map_or(0, |m| m.nrows());
    let all = transform(grid, samples, d, true);
    Ok((lo..=hi).map(|n| (n, all[grid.slot(n)].clone())).collect())
}

impl MatFun {
    pub fn from_samples(grid: &Arc<Grid>, samples: Vec<CMat>) -> Self {
        assert_eq!(samples.len(), grid.q());
        let d = samples[0].nrows();
        let coeffs = transform(grid, &samples, d, true);
        Self {
            grid: grid.clone(),
            d,
            samples,
            coeffs,
            band: None,
        }
    }

    /// Laurent polynomial `Σ F_n z^n`.
    pub fn from_coeffs(grid: &Arc<Grid>, d: usize, terms: &BTreeMap<i64, CMat>) -> Result<Self> {
        let q = grid.q();
        let mut coeffs = vec![CMat::zeros(d, d); q];
        let mut band: Option<(i64, i64)> = None;
        for (&n, m) in terms {
            if m.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {n} has shape {:?}, expected {d}x{d}",
                    m.shape()
                )));
            }
            band = Some(band.map_or((n, n), |(lo, hi)| (lo.min(n), hi.max(n))));
        }
        if let Some((lo, hi)) = band {
            check_band(q, lo, hi)?;
        }
        for (&n, m) in terms {
            coeffs[grid.slot(n)] += m;
        }
        let samples = transform(grid, &coeffs, d, false);
        Ok(Self {
            grid: grid.clone(),
            d,
            samples,
            coeffs,
            band: Some(band.unwrap_or((0, 0))),
        })
    }

    pub fn constant(grid: &Arc<Grid>, m: CMat) -> Self {
        let d = m.nrows();
        let mut coeffs = vec![CMat::zeros(d, d); grid.q()];
        coeffs[0] = m.clone();
        Self {
            grid: grid.clone(),
            d,
            samples: vec![m; grid.q()],
            coeffs,
            band: Some((0, 0)),
        }
    }

    pub fn identity(grid: &Arc<Grid>, d: usize) -> Self {
        Self::constant(grid, CMat::identity(d, d))
    }

    /// `z^k I_d`.
    pub fn monomial(grid: &Arc<Grid>, d: usize, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(k, CMat::identity(d, d));
        Self::from_coeffs(grid, d, &terms).expect("monomial within grid")
    }

    /// Builds from a function evaluated at every node.
    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut(C64) -> CMat) -> Self {
        let samples = grid.nodes().iter().map(|&z| f(z)).collect();
        Self::from_samples(grid, samples)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn samples(&self) -> &[CMat] {
        &self.samples
    }

    pub fn sample(&self, k: usize) -> &CMat {
        &self.samples[k]
    }

    /// Known Laurent band, when constructed from coefficients.
    pub fn band(&self) -> Option<(i64, i64)> {
        self.band
    }

    pub fn coeff(&self, n: i64) -> &CMat {
        &self.coeffs[self.grid.slot(n)]
    }

    pub fn coeffs_in(&self, lo: i64, hi: i64) -> Result<BTreeMap<i64, CMat>> {
        check_band(self.grid.q(), lo, hi)?;
        Ok((lo..=hi).map(|n| (n, self.coeff(n).clone())).collect())
    }

    /// Pointwise adjoint `F*(z) = F(z)*`.
    pub fn adjoint(&self) -> MatFun {
        let samples = self.samples.iter().map(|m| m.adjoint()).collect();
        let q = self.grid.q();
        let coeffs = (0..q)
            .map(|k| self.coeffs[self.grid.mirror(k)].adjoint())
            .collect();
        MatFun {
            grid: self.grid.clone(),
            d: self.d,
            samples,
            coeffs,
            band: self.band.map(|(lo, hi)| (-hi, -lo)),
        }
    }

    /// `z ↦ F(conj z)`.
    pub fn reflect(&self) -> MatFun {
        let q = self.grid.q();
        let samples = (0..q)
            .map(|k| self.samples[self.grid.mirror(k)].clone())
            .collect();
        let coeffs = (0..q)
            .map(|k| self.coeffs[self.grid.mirror(k)].clone())
            .collect();
        MatFun {
            grid: self.grid.clone(),
            d: self.d,
            samples,
            coeffs,
            band: self.band.map(|(lo, hi)| (-hi, -lo)),
        }
    }

    /// Pointwise map of the samples.
    pub fn map(&self, mut f: impl FnMut(usize, &CMat) -> CMat) -> MatFun {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, m)| f(k, m))
            .collect();
        MatFun::from_samples(&self.grid, samples)
    }

    /// Pointwise product `F(z) G(z)`.
    pub fn mul(&self, other: &MatFun) -> MatFun {
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        let mut out = MatFun::from_samples(&self.grid, samples);
        if let (Some((a, b)), Some((c_, d))) = (self.band, other.band) {
            out.band = Some((a + c_, b + d));
        }
        out
    }

    pub fn scale(&self, s: C64) -> MatFun {
        MatFun {
            grid: self.grid.clone(),
            d: self.d,
            samples: self.samples.iter().map(|m| m * s).collect(),
            coeffs: self.coeffs.iter().map(|m| m * s).collect(),
            band: self.band,
        }
    }

    fn zip_with(&self, other: &MatFun, sign: f64) -> MatFun {
        let s = c(sign, 0.0);
        let band = match (self.band, other.band) {
            (Some((a, b)), Some((c_, d))) => Some((a.min(c_), b.max(d))),
            _ => None,
        };
        MatFun {
            grid: self.grid.clone(),
            d: self.d,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b * s)
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * s)
                .collect(),
            band,
        }
    }

    /// `(F f)(z) = F(z) f(z)`.
    pub fn apply(&self, f: &VecFun) -> VecFun {
        let s = f.samples();
        let mut out = CMat::zeros(self.d, self.grid.q());
        for k in 0..self.grid.q() {
            out.set_column(k, &(&self.samples[k] * s.column(k)));
        }
        VecFun::from_samples(&self.grid, &out)
    }

    /// Value at `λ` of the analytic part `Σ_{n ≥ 0} F_n λ^n`.
    pub fn eval(&self, lambda: C64) -> CMat {
        let half = self.grid.q() / 2;
        let mut acc = CMat::zeros(self.d, self.d);
        for k in (0..half).rev() {
            acc = acc * lambda + &self.coeffs[k];
        }
        acc
    }

    /// Direct Laurent-sum evaluation at a point of the circle.
    pub fn eval_on_circle(&self, z: C64) -> CMat {
        let mut acc = CMat::zeros(self.d, self.d);
        for k in 0..self.grid.q() {
            acc += &self.coeffs[k] * z.powi(self.grid.freq(k) as i32);
        }
        acc
    }

    /// Norm of the negative-frequency coefficients.
    pub fn antianalytic_norm(&self) -> f64 {
        let q = self.grid.q();
        (q / 2..q)
            .map(|k| self.coeffs[k].norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient norm in the slots around `±q/2`.
    pub fn aliasing_tail(&self) -> f64 {
        let q = self.grid.q();
        (q / 2 - q / 8..q / 2 + q / 8)
            .map(|k| self.coeffs[k].norm())
            .fold(0.0, f64::max)
    }

    /// Largest sample norm.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

impl Add for &MatFun {
    type Output = MatFun;
    fn add(self, rhs: &MatFun) -> MatFun {
        self.zip_with(rhs, 1.0)
    }
}

impl Sub for &MatFun {
    type Output = MatFun;
    fn sub(self, rhs: &MatFun) -> MatFun {
        self.zip_with(rhs, -1.0)
    }
}

impl Mul for &MatFun {
    type Output = MatFun;
    fn mul(self, rhs: &MatFun) -> MatFun {
        MatFun::mul(self, rhs)
    }
}
