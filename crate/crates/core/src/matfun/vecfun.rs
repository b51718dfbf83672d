use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::linalg::{c, CMat, CVec, C64, ZERO};

use super::Grid;

/// A `C^d`-valued function on the circle, held by its Laurent coefficients
/// on a grid (`d × q` matrix, column `k` is the coefficient of index
/// `grid.freq(k)`).
#[derive(Debug, Clone)]
pub struct VecFun {
    grid: Arc<Grid>,
    coeffs: CMat,
}

impl VecFun {
    pub fn zeros(grid: &Arc<Grid>, d: usize) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: CMat::zeros(d, grid.q()),
        }
    }

    pub fn from_coeff_matrix(grid: &Arc<Grid>, coeffs: CMat) -> Self {
        assert_eq!(coeffs.ncols(), grid.q());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// `z ↦ z^k x`.
    pub fn monomial(grid: &Arc<Grid>, k: i64, x: &CVec) -> Self {
        let mut f = Self::zeros(grid, x.len());
        f.coeffs.set_column(grid.slot(k), x);
        f
    }

    pub fn constant(grid: &Arc<Grid>, x: &CVec) -> Self {
        Self::monomial(grid, 0, x)
    }

    /// Builds from a finitely supported coefficient list.
    pub fn from_terms(grid: &Arc<Grid>, d: usize, terms: &[(i64, CVec)]) -> Self {
        let mut f = Self::zeros(grid, d);
        for (n, a) in terms {
            let k = grid.slot(*n);
            let cur = f.coeffs.column(k) + a;
            f.coeffs.set_column(k, &cur);
        }
        f
    }

    /// Builds from samples (`d × q`, column `k` is the value at node `k`).
    pub fn from_samples(grid: &Arc<Grid>, samples: &CMat) -> Self {
        let (d, q) = samples.shape();
        assert_eq!(q, grid.q());
        let mut coeffs = CMat::zeros(d, q);
        let mut buf = vec![ZERO; q];
        for i in 0..d {
            for k in 0..q {
                buf[k] = samples[(i, k)];
            }
            grid.analyze(&mut buf);
            for k in 0..q {
                coeffs[(i, k)] = buf[k];
            }
        }
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coeff_matrix(&self) -> &CMat {
        &self.coeffs
    }

    pub fn coeff(&self, n: i64) -> CVec {
        self.coeffs.column(self.grid.slot(n)).into_owned()
    }

    /// Values at the grid nodes (`d × q`).
    pub fn samples(&self) -> CMat {
        let (d, q) = self.coeffs.shape();
        let mut out = CMat::zeros(d, q);
        let mut buf = vec![ZERO; q];
        for i in 0..d {
            for k in 0..q {
                buf[k] = self.coeffs[(i, k)];
            }
            self.grid.synthesize(&mut buf);
            for k in 0..q {
                out[(i, k)] = buf[k];
            }
        }
        out
    }

    /// Direct evaluation of the Laurent sum at a point of the circle.
    pub fn eval_on_circle(&self, z: C64) -> CVec {
        let mut out = CVec::zeros(self.d());
        for k in 0..self.grid.q() {
            let n = self.grid.freq(k) as i32;
            out += self.coeffs.column(k) * z.powi(n);
        }
        out
    }

    /// Value at `λ` of the analytic part `Σ_{n ≥ 0} a_n λ^n`.
    pub fn eval(&self, lambda: C64) -> CVec {
        let half = self.grid.q() / 2;
        let mut acc = CVec::zeros(self.d());
        for k in (0..half).rev() {
            acc = acc * lambda + self.coeffs.column(k);
        }
        acc
    }

    /// `⟨f, g⟩ = ∫ g(z)* f(z) dm(z) = Σ_n g_n* f_n`.
    pub fn inner(&self, g: &VecFun) -> C64 {
        debug_assert_eq!(self.coeffs.shape(), g.coeffs.shape());
        self.coeffs
            .iter()
            .zip(g.coeffs.iter())
            .fold(ZERO, |acc, (a, b)| acc + b.conj() * a)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Orthogonal projection onto `H²`.
    pub fn p_plus(&self) -> VecFun {
        let mut out = self.clone();
        let half = self.grid.q() / 2;
        for k in half..self.grid.q() {
            out.coeffs.column_mut(k).fill(ZERO);
        }
        out
    }

    /// Norm of the part with negative frequencies.
    pub fn antianalytic_norm(&self) -> f64 {
        let half = self.grid.q() / 2;
        (half..self.grid.q())
            .map(|k| self.coeffs.column(k).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Multiplication by `z^k` (`k` may be negative).
    pub fn shift(&self, k: i64) -> VecFun {
        let q = self.grid.q();
        let mut out = Self::zeros(&self.grid, self.d());
        for src in 0..q {
            let dst = self.grid.slot(src as i64 + k);
            out.coeffs.set_column(dst, &self.coeffs.column(src));
        }
        out
    }

    /// `z ↦ f(conj z)`.
    pub fn reflect(&self) -> VecFun {
        let q = self.grid.q();
        let mut out = Self::zeros(&self.grid, self.d());
        for src in 0..q {
            out.coeffs
                .set_column(self.grid.mirror(src), &self.coeffs.column(src));
        }
        out
    }

    /// Backward shift `z̄(f − f(0))` of the analytic part.
    pub fn backward_shift(&self) -> VecFun {
        let mut g = self.p_plus();
        g.coeffs.column_mut(0).fill(ZERO);
        g.shift(-1)
    }

    /// Largest coefficient norm in the slots around `±q/2`, where a well
    /// resolved function must be negligible.
    pub fn aliasing_tail(&self) -> f64 {
        let q = self.grid.q();
        let lo = q / 2 - q / 8;
        let hi = q / 2 + q / 8;
        (lo..hi)
            .map(|k| self.coeffs.column(k).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> VecFun {
        Self {
            grid: self.grid.clone(),
            coeffs: &self.coeffs * s,
        }
    }

    /// `|Σ‖a_n‖² − mean_k ‖f(z_k)‖²|`.
    pub fn parseval_gap(&self) -> f64 {
        let from_coeffs = self.norm().powi(2);
        let s = self.samples();
        let from_samples = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid.q() as f64;
        (from_coeffs - from_samples).abs()
    }
}

impl Add for &VecFun {
    type Output = VecFun;
    fn add(self, rhs: &VecFun) -> VecFun {
        VecFun {
            grid: self.grid.clone(),
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl Sub for &VecFun {
    type Output = VecFun;
    fn sub(self, rhs: &VecFun) -> VecFun {
        VecFun {
            grid: self.grid.clone(),
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl Neg for &VecFun {
    type Output = VecFun;
    fn neg(self) -> VecFun {
        self.scale(c(-1.0, 0.0))
    }
}

impl Mul<C64> for &VecFun {
    type Output = VecFun;
    fn mul(self, s: C64) -> VecFun {
        self.scale(s)
    }
}

/// Linear combination `Σ w_i f_i`; all inputs share grid and dimension.
pub fn combine(grid: &Arc<Grid>, d: usize, funs: &[VecFun], weights: &[C64]) -> VecFun {
    let mut coeffs = CMat::zeros(d, grid.q());
    for (f, &w) in funs.iter().zip(weights) {
        if w != ZERO {
            coeffs += f.coeff_matrix() * w;
        }
    }
    VecFun::from_coeff_matrix(grid, coeffs)
}
