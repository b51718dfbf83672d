use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{clean_projection, eye, frob, spectral_norm, unitary_deviation, CMat, C64};

use super::{Grid, MatFun};

/// Largest allowed distance between a user matrix and its cleaned projection.
const PROJECTION_SLACK: f64 = 1e-6;

/// Scalar Blaschke factor `b_w(z) = (z − w)/(1 − conj(w) z)`.
pub fn blaschke(w: C64, z: C64) -> C64 {
    (z - w) / (C64::new(1.0, 0.0) - w.conj() * z)
}

/// Elementary Blaschke–Potapov factor `(I − P) + b_w(z) P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotapovFactor {
    w: C64,
    p: CMat,
    rank: usize,
}

impl PotapovFactor {
    /// Re-projects `p` onto the nearest orthogonal projection.
    pub fn new(w: C64, p: &CMat) -> Result<Self> {
        if !(w.norm() < 1.0) {
            return Err(Error::InvalidFactor(format!(
                "zero {w} outside the open disk"
            )));
        }
        if p.nrows() != p.ncols() {
            return Err(Error::InvalidFactor("projection is not square".into()));
        }
        let (clean, rank) = clean_projection(p);
        let slack = frob(&(&clean - p));
        if slack > PROJECTION_SLACK {
            return Err(Error::InvalidFactor(format!(
                "matrix is {slack:.3e} away from an orthogonal projection"
            )));
        }
        Ok(Self { w, p: clean, rank })
    }

    pub fn w(&self) -> C64 {
        self.w
    }

    pub fn projection(&self) -> &CMat {
        &self.p
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn eval(&self, z: C64) -> CMat {
        let d = self.p.nrows();
        eye(d) - &self.p + &self.p * blaschke(self.w, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerRepr {
    /// `U₀ · ∏ factors`; exact evaluation anywhere in the closed disk.
    Factored,
    /// Known only through grid samples (e.g. a Crofoot transform).
    Sampled,
}

/// A rational matrix inner function.
#[derive(Debug, Clone)]
pub struct InnerFunction {
    d: usize,
    left_unitary: CMat,
    factors: Vec<PotapovFactor>,
    repr: InnerRepr,
    fun: MatFun,
    degree: usize,
    theta0: CMat,
}

fn max_inner_deviation(fun: &MatFun) -> f64 {
    let d = fun.d();
    fun.samples()
        .iter()
        .map(|m| {
            let a = frob(&(m.adjoint() * m - eye(d)));
            let b = frob(&(m * m.adjoint() - eye(d)));
            a.max(b)
        })
        .fold(0.0, f64::max)
}

/// Builds `Θ = U₀ ∏ ((I − Pᵢ) + b_{wᵢ} Pᵢ)` on the grid and checks that it
/// is inner and pure.
pub fn build_inner(
    u0: &CMat,
    factors: Vec<PotapovFactor>,
    grid: &Arc<Grid>,
    cfg: &GlobalConfig,
) -> Result<InnerFunction> {
    let theta = build_unchecked(u0, factors, grid, cfg)?;
    theta.check_pure(cfg)?;
    Ok(theta)
}

fn build_unchecked(
    u0: &CMat,
    factors: Vec<PotapovFactor>,
    grid: &Arc<Grid>,
    cfg: &GlobalConfig,
) -> Result<InnerFunction> {
    let d = u0.nrows();
    let dev = unitary_deviation(u0);
    if dev > cfg.tol_id {
        return Err(Error::NotUnitary { deviation: dev });
    }
    if let Some(bad) = factors.iter().find(|f| f.p.nrows() != d) {
        return Err(Error::DimensionMismatch(format!(
            "factor of size {} in a {d}-dimensional product",
            bad.p.nrows()
        )));
    }
    if grid.q() != cfg.q {
        return Err(Error::InvalidConfig(format!(
            "grid has {} nodes but config asks for {}",
            grid.q(),
            cfg.q
        )));
    }
    let degree = factors.iter().map(|f| f.rank).sum();
    cfg.check_capacity(degree)?;
    let radius = factors.iter().map(|f| f.w.norm()).fold(0.0, f64::max);
    cfg.check_decay(radius)?;

    let eval = |z: C64| factors.iter().fold(u0.clone(), |acc, f| acc * f.eval(z));
    let fun = MatFun::from_fn(grid, eval);
    let theta0 = eval(C64::new(0.0, 0.0));
    let dev = max_inner_deviation(&fun);
    if dev > cfg.tol_id {
        return Err(Error::NotInner { deviation: dev });
    }
    Ok(InnerFunction {
        d,
        left_unitary: u0.clone(),
        factors,
        repr: InnerRepr::Factored,
        fun,
        degree,
        theta0,
    })
}

impl InnerFunction {
    /// A constant unitary: the degenerate inner function with `K_Θ = {0}`.
    ///
    /// Not pure; only model-space construction accepts it.
    pub fn constant(u0: &CMat, grid: &Arc<Grid>, cfg: &GlobalConfig) -> Result<Self> {
        build_unchecked(u0, Vec::new(), grid, cfg)
    }

    /// An inner function known only through its grid samples. `degree` is
    /// the expected McMillan degree; it is certified later by the rank of
    /// the model-space build.
    pub fn from_samples(fun: MatFun, degree: usize, cfg: &GlobalConfig) -> Result<Self> {
        let d = fun.d();
        cfg.check_capacity(degree)?;
        let dev = max_inner_deviation(&fun);
        if dev > cfg.tol_id {
            return Err(Error::NotInner { deviation: dev });
        }
        let tail = fun.aliasing_tail();
        if tail > cfg.tol_id / 100.0 {
            return Err(Error::GridTooSmall {
                q: fun.grid().q(),
                reason: format!("coefficient tail {tail:.3e} above tolerance"),
            });
        }
        let leak = fun.antianalytic_norm();
        if leak > cfg.tol_id {
            return Err(Error::NotInner { deviation: leak });
        }
        let theta0 = fun.eval(C64::new(0.0, 0.0));
        let theta = Self {
            d,
            left_unitary: eye(d),
            factors: Vec::new(),
            repr: InnerRepr::Sampled,
            fun,
            degree,
            theta0,
        };
        theta.check_pure(cfg)?;
        Ok(theta)
    }

    fn check_pure(&self, cfg: &GlobalConfig) -> Result<()> {
        let norm = spectral_norm(&self.theta0);
        if norm >= 1.0 - cfg.tol_id {
            return Err(Error::NotPure { norm });
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fun.grid()
    }

    pub fn left_unitary(&self) -> &CMat {
        &self.left_unitary
    }

    pub fn factors(&self) -> &[PotapovFactor] {
        &self.factors
    }

    pub fn repr(&self) -> InnerRepr {
        self.repr
    }

    pub fn fun(&self) -> &MatFun {
        &self.fun
    }

    /// McMillan degree `Σ rank Pᵢ`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn theta0(&self) -> &CMat {
        &self.theta0
    }

    pub fn is_pure(&self) -> bool {
        spectral_norm(&self.theta0) < 1.0
    }

    /// `Θ(λ)`. Exact for factored functions; otherwise summed from the
    /// truncated Taylor coefficients, so `|λ| < 1` is required.
    pub fn eval(&self, lambda: C64) -> CMat {
        match self.repr {
            InnerRepr::Factored => self
                .factors
                .iter()
                .fold(self.left_unitary.clone(), |acc, f| acc * f.eval(lambda)),
            InnerRepr::Sampled => self.fun.eval(lambda),
        }
    }

    /// Largest zero modulus; `None` for sampled functions.
    pub fn zero_radius(&self) -> Option<f64> {
        match self.repr {
            InnerRepr::Factored => {
                Some(self.factors.iter().map(|f| f.w.norm()).fold(0.0, f64::max))
            }
            InnerRepr::Sampled => None,
        }
    }

    /// Max over the grid of `‖Θ*Θ − I‖` and `‖ΘΘ* − I‖`.
    pub fn inner_deviation(&self) -> f64 {
        max_inner_deviation(&self.fun)
    }

    /// `N` such that `Θ(z) = z^N I` on the grid, if any.
    pub fn monomial_power(&self, tol: f64) -> Option<usize> {
        if self.degree % self.d != 0 {
            return None;
        }
        let n = (self.degree / self.d) as i32;
        let grid = self.grid();
        let ok = (0..grid.q()).all(|k| {
            let target = eye(self.d) * grid.node(k).powi(n);
            frob(&(self.fun.sample(k) - target)) <= tol
        });
        ok.then_some(n as usize)
    }

    /// `Θ̃(z) = Θ(conj z)*`.
    ///
    /// For a factored `Θ = U₀ ∏ Gᵢ` this is again a Potapov product:
    /// `U₀* ∏_{reversed} ((I − U₀PᵢU₀*) + b_{conj wᵢ} U₀PᵢU₀*)`.
    pub fn tilde(&self, cfg: &GlobalConfig) -> Result<InnerFunction> {
        match self.repr {
            InnerRepr::Factored => {
                let u = &self.left_unitary;
                let factors = self
                    .factors
                    .iter()
                    .rev()
                    .map(|f| {
                        let p = u * &f.p * u.adjoint();
                        PotapovFactor::new(f.w.conj(), &p)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let out = build_unchecked(&u.adjoint(), factors, self.grid(), cfg)?;
                if self.is_pure() {
                    out.check_pure(cfg)?;
                }
                Ok(out)
            }
            InnerRepr::Sampled => {
                let fun = self.fun.reflect().adjoint();
                InnerFunction::from_samples(fun, self.degree, cfg)
            }
        }
    }
}
