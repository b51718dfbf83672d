//! The model space `K_Θ = H²(C^d) ⊖ Θ H²(C^d)` as a concrete
//! finite-dimensional inner-product space.

use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{
    c, eye, frob, gram_schmidt, pivoted_orthonormalize, unit, CMat, CVec, C64, ONE,
};
use crate::matfun::{combine, Grid, InnerFunction, VecFun};

/// Which of the two defect subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    /// `𝒟_Θ = {(I − ΘΘ(0)*)x}`, the range of `I − S_Θ S_Θ*`.
    Plain,
    /// `𝒟̃_Θ = {z̄(Θ − Θ(0))x}`, the range of `I − S_Θ* S_Θ`.
    Tilde,
}

/// A defect subspace of a model space.
#[derive(Debug, Clone)]
pub struct DefectSubspace {
    kind: DefectKind,
    /// Orthonormal frame, one column per frame vector, in model-space
    /// coordinates (`dim × rank`).
    frame: CMat,
    /// Coordinates of the generator images of the unit vectors `e_j`
    /// (`dim × d`).
    generator_coords: CMat,
    generators: Vec<VecFun>,
}

impl DefectSubspace {
    pub fn kind(&self) -> DefectKind {
        self.kind
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn generator_coords(&self) -> &CMat {
        &self.generator_coords
    }

    pub fn generators(&self) -> &[VecFun] {
        &self.generators
    }

    /// Orthogonal projection onto the complement, in model-space coordinates.
    pub fn complement_projector(&self) -> CMat {
        let n = self.frame.nrows();
        eye(n) - &self.frame * self.frame.adjoint()
    }
}

/// `K_Θ` with an orthonormal basis and both defect subspaces.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    theta: InnerFunction,
    basis: Vec<VecFun>,
    gram_residual: f64,
    defect: DefectSubspace,
    defect_tilde: DefectSubspace,
}

/// `P_Θ f = P₊f − Θ P₊(Θ* P₊f)`.
pub fn project(theta: &InnerFunction, f: &VecFun, cfg: &GlobalConfig) -> Result<VecFun> {
    if f.d() != theta.d() {
        return Err(Error::DimensionMismatch(format!(
            "function has dimension {}, inner function {}",
            f.d(),
            theta.d()
        )));
    }
    let tail = f.aliasing_tail();
    if tail > cfg.tol_id {
        return Err(Error::GridTooSmall {
            q: f.grid().q(),
            reason: format!("function tail {tail:.3e} is not resolved"),
        });
    }
    let fp = f.p_plus();
    let inner = theta.fun().adjoint().apply(&fp).p_plus();
    Ok(&fp - &theta.fun().apply(&inner))
}

fn check_disk(lambda: C64) -> Result<()> {
    if lambda.norm() >= 1.0 {
        return Err(Error::PointOnBoundary {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok(())
}

/// Reproducing kernel `k_λ^Θ x = (1 − conj(λ) z)⁻¹ (I − Θ(z)Θ(λ)*) x`.
pub fn kernel(theta: &InnerFunction, lambda: C64, x: &CVec) -> Result<VecFun> {
    check_disk(lambda)?;
    let grid = theta.grid();
    let d = theta.d();
    let theta_l = theta.eval(lambda).adjoint() * x;
    let mut s = CMat::zeros(d, grid.q());
    for k in 0..grid.q() {
        let z = grid.node(k);
        let v = (x - theta.fun().sample(k) * &theta_l) / (ONE - lambda.conj() * z);
        s.set_column(k, &v);
    }
    Ok(VecFun::from_samples(grid, &s))
}

/// Difference-quotient kernel `k̃_λ^Θ x = (z − λ)⁻¹ (Θ(z) − Θ(λ)) x`.
pub fn kernel_tilde(theta: &InnerFunction, lambda: C64, x: &CVec) -> Result<VecFun> {
    check_disk(lambda)?;
    let grid = theta.grid();
    let d = theta.d();
    let theta_l = theta.eval(lambda) * x;
    let mut s = CMat::zeros(d, grid.q());
    for k in 0..grid.q() {
        let z = grid.node(k);
        let v = (theta.fun().sample(k) * x - &theta_l) / (z - lambda);
        s.set_column(k, &v);
    }
    Ok(VecFun::from_samples(grid, &s))
}

fn flatten(funs: &[VecFun], d: usize, q: usize) -> CMat {
    let mut m = CMat::zeros(d * q, funs.len());
    for (j, f) in funs.iter().enumerate() {
        m.column_mut(j).copy_from_slice(f.coeff_matrix().as_slice());
    }
    m
}

fn unflatten(grid: &Arc<Grid>, d: usize, col: &[C64]) -> VecFun {
    VecFun::from_coeff_matrix(grid, CMat::from_column_slice(d, grid.q(), col))
}

/// Builds an orthonormal basis of `K_Θ`.
///
/// The spanning set `P_Θ(z^k e_j)`, `0 ≤ k < deg + 2`, is taken in
/// lexicographic `(k, j)` order and orthonormalised by pivoted
/// Gram–Schmidt; the result is projected once more and re-orthonormalised
/// in order to remove the round-off that left the space.
pub fn build_model_space(theta: &InnerFunction, cfg: &GlobalConfig) -> Result<ModelSpace> {
    let grid = theta.grid().clone();
    let d = theta.d();
    let q = grid.q();
    let degree = theta.degree();

    let mut spanning = Vec::with_capacity((degree + 2) * d);
    for k in 0..(degree + 2) as i64 {
        for j in 0..d {
            let mono = VecFun::monomial(&grid, k, &unit(d, j));
            spanning.push(project(theta, &mono, cfg)?);
        }
    }
    let (frame, _) = if degree == 0 {
        (CMat::zeros(d * q, 0), Vec::new())
    } else {
        pivoted_orthonormalize(&flatten(&spanning, d, q), cfg.tol_rank)
    };
    if frame.ncols() != degree {
        return Err(Error::RankMismatch {
            rank: frame.ncols(),
            degree,
        });
    }
    let refined: Vec<VecFun> = (0..degree)
        .map(|j| project(theta, &unflatten(&grid, d, frame.column(j).as_slice()), cfg))
        .collect::<Result<_>>()?;
    let ortho = gram_schmidt(&flatten(&refined, d, q));
    let basis: Vec<VecFun> = (0..degree)
        .map(|j| unflatten(&grid, d, ortho.column(j).as_slice()))
        .collect();

    let gram = CMat::from_fn(degree, degree, |i, j| basis[j].inner(&basis[i]));
    let gram_residual = frob(&(gram - eye(degree)));

    let mut space = ModelSpace {
        theta: theta.clone(),
        basis,
        gram_residual,
        defect: empty_defect(DefectKind::Plain, d),
        defect_tilde: empty_defect(DefectKind::Tilde, d),
    };
    if degree > 0 {
        space.defect = space.defect_subspace(DefectKind::Plain, cfg)?;
        space.defect_tilde = space.defect_subspace(DefectKind::Tilde, cfg)?;
    }
    Ok(space)
}

fn empty_defect(kind: DefectKind, d: usize) -> DefectSubspace {
    DefectSubspace {
        kind,
        frame: CMat::zeros(0, 0),
        generator_coords: CMat::zeros(0, d),
        generators: Vec::new(),
    }
}

impl ModelSpace {
    fn defect_subspace(&self, kind: DefectKind, cfg: &GlobalConfig) -> Result<DefectSubspace> {
        let d = self.d();
        let zero = c(0.0, 0.0);
        let generators = (0..d)
            .map(|j| match kind {
                DefectKind::Plain => kernel(&self.theta, zero, &unit(d, j)),
                DefectKind::Tilde => kernel_tilde(&self.theta, zero, &unit(d, j)),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut generator_coords = CMat::zeros(self.dim(), d);
        for (j, g) in generators.iter().enumerate() {
            generator_coords.set_column(j, &self.coords(g, cfg)?);
        }
        let (frame, _) = pivoted_orthonormalize(&generator_coords, cfg.tol_rank);
        if frame.ncols() != d {
            return Err(Error::DegenerateDefect {
                rank: frame.ncols(),
                expected: d,
            });
        }
        Ok(DefectSubspace {
            kind,
            frame,
            generator_coords,
            generators,
        })
    }

    pub fn theta(&self) -> &InnerFunction {
        &self.theta
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.theta.grid()
    }

    pub fn d(&self) -> usize {
        self.theta.d()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VecFun] {
        &self.basis
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    pub fn defect(&self) -> &DefectSubspace {
        &self.defect
    }

    pub fn defect_tilde(&self) -> &DefectSubspace {
        &self.defect_tilde
    }

    pub fn defect_of(&self, kind: DefectKind) -> &DefectSubspace {
        match kind {
            DefectKind::Plain => &self.defect,
            DefectKind::Tilde => &self.defect_tilde,
        }
    }

    /// Coefficients `⟨f, e_i⟩`; fails if `f` is not in `K_Θ`.
    pub fn coords(&self, f: &VecFun, cfg: &GlobalConfig) -> Result<CVec> {
        let (coords, residual) = self.coords_with_residual(f);
        if residual > 10.0 * cfg.tol_id * f.norm().max(1.0) {
            return Err(Error::NotInModelSpace { residual });
        }
        Ok(coords)
    }

    /// Coefficients together with `‖f − Σ cᵢ eᵢ‖`.
    pub fn coords_with_residual(&self, f: &VecFun) -> (CVec, f64) {
        let coords = CVec::from_iterator(self.dim(), self.basis.iter().map(|e| f.inner(e)));
        let residual = (f - &self.embed(&coords)).norm();
        (coords, residual)
    }

    pub fn embed(&self, coords: &CVec) -> VecFun {
        combine(self.grid(), self.d(), &self.basis, coords.as_slice())
    }

    /// Projects `f` onto `K_Θ` and returns its coordinates.
    pub fn project_coords(&self, f: &VecFun, cfg: &GlobalConfig) -> Result<CVec> {
        let p = project(&self.theta, f, cfg)?;
        self.coords(&p, cfg)
    }

    /// `d × dim` matrix sending coordinates to the value at `λ`.
    pub fn eval_matrix(&self, lambda: C64) -> CMat {
        let mut m = CMat::zeros(self.d(), self.dim());
        for (j, e) in self.basis.iter().enumerate() {
            m.set_column(j, &e.eval(lambda));
        }
        m
    }

    /// Matrix (`dim × d`) of `x ↦ coords(k_λ^Θ x)`.
    pub fn kernel_coords(&self, lambda: C64, cfg: &GlobalConfig) -> Result<CMat> {
        let d = self.d();
        let mut m = CMat::zeros(self.dim(), d);
        for j in 0..d {
            m.set_column(
                j,
                &self.coords(&kernel(&self.theta, lambda, &unit(d, j))?, cfg)?,
            );
        }
        Ok(m)
    }
}
