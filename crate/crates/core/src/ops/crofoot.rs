use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{eye, frob, inverse, psd_sqrt, solve, spectral_norm, unitary_deviation, CMat};
use crate::matfun::{InnerFunction, MatFun};
use crate::modelspace::{build_model_space, ModelSpace};

use super::{check, OperatorMatrix, CHECK_SLACK};

/// A strict contraction `W` with its defect roots.
#[derive(Debug, Clone)]
pub struct CrofootParams {
    w: CMat,
    /// `(I − W*W)^{1/2}`
    d_w: CMat,
    /// `(I − WW*)^{1/2}`
    d_w_star: CMat,
}

impl CrofootParams {
    pub fn new(w: CMat, cfg: &GlobalConfig) -> Result<Self> {
        let norm = spectral_norm(&w);
        if norm >= 1.0 - cfg.tol_id || w.nrows() != w.ncols() {
            return Err(Error::NotContraction { norm });
        }
        let n = w.nrows();
        let a = eye(n) - w.adjoint() * &w;
        let b = eye(n) - &w * w.adjoint();
        let d_w = psd_sqrt(&a, cfg.tol_id)?;
        let d_w_star = psd_sqrt(&b, cfg.tol_id)?;
        check("D_W squared", frob(&(&d_w * &d_w - a)), cfg.tol_id)?;
        check(
            "D_W* squared",
            frob(&(&d_w_star * &d_w_star - b)),
            cfg.tol_id,
        )?;
        Ok(Self { w, d_w, d_w_star })
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    pub fn d_w(&self) -> &CMat {
        &self.d_w
    }

    pub fn d_w_star(&self) -> &CMat {
        &self.d_w_star
    }
}

fn solve_left(a: &CMat, b: &CMat) -> Result<CMat> {
    // I − ΘW* is invertible on the circle because ‖ΘW*‖ = ‖W‖ < 1
    solve(a, b).ok_or(Error::NotContraction { norm: 1.0 })
}

/// `D_{W*}(I − Θ(z)W*)⁻¹` on the grid.
fn crofoot_multiplier(theta: &InnerFunction, p: &CrofootParams) -> Result<MatFun> {
    let d = theta.d();
    let w_adj = p.w.adjoint();
    let samples = theta
        .fun()
        .samples()
        .iter()
        .map(|t| {
            let inv = solve_left(&(eye(d) - t * &w_adj), &eye(d))?;
            Ok(&p.d_w_star * inv)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatFun::from_samples(theta.grid(), samples))
}

/// `Θ^W(z) = −W + D_{W*}(I − Θ(z)W*)⁻¹ Θ(z) D_W`, as a sampled inner
/// function of the same McMillan degree.
pub fn crofoot_theta(
    theta: &InnerFunction,
    p: &CrofootParams,
    cfg: &GlobalConfig,
) -> Result<InnerFunction> {
    if p.w.nrows() != theta.d() {
        return Err(Error::DimensionMismatch(
            "W does not match the inner function".into(),
        ));
    }
    let mult = crofoot_multiplier(theta, p)?;
    let samples = mult
        .samples()
        .iter()
        .zip(theta.fun().samples())
        .map(|(g, t)| g * t * &p.d_w - &p.w)
        .collect();
    InnerFunction::from_samples(
        MatFun::from_samples(theta.grid(), samples),
        theta.degree(),
        cfg,
    )
}

/// Crofoot transform `J_W^Θ f = D_{W*}(I − ΘW*)⁻¹ f` from `K_Θ` onto
/// `K_{Θ^W}`. The target space is built here; a rank mismatch there means
/// the grid does not resolve `Θ^W`.
pub fn crofoot(
    m: &Arc<ModelSpace>,
    p: &CrofootParams,
    cfg: &GlobalConfig,
) -> Result<(InnerFunction, OperatorMatrix)> {
    let theta_w = crofoot_theta(m.theta(), p, cfg)?;
    let target = Arc::new(build_model_space(&theta_w, cfg)?);
    let mult = crofoot_multiplier(m.theta(), p)?;
    let mut mat = CMat::zeros(target.dim(), m.dim());
    for (i, e) in m.basis().iter().enumerate() {
        mat.set_column(i, &target.coords(&mult.apply(e), cfg)?);
    }
    check(
        "Crofoot J unitary",
        unitary_deviation(&mat),
        CHECK_SLACK * cfg.tol_id,
    )?;
    Ok((theta_w, OperatorMatrix::new(mat, m.clone(), target, "J_W")))
}

/// Symbol of `J₂ A_Φ J₁*` between `K_{Θ₁^{W₁}}` and `K_{Θ₂^{W₂}}`.
///
/// On these spaces `J*` acts as multiplication by the pointwise inverse of
/// `M = D_{W*}(I − ΘW*)⁻¹`, so the symbol is `M₂⁻* Φ M₁⁻¹`:
///
/// `Ψ = D_{W₂*}⁻¹(I − W₂Θ₂*) Φ (I − Θ₁W₁*) D_{W₁*}⁻¹
///    = (I + W₂Θ₂^{W₂}*)⁻¹ D_{W₂*} Φ D_{W₁*} (I + Θ₁^{W₁}W₁*)⁻¹`.
///
/// The left factor is not `D_{W₂*}(I − Θ₂W₂*)⁻¹`; that multiplier only
/// agrees with `M₂⁻*` when `W₂ = 0`.
pub fn crofoot_symbol(
    phi: &MatFun,
    p1: &CrofootParams,
    p2: &CrofootParams,
    theta1: &InnerFunction,
    theta2: &InnerFunction,
) -> Result<MatFun> {
    let d = phi.d();
    if [p1.w.nrows(), p2.w.nrows(), theta1.d(), theta2.d()]
        .iter()
        .any(|&n| n != d)
    {
        return Err(Error::DimensionMismatch(
            "Crofoot symbol dimensions differ".into(),
        ));
    }
    let inv1 = inverse(&p1.d_w_star).ok_or(Error::NotContraction { norm: 1.0 })?;
    let inv2 = inverse(&p2.d_w_star).ok_or(Error::NotContraction { norm: 1.0 })?;
    let w1_adj = p1.w.adjoint();
    let samples = (0..phi.grid().q())
        .map(|k| {
            let t1 = theta1.fun().sample(k);
            let t2 = theta2.fun().sample(k);
            let left = &inv2 * (eye(d) - &p2.w * t2.adjoint());
            let right = (eye(d) - t1 * &w1_adj) * &inv1;
            left * phi.sample(k) * right
        })
        .collect();
    Ok(MatFun::from_samples(phi.grid(), samples))
}
