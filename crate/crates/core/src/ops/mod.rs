//! Operators between model spaces as dense matrices in the canonical
//! bases: truncated Toeplitz operators, the compressed shift, defect
//! operators, `Ω_Θ`, `τ_Θ` and the Crofoot transform.

mod crofoot;
mod operator;
mod tau;

use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{eye, frob, inverse, CMat};
use crate::matfun::{same_grid, MatFun};
use crate::modelspace::ModelSpace;

pub use crofoot::{crofoot, crofoot_symbol, crofoot_theta, CrofootParams};
pub use operator::{OperatorMatrix, SymbolPair};
pub use tau::{tau, tau_between, tau_transfer_symbol};

/// Slack factor applied to `tol_id` in construction-time self checks.
pub(crate) const CHECK_SLACK: f64 = 10.0;

pub(crate) fn check(what: &str, residual: f64, bound: f64) -> Result<()> {
    if residual > bound || residual.is_nan() {
        return Err(Error::IdentityViolated {
            what: what.to_string(),
            residual,
        });
    }
    Ok(())
}

/// `A_Φ^{Θ₁,Θ₂} f = P_{Θ₂}(Φ f)` in the canonical bases.
pub fn matto(
    phi: &MatFun,
    m1: &Arc<ModelSpace>,
    m2: &Arc<ModelSpace>,
    cfg: &GlobalConfig,
) -> Result<OperatorMatrix> {
    if m1.d() != m2.d() || phi.d() != m1.d() {
        return Err(Error::DimensionMismatch(format!(
            "symbol {0}x{0} between spaces over C^{1} and C^{2}",
            phi.d(),
            m1.d(),
            m2.d()
        )));
    }
    if !same_grid(m1.grid(), m2.grid()) || !same_grid(phi.grid(), m1.grid()) {
        return Err(Error::DimensionMismatch("grids differ".into()));
    }
    if let Some((lo, hi)) = phi.band() {
        let reach =
            m1.theta().degree().max(m2.theta().degree()) + (hi - lo).unsigned_abs() as usize;
        cfg.check_capacity(reach)?;
    }
    let mut mat = CMat::zeros(m2.dim(), m1.dim());
    for (i, e) in m1.basis().iter().enumerate() {
        mat.set_column(i, &m2.project_coords(&phi.apply(e), cfg)?);
    }
    Ok(OperatorMatrix::new(mat, m1.clone(), m2.clone(), "A_Phi"))
}

/// `S_Θ = A_z^Θ` and its adjoint `S_Θ*`.
///
/// Checks that `S_Θ*` acts on every basis function as the backward shift
/// `z̄(f − f(0))`.
pub fn compressed_shift(
    m: &Arc<ModelSpace>,
    cfg: &GlobalConfig,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let z = MatFun::monomial(m.grid(), m.d(), 1);
    let s = matto(&z, m, m, cfg)?.relabel("S_Theta");
    let s_adj = s.adjoint().relabel("S_Theta*");
    let mut backward = CMat::zeros(m.dim(), m.dim());
    for (i, e) in m.basis().iter().enumerate() {
        backward.set_column(i, &m.coords(&e.backward_shift(), cfg)?);
    }
    check(
        "S_Theta* = backward shift",
        frob(&(&backward - s_adj.mat())),
        CHECK_SLACK * cfg.tol_id,
    )?;
    Ok((s, s_adj))
}

/// `D_Θ = I − S_Θ S_Θ*` and `D̃_Θ = I − S_Θ* S_Θ`.
///
/// Checks `D_Θ f = k₀^Θ f(0)` on every basis function.
pub fn defect_ops(
    m: &Arc<ModelSpace>,
    cfg: &GlobalConfig,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (s, s_adj) = compressed_shift(m, cfg)?;
    let n = m.dim();
    let d_plain = eye(n) - s.mat() * s_adj.mat();
    let d_tilde = eye(n) - s_adj.mat() * s.mat();
    if n > 0 {
        let expected = m.defect().generator_coords() * m.eval_matrix(crate::linalg::ZERO);
        check(
            "D_Theta f = k0 f(0)",
            frob(&(&d_plain - expected)),
            CHECK_SLACK * cfg.tol_id,
        )?;
        let t0 = m.theta().theta0();
        let id = eye(m.d());
        let gens = m.defect().generator_coords();
        check(
            "D_Theta k0 x = k0 (I - Theta(0)Theta(0)*) x",
            frob(&(&d_plain * gens - gens * (&id - t0 * t0.adjoint()))),
            CHECK_SLACK * cfg.tol_id,
        )?;
        // The conjugate order I − Θ(0)*Θ(0) is the one that holds on 𝒟̃_Θ.
        let gens = m.defect_tilde().generator_coords();
        check(
            "D~_Theta k~0 x = k~0 (I - Theta(0)*Theta(0)) x",
            frob(&(&d_tilde * gens - gens * (&id - t0.adjoint() * t0))),
            CHECK_SLACK * cfg.tol_id,
        )?;
        let q = m.defect_tilde().complement_projector();
        check(
            "D~_Theta vanishes off the tilde defect space",
            frob(&(&d_tilde * q)),
            CHECK_SLACK * cfg.tol_id,
        )?;
    }
    Ok((
        OperatorMatrix::new(d_plain, m.clone(), m.clone(), "D_Theta"),
        OperatorMatrix::new(d_tilde, m.clone(), m.clone(), "D~_Theta"),
    ))
}

/// `Ω_Θ : 𝒟_Θ → C^d`, `Ω_Θ(k₀^Θ x) = x`, as a `d × d` matrix acting on
/// coordinates in the orthonormal frame of `𝒟_Θ`.
///
/// Checks `Ω_Θ D_Θ f = f(0)` on every basis function.
pub fn omega(m: &Arc<ModelSpace>, cfg: &GlobalConfig) -> Result<CMat> {
    let d = m.d();
    if m.dim() == 0 {
        return Ok(CMat::zeros(d, 0));
    }
    let frame = m.defect().frame();
    if frame.ncols() != d {
        return Err(Error::DegenerateDefect {
            rank: frame.ncols(),
            expected: d,
        });
    }
    let gens = frame.adjoint() * m.defect().generator_coords();
    let om = inverse(&gens).ok_or(Error::DegenerateDefect {
        rank: d - 1,
        expected: d,
    })?;
    let (d_plain, _) = defect_ops(m, cfg)?;
    let lhs = &om * frame.adjoint() * d_plain.mat();
    check(
        "Omega D f = f(0)",
        frob(&(lhs - m.eval_matrix(crate::linalg::ZERO))),
        CHECK_SLACK * cfg.tol_id,
    )?;
    Ok(om)
}
