use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{frob, unitary_deviation, CMat};
use crate::matfun::{InnerFunction, MatFun};
use crate::modelspace::{build_model_space, ModelSpace};

use super::{check, OperatorMatrix, CHECK_SLACK};

/// `(τ_Θ f)(z) = z̄ Θ̃(z) f(z̄)` from `from = K_Θ` onto `to = K_Θ̃`.
///
/// `to` must be built over `Θ̃`; this is checked on the grid. Passing the
/// spaces explicitly keeps `τ_Θ̃ : K_Θ̃ → K_Θ` expressed in the very basis
/// `from` uses, so compositions like `τ_Θ̃ τ_Θ` are plain matrix products.
pub fn tau_between(
    from: &Arc<ModelSpace>,
    to: &Arc<ModelSpace>,
    cfg: &GlobalConfig,
) -> Result<OperatorMatrix> {
    let theta = from.theta().fun();
    let theta_t = to.theta().fun();
    if theta.d() != theta_t.d() || theta.grid().q() != theta_t.grid().q() {
        return Err(Error::DimensionMismatch(
            "tau between incompatible spaces".into(),
        ));
    }
    let grid = theta.grid();
    let gap = (0..grid.q())
        .map(|k| frob(&(theta_t.sample(k) - theta.sample(grid.mirror(k)).adjoint())))
        .fold(0.0, f64::max);
    check(
        "codomain inner function is Theta~",
        gap,
        CHECK_SLACK * cfg.tol_id,
    )?;

    let mut mat = CMat::zeros(to.dim(), from.dim());
    for (i, e) in from.basis().iter().enumerate() {
        let image = theta_t.apply(&e.reflect()).shift(-1);
        mat.set_column(i, &to.coords(&image, cfg)?);
    }
    check(
        "tau unitary",
        unitary_deviation(&mat),
        CHECK_SLACK * cfg.tol_id,
    )?;
    Ok(OperatorMatrix::new(mat, from.clone(), to.clone(), "tau"))
}

/// `τ_Θ : K_Θ → K_Θ̃`, building `K_Θ̃` on the way.
pub fn tau(m: &Arc<ModelSpace>, cfg: &GlobalConfig) -> Result<OperatorMatrix> {
    let tilde = Arc::new(build_model_space(&m.theta().tilde(cfg)?, cfg)?);
    tau_between(m, &tilde, cfg)
}

/// Symbol of `τ_{Θ₂} A_Φ τ_{Θ₁}*`: `Ψ(z) = Θ₂(z̄)* Φ(z̄) Θ₁(z̄)`.
pub fn tau_transfer_symbol(phi: &MatFun, theta1: &InnerFunction, theta2: &InnerFunction) -> MatFun {
    let grid = phi.grid().clone();
    let samples = (0..grid.q())
        .map(|k| {
            let m = grid.mirror(k);
            theta2.fun().sample(m).adjoint() * phi.sample(m) * theta1.fun().sample(m)
        })
        .collect();
    MatFun::from_samples(&grid, samples)
}
