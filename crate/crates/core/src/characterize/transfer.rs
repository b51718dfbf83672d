use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::ops::OperatorMatrix;

use super::{CaraCertificate, Flavor};

fn check_tau(a_dims: (usize, usize), tau1: &OperatorMatrix, tau2: &OperatorMatrix) -> Result<()> {
    let (rows, cols) = a_dims;
    if tau1.mat().ncols() != cols || tau2.mat().ncols() != rows {
        return Err(Error::DimensionMismatch(format!(
            "operator {rows}x{cols} does not match tau maps on spaces of dimension {} and {}",
            tau1.mat().ncols(),
            tau2.mat().ncols()
        )));
    }
    Ok(())
}

/// `Ã = τ₂ A τ₁*`, an operator from `K_Θ̃₁` to `K_Θ̃₂`.
///
/// `tau1` and `tau2` are `τ_{Θ₁}` and `τ_{Θ₂}` as produced by
/// [`crate::ops::tau_between`]; their codomains become the spaces of `Ã`.
pub fn tau_transfer(
    a: &OperatorMatrix,
    tau1: &OperatorMatrix,
    tau2: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    check_tau(a.mat().shape(), tau1, tau2)?;
    let mat = tau2.mat() * a.mat() * tau1.mat().adjoint();
    Ok(OperatorMatrix::new(
        mat,
        tau1.codomain().clone(),
        tau2.codomain().clone(),
        format!("tau {}", a.label()),
    ))
}

/// Turns a tilde certificate of `A` into a plain certificate of
/// `τ₂Aτ₁*` on the tilde spaces:
/// `B₁ = τ₂ B̃₁ τ₁*`, `B₂ = τ₁ B̃₂ τ₂*` restricted to the defect subspaces.
///
/// Both `τ`s are unitary, so the residual carries over unchanged.
pub fn tilde_certificate_convert(
    cert: &CaraCertificate,
    tau1: &OperatorMatrix,
    tau2: &OperatorMatrix,
    cfg: &GlobalConfig,
) -> Result<CaraCertificate> {
    if cert.flavor != Flavor::Tilde {
        return Err(Error::FlavorMismatch { expected: "tilde" });
    }
    if cert.relative_residual > cfg.tol_member {
        return Err(Error::ResidualTooLarge {
            residual: cert.relative_residual,
        });
    }
    check_tau((cert.b1.nrows(), cert.b2.nrows()), tau1, tau2)?;
    let vt1 = tau1.domain().defect_tilde().frame();
    let vt2 = tau2.domain().defect_tilde().frame();
    let w1 = tau1.codomain().defect().frame();
    let w2 = tau2.codomain().defect().frame();
    let (t1, t2) = (tau1.mat(), tau2.mat());
    Ok(CaraCertificate {
        b1: t2 * &cert.b1 * vt1.adjoint() * t1.adjoint() * w1,
        b2: t1 * &cert.b2 * vt2.adjoint() * t2.adjoint() * w2,
        residual: cert.residual,
        relative_residual: cert.relative_residual,
        flavor: Flavor::Plain,
    })
}

/// Inverse of [`tilde_certificate_convert`]: a plain certificate of `Ã`
/// on the tilde spaces back to a tilde certificate of `A = τ₂*Ãτ₁`.
pub fn plain_to_tilde_certificate(
    cert: &CaraCertificate,
    tau1: &OperatorMatrix,
    tau2: &OperatorMatrix,
) -> Result<CaraCertificate> {
    if cert.flavor != Flavor::Plain {
        return Err(Error::FlavorMismatch { expected: "plain" });
    }
    check_tau((cert.b1.nrows(), cert.b2.nrows()), tau1, tau2)?;
    let vt1 = tau1.domain().defect_tilde().frame();
    let vt2 = tau2.domain().defect_tilde().frame();
    let w1 = tau1.codomain().defect().frame();
    let w2 = tau2.codomain().defect().frame();
    let (t1, t2) = (tau1.mat(), tau2.mat());
    Ok(CaraCertificate {
        b1: t2.adjoint() * &cert.b1 * w1.adjoint() * t1 * vt1,
        b2: t1.adjoint() * &cert.b2 * w2.adjoint() * t2 * vt2,
        residual: cert.residual,
        relative_residual: cert.relative_residual,
        flavor: Flavor::Tilde,
    })
}
