use std::sync::Arc;

use crate::config::GlobalConfig;
use crate::error::{Error, Result};
use crate::linalg::{
    eye, frob, kron, lstsq_min_norm, spectral_norm, svd, unvectorize, vectorize, CMat, CVec,
};
use crate::matfun::MatFun;
use crate::modelspace::ModelSpace;
use crate::ops::{check, matto, OperatorMatrix, SymbolPair};

use super::{Flavor, SpaceOps};

/// Upper edge of the band in which neither verdict is trusted, as a
/// multiple of `tol_member`.
const HYSTERESIS: f64 = 100.0;

/// Certificate `(B₁, B₂)` for one of the shift identities.
///
/// `b1` is `dim₂ × d` and acts on coordinates in the orthonormal frame of
/// the domain's defect subspace; `b2` is `dim₁ × d` on the codomain's frame.
#[derive(Debug, Clone)]
pub struct CaraCertificate {
    pub b1: CMat,
    pub b2: CMat,
    /// `‖R − B₁D₁ − D₂B₂*‖_F` with `R` the shift residual.
    pub residual: f64,
    /// `residual / ‖A‖_F` (absolute when `A = 0`).
    pub relative_residual: f64,
    pub flavor: Flavor,
}

/// Unit vectors exposing a violation of the compressed shift identity:
/// `u ⊥ 𝒟₂` (codomain coordinates), `v ⊥ 𝒟₁` (domain coordinates) with
/// `|⟨R v, u⟩| = value`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub u: CVec,
    pub v: CVec,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Member,
    NonMember,
}

#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub is_member: bool,
    pub flavor: Flavor,
    /// Relative least-squares residual of the certificate solve.
    pub lsq_residual: f64,
    /// Relative norm of the compressed residual `Q₂ R Q₁`.
    pub compression_residual: f64,
    pub certificate: Option<CaraCertificate>,
    pub witness: Option<Witness>,
    pub recovered_symbol: Option<SymbolPair>,
    pub roundtrip_error: Option<f64>,
}

fn relative(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        x
    }
}

fn check_shape(a: &CMat, ops1: &SpaceOps, ops2: &SpaceOps) -> Result<()> {
    if a.shape() != (ops2.space.dim(), ops1.space.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "operator of shape {:?} between spaces of dimension {} and {}",
            a.shape(),
            ops1.space.dim(),
            ops2.space.dim()
        )));
    }
    if ops1.space.d() != ops2.space.d() {
        return Err(Error::DimensionMismatch("spaces over different C^d".into()));
    }
    Ok(())
}

/// `A − S₂AS₁*` (plain) or `A − S₂*AS₁` (tilde).
pub fn residual_with(a: &CMat, ops1: &SpaceOps, ops2: &SpaceOps, flavor: Flavor) -> Result<CMat> {
    check_shape(a, ops1, ops2)?;
    let (s1, s2) = (&ops1.shift, &ops2.shift);
    Ok(match flavor {
        Flavor::Plain => a - s2 * a * s1.adjoint(),
        Flavor::Tilde => a - s2.adjoint() * a * s1,
    })
}

pub fn shift_residual(
    a: &OperatorMatrix,
    flavor: Flavor,
    cfg: &GlobalConfig,
) -> Result<OperatorMatrix> {
    let ops1 = SpaceOps::new(a.domain(), cfg)?;
    let ops2 = SpaceOps::new(a.codomain(), cfg)?;
    let r = residual_with(a.mat(), &ops1, &ops2, flavor)?;
    Ok(a.with_mat(r, format!("R_{}", flavor.name())))
}

/// `E₁ = V₁* D₁` (`d × dim₁`) and `F₂ = D₂ V₂` (`dim₂ × d`).
fn defect_factors(ops1: &SpaceOps, ops2: &SpaceOps, flavor: Flavor) -> (CMat, CMat) {
    let e1 = ops1.frame(flavor).adjoint() * ops1.defect_op(flavor);
    let f2 = ops2.defect_op(flavor) * ops2.frame(flavor);
    (e1, f2)
}

/// `B₁D₁ + D₂B₂*` for a certificate of the given flavor.
pub fn certificate_image(
    b1: &CMat,
    b2: &CMat,
    ops1: &SpaceOps,
    ops2: &SpaceOps,
    flavor: Flavor,
) -> CMat {
    let (e1, f2) = defect_factors(ops1, ops2, flavor);
    b1 * e1 + f2 * b2.adjoint()
}

/// Minimum-norm least-squares certificate for the shift identity.
pub fn solve_certificate_with(
    a: &CMat,
    ops1: &SpaceOps,
    ops2: &SpaceOps,
    flavor: Flavor,
    cfg: &GlobalConfig,
) -> Result<CaraCertificate> {
    let r = residual_with(a, ops1, ops2, flavor)?;
    let d = ops1.space.d();
    let (n1, n2) = (ops1.space.dim(), ops2.space.dim());
    for ops in [ops1, ops2] {
        if ops.space.dim() > 0 && ops.frame(flavor).ncols() != d {
            return Err(Error::DegenerateDefect {
                rank: ops.frame(flavor).ncols(),
                expected: d,
            });
        }
    }
    if n1 == 0 || n2 == 0 {
        return Ok(CaraCertificate {
            b1: CMat::zeros(n2, d),
            b2: CMat::zeros(n1, d),
            residual: 0.0,
            relative_residual: 0.0,
            flavor,
        });
    }
    let (e1, f2) = defect_factors(ops1, ops2, flavor);
    // vec(X E₁) = (E₁ᵀ ⊗ I) vec X,  vec(F₂ Y) = (I ⊗ F₂) vec Y,  Y = B₂*
    let left = kron(&e1.transpose(), &eye(n2));
    let right = kron(&eye(n1), &f2);
    let mut system = CMat::zeros(n2 * n1, n2 * d + d * n1);
    system.view_mut((0, 0), left.shape()).copy_from(&left);
    system
        .view_mut((0, n2 * d), right.shape())
        .copy_from(&right);
    let sol = lstsq_min_norm(&system, &vectorize(&r), cfg.tol_rank);
    let b1 = unvectorize(&sol.as_slice()[..n2 * d], n2, d);
    let y = unvectorize(&sol.as_slice()[n2 * d..], d, n1);
    let b2 = y.adjoint();
    let residual = frob(&(&r - &b1 * &e1 - &f2 * &y));
    Ok(CaraCertificate {
        b1,
        b2,
        residual,
        relative_residual: relative(residual, frob(a)),
        flavor,
    })
}

pub fn solve_certificate(
    a: &OperatorMatrix,
    flavor: Flavor,
    cfg: &GlobalConfig,
) -> Result<CaraCertificate> {
    let ops1 = SpaceOps::new(a.domain(), cfg)?;
    let ops2 = SpaceOps::new(a.codomain(), cfg)?;
    solve_certificate_with(a.mat(), &ops1, &ops2, flavor, cfg)
}

/// `Q₂ R Q₁` with `Qᵢ` the projection onto the complement of the defect
/// subspace. The shift identity is solvable exactly when this vanishes,
/// since `D₁` is invertible on `𝒟₁` for pure `Θ₁` and `D₂` has range `𝒟₂`.
pub fn compressed_residual(r: &CMat, ops1: &SpaceOps, ops2: &SpaceOps, flavor: Flavor) -> CMat {
    let k = flavor.defect_kind();
    let q1 = ops1.space.defect_of(k).complement_projector();
    let q2 = ops2.space.defect_of(k).complement_projector();
    q2 * r * q1
}

fn classify(x: f64, tol: f64) -> Option<Verdict> {
    if x <= tol {
        Some(Verdict::Member)
    } else if x > HYSTERESIS * tol {
        Some(Verdict::NonMember)
    } else {
        None
    }
}

/// Decides membership in `MT(Θ₁, Θ₂)`.
///
/// Two independent tests must agree: the relative residual of the
/// least-squares certificate and the relative norm of `Q₂RQ₁`. Values
/// between `tol_member` and `100·tol_member` are reported as
/// [`Error::Inconsistent`]. Members carry a plain certificate, the
/// recovered symbol and the relative round-trip error of `A_{Ψ+Ξ*}`;
/// non-members carry a witness.
pub fn is_matto(
    a: &OperatorMatrix,
    flavor: Flavor,
    cfg: &GlobalConfig,
) -> Result<MembershipReport> {
    let ops1 = SpaceOps::new(a.domain(), cfg)?;
    let ops2 = SpaceOps::new(a.codomain(), cfg)?;
    is_matto_with(a, &ops1, &ops2, flavor, cfg)
}

pub fn is_matto_with(
    a: &OperatorMatrix,
    ops1: &SpaceOps,
    ops2: &SpaceOps,
    flavor: Flavor,
    cfg: &GlobalConfig,
) -> Result<MembershipReport> {
    let scale = frob(a.mat());
    let cert = solve_certificate_with(a.mat(), ops1, ops2, flavor, cfg)?;
    let r = residual_with(a.mat(), ops1, ops2, flavor)?;
    let comp = compressed_residual(&r, ops1, ops2, flavor);
    let lsq = cert.relative_residual;
    let compression = relative(frob(&comp), scale);

    let verdict = match (
        classify(lsq, cfg.tol_member),
        classify(compression, cfg.tol_member),
    ) {
        (Some(x), Some(y)) if x == y => x,
        _ => return Err(Error::Inconsistent { lsq, compression }),
    };

    let mut report = MembershipReport {
        is_member: verdict == Verdict::Member,
        flavor,
        lsq_residual: lsq,
        compression_residual: compression,
        certificate: None,
        witness: None,
        recovered_symbol: None,
        roundtrip_error: None,
    };
    match verdict {
        Verdict::Member => {
            let plain = if flavor == Flavor::Plain {
                cert.clone()
            } else {
                solve_certificate_with(a.mat(), ops1, ops2, Flavor::Plain, cfg)?
            };
            let pair = recover_symbol(&plain, a.domain(), a.codomain(), cfg)?;
            let rebuilt = matto(&pair.symbol(), a.domain(), a.codomain(), cfg)?;
            report.roundtrip_error = Some(relative(frob(&(rebuilt.mat() - a.mat())), scale));
            report.recovered_symbol = Some(pair);
            report.certificate = Some(cert);
        }
        Verdict::NonMember => {
            let top = svd(&comp);
            let value = top.s[0];
            let u = top.u.column(0).into_owned();
            let v = top.v.column(0).into_owned();
            report.witness = Some(Witness { u, v, value });
        }
    }
    Ok(report)
}

/// Symbols `Ψ x = B₁ k₀^{Θ₁} x` and `Ξ x = B₂ k₀^{Θ₂} x` of a plain
/// certificate, so that `A = A_{Ψ+Ξ*}`.
pub fn recover_symbol(
    cert: &CaraCertificate,
    m1: &Arc<ModelSpace>,
    m2: &Arc<ModelSpace>,
    cfg: &GlobalConfig,
) -> Result<SymbolPair> {
    if cert.flavor != Flavor::Plain {
        return Err(Error::FlavorMismatch { expected: "plain" });
    }
    let _ = cfg;
    let psi = symbol_from(&cert.b1, m1, m2);
    let xi = symbol_from(&cert.b2, m2, m1);
    Ok(SymbolPair::new(psi, xi))
}

/// The matrix function whose `j`-th column is `B k₀^{Θ_src} e_j ∈ K_dst`.
fn symbol_from(b: &CMat, src: &ModelSpace, dst: &ModelSpace) -> MatFun {
    let d = src.d();
    let grid = src.grid();
    if src.dim() == 0 || dst.dim() == 0 {
        return MatFun::constant(grid, CMat::zeros(d, d));
    }
    let frame = src.defect().frame();
    let gens = frame.adjoint() * src.defect().generator_coords();
    let cols: Vec<CMat> = (0..d)
        .map(|j| dst.embed(&(b * gens.column(j))).samples())
        .collect();
    let samples = (0..grid.q())
        .map(|k| CMat::from_fn(d, d, |p, j| cols[j][(p, k)]))
        .collect();
    MatFun::from_samples(grid, samples)
}

/// Reconstructs `A` from a plain certificate by the series
/// `A = Σₙ S₂ⁿ (B₁D₁ + D₂B₂*) S₁*ⁿ`, and independently as `A_{Ψ+Ξ*}` with
/// the recovered symbols; the two routes must agree.
pub fn build_from_b(
    b1: &CMat,
    b2: &CMat,
    m1: &Arc<ModelSpace>,
    m2: &Arc<ModelSpace>,
    cfg: &GlobalConfig,
) -> Result<OperatorMatrix> {
    let ops1 = SpaceOps::new(m1, cfg)?;
    let ops2 = SpaceOps::new(m2, cfg)?;
    build_from_b_with(b1, b2, &ops1, &ops2, cfg)
}

pub fn build_from_b_with(
    b1: &CMat,
    b2: &CMat,
    ops1: &SpaceOps,
    ops2: &SpaceOps,
    cfg: &GlobalConfig,
) -> Result<OperatorMatrix> {
    let (m1, m2) = (&ops1.space, &ops2.space);
    let (n1, n2, d) = (m1.dim(), m2.dim(), m1.d());
    if b1.shape() != (n2, d) || b2.shape() != (n1, d) {
        return Err(Error::DimensionMismatch(format!(
            "certificate shapes {:?}, {:?} for spaces of dimension {n1}, {n2}",
            b1.shape(),
            b2.shape()
        )));
    }
    let seed = certificate_image(b1, b2, ops1, ops2, Flavor::Plain);
    let s1_adj = ops1.shift.adjoint();
    let s2 = &ops2.shift;
    let max_terms = 64 * n1.max(n2).max(1);
    let mut sum = CMat::zeros(n2, n1);
    let mut left = eye(n2);
    let mut right = eye(n1);
    let mut terms = 0;
    loop {
        sum += &left * &seed * &right;
        terms += 1;
        left = s2 * left;
        right = right * &s1_adj;
        let tail = spectral_norm(&left) * spectral_norm(&right);
        if tail <= 1e-3 * cfg.tol_id {
            break;
        }
        if terms >= max_terms {
            return Err(Error::NoConvergence { terms, tail });
        }
    }

    let cert = CaraCertificate {
        b1: b1.clone(),
        b2: b2.clone(),
        residual: 0.0,
        relative_residual: 0.0,
        flavor: Flavor::Plain,
    };
    let pair = recover_symbol(&cert, m1, m2, cfg)?;
    let via_symbol = matto(&pair.symbol(), m1, m2, cfg)?;
    check(
        "series and symbol reconstructions agree",
        frob(&(via_symbol.mat() - &sum)),
        10.0 * cfg.tol_id * frob(&sum).max(1.0),
    )?;
    Ok(OperatorMatrix::new(sum, m1.clone(), m2.clone(), "A_from_B"))
}
