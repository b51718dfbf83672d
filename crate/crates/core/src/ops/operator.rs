use std::fmt;
use std::sync::Arc;

use crate::linalg::{frob, CMat};
use crate::matfun::MatFun;
use crate::modelspace::ModelSpace;

/// A linear map `K_{Θ₁} → K_{Θ₂}` as a `dim₂ × dim₁` matrix in the
/// canonical bases.
#[derive(Clone)]
pub struct OperatorMatrix {
    mat: CMat,
    domain: Arc<ModelSpace>,
    codomain: Arc<ModelSpace>,
    label: String,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("label", &self.label)
            .field("shape", &self.mat.shape())
            .finish()
    }
}

impl OperatorMatrix {
    pub fn new(
        mat: CMat,
        domain: Arc<ModelSpace>,
        codomain: Arc<ModelSpace>,
        label: impl Into<String>,
    ) -> Self {
        assert_eq!(
            mat.shape(),
            (codomain.dim(), domain.dim()),
            "operator shape does not match its spaces"
        );
        Self {
            mat,
            domain,
            codomain,
            label: label.into(),
        }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn domain(&self) -> &Arc<ModelSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<ModelSpace> {
        &self.codomain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same spaces, new matrix.
    pub fn with_mat(&self, mat: CMat, label: impl Into<String>) -> Self {
        Self::new(mat, self.domain.clone(), self.codomain.clone(), label)
    }

    /// Hilbert-space adjoint, with domain and codomain swapped.
    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            label: format!("{}*", self.label),
        }
    }

    pub fn norm(&self) -> f64 {
        frob(&self.mat)
    }
}

/// A symbol `Φ = Ψ + Ξ*` with analytic `Ψ`, `Ξ`.
#[derive(Debug, Clone)]
pub struct SymbolPair {
    pub psi: MatFun,
    pub xi: MatFun,
}

impl SymbolPair {
    pub fn new(psi: MatFun, xi: MatFun) -> Self {
        Self { psi, xi }
    }

    pub fn symbol(&self) -> MatFun {
        &self.psi + &self.xi.adjoint()
    }

    /// Norm of the negative-frequency parts of `Ψ` and `Ξ`.
    pub fn analyticity_defect(&self) -> f64 {
        self.psi
            .antianalytic_norm()
            .max(self.xi.antianalytic_norm())
    }
}
