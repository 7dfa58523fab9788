//! Variation space of a parametric channel model and its canonical
//! decomposition into mutually ℂ-orthogonal planes.

use nalgebra::Complex;

use crate::cx::{self, RBasis};
use crate::{CMatrix, CVector, Error, Real, Result};

/// A differentiable channel map `θ ∈ ℝ^{N_p} ↦ h ∈ ℂ^{N_d}`.
///
/// Implementations must be re-entrant; the gradient columns follow the order
/// of the entries of `θ`.
pub trait ParametricChannelModel<T: Real>: Send + Sync {
    fn name(&self) -> String;
    /// `N_d`.
    fn n_dims(&self) -> usize;
    /// `N_p`.
    fn n_params(&self) -> usize;
    fn evaluate(&self, theta: &[T]) -> Result<CVector<T>>;
    /// `∂h/∂θ`, an `N_d × N_p` complex matrix.
    fn gradient(&self, theta: &[T]) -> Result<CMatrix<T>>;

    fn check_theta(&self, theta: &[T]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                context: "parameter vector",
                expected: self.n_params(),
                found: theta.len(),
            });
        }
        Ok(())
    }
}

/// Where a variation-space basis came from.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSource<T> {
    /// Exact variation space of a model at given parameters.
    Model { model: String, theta: Vec<T> },
    /// Built from estimated quantities (e.g. estimated azimuths).
    Estimated { description: String },
    /// Supplied directly by the caller.
    Given,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationSpaceBasis<T: Real> {
    pub basis: RBasis<T>,
    pub source: BasisSource<T>,
}

impl<T: Real> VariationSpaceBasis<T> {
    /// ℝ-orthonormalizes a generating family.
    pub fn from_generators(generators: &CMatrix<T>, source: BasisSource<T>) -> Result<Self> {
        let (basis, _) = cx::r_orthonormalize(generators)?;
        Ok(Self { basis, source })
    }

    pub fn from_basis(basis: RBasis<T>) -> Self {
        Self {
            basis,
            source: BasisSource::Given,
        }
    }

    pub fn u(&self) -> &CMatrix<T> {
        self.basis.matrix()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ambient_dim()
    }

    pub fn is_estimated(&self) -> bool {
        matches!(self.source, BasisSource::Estimated { .. })
    }
}

/// ℝ-orthonormal basis `V = (v_1, w_1, …, v_m, w_m[, v_{m+1}])` of a variation
/// space with `v_kᴴw_l = −j·c_k·δ_kl` and distinct planes ℂ-orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDecomposition<T: Real> {
    pub v: CMatrix<T>,
    /// Couplings `c_k ∈ [0, 1]`, descending.
    pub c: Vec<T>,
    /// `N_p` odd: the last column of `v` is the lone vector.
    pub odd: bool,
}

impl<T: Real> CanonicalDecomposition<T> {
    pub fn n_params(&self) -> usize {
        self.v.ncols()
    }

    pub fn n_pairs(&self) -> usize {
        self.c.len()
    }

    /// `ε = N_p mod 2`.
    pub fn epsilon(&self) -> usize {
        usize::from(self.odd)
    }

    pub fn v_col(&self, k: usize) -> CVector<T> {
        self.v.column(2 * k).into_owned()
    }

    pub fn w_col(&self, k: usize) -> CVector<T> {
        self.v.column(2 * k + 1).into_owned()
    }

    pub fn lone(&self) -> Option<CVector<T>> {
        self.odd
            .then(|| self.v.column(self.v.ncols() - 1).into_owned())
    }

    /// `V` viewed as an ℝ-orthonormal basis of the same space.
    pub fn basis(&self) -> VariationSpaceBasis<T> {
        VariationSpaceBasis::from_basis(RBasis::new_unchecked(self.v.clone()))
    }
}

/// ℝ-orthonormal basis of `span_ℝ(∂h/∂θ)` at `theta`.
pub fn variation_space<T: Real, M: ParametricChannelModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
) -> Result<VariationSpaceBasis<T>> {
    model.check_theta(theta)?;
    let g = model.gradient(theta)?;
    let source = BasisSource::Model {
        model: model.name(),
        theta: theta.to_vec(),
    };
    VariationSpaceBasis::from_generators(&g, source).map_err(|e| match e {
        Error::RankDeficient {
            rank,
            expected,
            dependent,
            ..
        } => Error::RankDeficient {
            context: format!("dim_ℝ(V_θ) < N_p for {}", model.name()),
            rank,
            expected,
            dependent,
        },
        other => other,
    })
}

/// Canonical decomposition `V = U·B` from the block form of `Im{UᴴU}`.
pub fn canonical_decompose<T: Real>(basis: &VariationSpaceBasis<T>) -> Result<CanonicalDecomposition<T>> {
    let u = basis.u();
    let a = cx::im_part(&(u.adjoint() * u));
    let form = cx::skew_canonical_form(&a)?;
    Ok(CanonicalDecomposition {
        v: basis.basis.rotate(&form.b),
        c: form.gamma,
        odd: form.has_lone_vector,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenspaceReport<T> {
    /// `max ‖P_E P_jE x − c_k² x‖` over the basis vectors `x ∈ {v_k, w_k}`
    /// and the lone vector (with `c = 0`).
    pub max_residual: T,
    pub residuals: Vec<T>,
}

/// Checks that every canonical plane lies in the eigenspace of
/// `P_E ∘ P_jE` for the eigenvalue `c_k²`.
pub fn verify_eigenspace_property<T: Real>(decomp: &CanonicalDecomposition<T>) -> EigenspaceReport<T> {
    let e = RBasis::new_unchecked(decomp.v.clone());
    let je = RBasis::new_unchecked(&decomp.v * Complex::new(T::zero(), T::one()));
    let mut residuals = Vec::with_capacity(decomp.n_params());
    for j in 0..decomp.n_params() {
        let ck = decomp.c.get(j / 2).copied().unwrap_or_else(T::zero);
        let x = decomp.v.column(j).into_owned();
        let composed = cx::project_r(&e, &cx::project_r(&je, &x).expect("dims"))
            .expect("dims");
        residuals.push((composed - x * Complex::new(ck * ck, T::zero())).norm());
    }
    EigenspaceReport {
        max_residual: residuals.iter().copied().fold(T::zero(), T::max),
        residuals,
    }
}
