//! Cramér-Rao bounds, identifiability and optimal pilot design for
//! deterministic parametric channel models.
//!
//! The channel `h(θ) ∈ ℂ^{N_d}` depends on `N_p` real parameters and is
//! observed through `y = Mᴴh + n` with circular white Gaussian noise. Every
//! bound in this crate is driven by the *variation space*, the ℝ-span of the
//! columns of `∂h/∂θ`:
//!
//! - [`cx`] holds the complex linear algebra under the real inner product
//!   `Re{xᴴy}` (orthonormalization, skew-symmetric canonical form, projection).
//! - [`variation`] builds and decomposes the variation space.
//! - [`crb`] evaluates the Fisher information, the CRB and its closed-form minimum.
//! - [`pilot`] designs minimal-length optimal observation matrices.
//! - [`models`] ships the least-squares, physical ULA and angle-constrained models.
//! - [`experiments`] produces the single-path and multipath bound curves.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the experiments and
//! the command-line front end use.

pub mod crb;
pub mod cx;
pub mod error;
pub mod experiments;
pub mod models;
pub mod pilot;
pub mod variation;

use nalgebra::{DMatrix, DVector, RealField};

pub use nalgebra::Complex;

pub use error::{Error, Result};

/// Scalar type the numerical core is generic over.
///
/// The thresholds scale with the precision of the type: rank and
/// identifiability decisions use [`Real::rank_rtol`], couplings below
/// [`Real::snap_tol`] are treated as exactly zero.
pub trait Real:
    RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive + Default
{
    /// Relative threshold for numerical rank and positive-definiteness decisions.
    fn rank_rtol() -> Self;
    /// Couplings below this value are snapped to zero.
    fn snap_tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("representable literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn rank_rtol() -> Self {
        1e-10
    }
    fn snap_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn rank_rtol() -> Self {
        1e-5
    }
    fn snap_tol() -> Self {
        1e-6
    }
}

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVector<T> = DVector<Complex<T>>;
/// Dense real matrix.
pub type RMatrix<T> = DMatrix<T>;

pub type ComplexMatrix = CMatrix<f64>;
pub type ComplexVector = CVector<f64>;
pub type RealMatrix = RMatrix<f64>;
pub type RBasisF64 = cx::RBasis<f64>;
pub type SkewBlockFormF64 = cx::SkewBlockForm<f64>;
pub type VariationSpaceBasisF64 = variation::VariationSpaceBasis<f64>;
pub type CanonicalDecompositionF64 = variation::CanonicalDecomposition<f64>;
pub type NoiseModelF64 = crb::NoiseModel<f64>;
pub type CrbReportF64 = crb::CrbReport<f64>;
pub type CrbMinResultF64 = crb::CrbMinResult<f64>;
pub type PilotDesignF64 = pilot::PilotDesign<f64>;
pub type UlaGeometryF64 = models::UlaGeometry;
pub type PathSetF64 = models::PathSet<f64>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
