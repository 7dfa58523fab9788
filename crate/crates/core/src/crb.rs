//! Fisher information, the CRB in its gradient, variation-space and
//! compression-operator forms, identifiability, and the closed-form minimum
//! over observation matrices of fixed power.

use nalgebra::SymmetricEigen;

use crate::cx::{self, RBasis};
use crate::variation::{ParametricChannelModel, VariationSpaceBasis};
use crate::{CMatrix, Error, RMatrix, Real, Result};

/// Circular white Gaussian noise of variance `σ²` per entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    pub sigma2: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(sigma2: T) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > T::zero()) {
            return Err(Error::InvalidNoise(sigma2.to_f64_lossy()));
        }
        Ok(Self { sigma2 })
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.sigma2).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrbReport<T: Real> {
    /// Trace of the CRB on `h`, `+∞` when not identifiable.
    pub value: T,
    /// Fisher information in the coordinates of the route that produced the
    /// report (`θ` for [`crb_direct`], the basis coordinates otherwise).
    pub fim: RMatrix<T>,
    /// Smallest eigenvalue of `Re{UᴴMMᴴU}` for an ℝ-orthonormal `U`.
    pub min_eig_compression: T,
    pub identifiable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiabilityReport<T> {
    pub identifiable: bool,
    /// Number of columns of `M` (observations).
    pub nm_given: usize,
    /// `⌈N_p/2⌉`, the minimal number of observations.
    pub nm_required: usize,
    pub counting_ok: bool,
    pub min_eig: T,
    pub max_eig: T,
}

impl<T: Real> IdentifiabilityReport<T> {
    /// `V_θ ∩ im_ℂ(M)^⊥ = {0}`, which is what a positive-definite
    /// compression means geometrically.
    pub fn intersection_trivial(&self) -> bool {
        self.identifiable
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrbMinResult<T> {
    pub value: T,
    pub c: Vec<T>,
    pub epsilon: usize,
    pub power: T,
    pub sigma2: T,
    /// `σ²N_p²/(4P)`.
    pub lower_bound: T,
    /// `σ²N_p²/(2P)`.
    pub upper_bound: T,
}

fn check_power<T: Real>(power: T) -> Result<()> {
    if !(power.is_finite() && power > T::zero()) {
        return Err(Error::InvalidPower(power.to_f64_lossy()));
    }
    Ok(())
}

fn check_rows<T: Real>(m: &CMatrix<T>, n_d: usize) -> Result<()> {
    if m.nrows() != n_d {
        return Err(Error::DimensionMismatch {
            context: "observation matrix rows",
            expected: n_d,
            found: m.nrows(),
        });
    }
    cx::check_finite(m)
}

/// `(2/σ²)·Re{GᴴMMᴴG}` for a gradient `G`.
pub fn fim_from_gradient<T: Real>(g: &CMatrix<T>, m: &CMatrix<T>, noise: NoiseModel<T>) -> Result<RMatrix<T>> {
    noise.validate()?;
    check_rows(m, g.nrows())?;
    let a = g.adjoint() * m;
    let f = cx::re_part(&(&a * a.adjoint())) * (T::lit(2.0) / noise.sigma2);
    Ok((&f + f.transpose()) * T::lit(0.5))
}

/// Slepian-Bangs Fisher information of `θ`.
pub fn fim<T: Real, Md: ParametricChannelModel<T> + ?Sized>(
    model: &Md,
    theta: &[T],
    m: &CMatrix<T>,
    noise: NoiseModel<T>,
) -> Result<RMatrix<T>> {
    model.check_theta(theta)?;
    fim_from_gradient(&model.gradient(theta)?, m, noise)
}

fn extreme_eigs<T: Real>(s: &RMatrix<T>) -> (T, T) {
    if s.is_empty() {
        return (T::zero(), T::zero());
    }
    let eig = SymmetricEigen::new(s.clone()).eigenvalues;
    (eig.min(), eig.max())
}

fn positive_definite<T: Real>(min: T, max: T) -> bool {
    max > T::zero() && min > T::rank_rtol() * max
}

/// `Tr[A⁻¹B]` through a Cholesky solve.
fn trace_solve<T: Real>(a: &RMatrix<T>, b: &RMatrix<T>) -> Option<T> {
    let x = match a.clone().cholesky() {
        Some(ch) => ch.solve(b),
        None => a.clone().lu().solve(b)?,
    };
    let t = x.trace();
    t.is_finite().then_some(t)
}

fn infinite<T: Real>(fim: RMatrix<T>, min_eig: T) -> CrbReport<T> {
    CrbReport {
        value: infinity(),
        fim,
        min_eig_compression: min_eig,
        identifiable: false,
    }
}

/// `Tr[G·FIM⁻¹·Gᴴ]` with `G = ∂h/∂θ`.
pub fn crb_direct<T: Real, Md: ParametricChannelModel<T> + ?Sized>(
    model: &Md,
    theta: &[T],
    m: &CMatrix<T>,
    noise: NoiseModel<T>,
) -> Result<CrbReport<T>> {
    model.check_theta(theta)?;
    let g = model.gradient(theta)?;
    let f = fim_from_gradient(&g, m, noise)?;
    let min_eig = match cx::r_orthonormalize(&g) {
        Ok((basis, _)) => {
            let (lo, hi) = extreme_eigs(&cx::compression_matrix(&basis, m)?);
            if !positive_definite(lo, hi) {
                return Ok(infinite(f, lo));
            }
            lo
        }
        Err(Error::RankDeficient { .. }) => return Ok(infinite(f, T::zero())),
        Err(e) => return Err(e),
    };
    // Tr[G F⁻¹ Gᴴ] = Tr[F⁻¹ GᴴG]; the imaginary part of GᴴG is skew and
    // contributes nothing against the symmetric F⁻¹.
    let gram = cx::re_part(&(g.adjoint() * &g));
    match trace_solve(&f, &gram) {
        Some(value) => Ok(CrbReport {
            value,
            fim: f,
            min_eig_compression: min_eig,
            identifiable: true,
        }),
        None => Ok(infinite(f, min_eig)),
    }
}

/// `(σ²/2)·Tr[(Re{UᴴMMᴴU})⁻¹]`.
pub fn crb_via_variation_space<T: Real>(
    basis: &VariationSpaceBasis<T>,
    m: &CMatrix<T>,
    noise: NoiseModel<T>,
) -> Result<CrbReport<T>> {
    noise.validate()?;
    check_rows(m, basis.ambient_dim())?;
    let comp = cx::compression_matrix(&basis.basis, m)?;
    let fim = &comp * (T::lit(2.0) / noise.sigma2);
    let (lo, hi) = extreme_eigs(&comp);
    if !positive_definite(lo, hi) {
        return Ok(infinite(fim, lo));
    }
    let k = comp.nrows();
    match trace_solve(&comp, &RMatrix::identity(k, k)) {
        Some(t) => Ok(CrbReport {
            value: noise.sigma2 * T::lit(0.5) * t,
            fim,
            min_eig_compression: lo,
            identifiable: true,
        }),
        None => Ok(infinite(fim, lo)),
    }
}

/// The CRB as `(σ²/2)·Tr[(P_V ∘ MMᴴ)|_V⁻¹]`, with the operator matrix
/// assembled entry by entry from `⟨u_i, P_V(MMᴴu_j)⟩_ℝ`.
pub fn crb_compression_operator<T: Real>(
    basis: &RBasis<T>,
    m: &CMatrix<T>,
    noise: NoiseModel<T>,
) -> Result<T> {
    noise.validate()?;
    check_rows(m, basis.ambient_dim())?;
    let u = basis.matrix();
    let k = basis.dim();
    let mmh = m * m.adjoint();
    let mut op = RMatrix::zeros(k, k);
    for j in 0..k {
        let img = cx::project_r(basis, &(&mmh * u.column(j)))?;
        for i in 0..k {
            op[(i, j)] = cx::r_inner(&u.column(i).into_owned(), &img)?;
        }
    }
    let (lo, hi) = extreme_eigs(&((&op + op.transpose()) * T::lit(0.5)));
    if !positive_definite(lo, hi) {
        return Ok(infinity());
    }
    let inv = op.try_inverse().ok_or(Error::NonIdentifiable)?;
    Ok(noise.sigma2 * T::lit(0.5) * inv.trace())
}

pub fn check_identifiability<T: Real>(
    basis: &VariationSpaceBasis<T>,
    m: &CMatrix<T>,
) -> Result<IdentifiabilityReport<T>> {
    check_rows(m, basis.ambient_dim())?;
    let n_p = basis.dim();
    let nm_required = n_p.div_ceil(2);
    let (min_eig, max_eig) = extreme_eigs(&cx::compression_matrix(&basis.basis, m)?);
    let counting_ok = m.ncols() >= nm_required;
    Ok(IdentifiabilityReport {
        identifiable: counting_ok && positive_definite(min_eig, max_eig),
        nm_given: m.ncols(),
        nm_required,
        counting_ok,
        min_eig,
        max_eig,
    })
}

/// Validates couplings for `N_p` parameters; values a hair outside `[0, 1]`
/// are clamped.
pub(crate) fn validate_couplings<T: Real>(c: &[T], n_params: usize) -> Result<Vec<T>> {
    if c.len() != n_params / 2 {
        return Err(Error::DimensionMismatch {
            context: "coupling list (⌊N_p/2⌋ entries)",
            expected: n_params / 2,
            found: c.len(),
        });
    }
    let slack = T::rank_rtol();
    c.iter()
        .map(|&x| {
            if !x.is_finite() || x < -slack || x > T::one() + slack {
                Err(Error::InvalidCoupling { value: x.to_f64_lossy() })
            } else {
                Ok(x.clamp(T::zero(), T::one()))
            }
        })
        .collect()
}

/// `2σ²/P·(Σ 1/√(1+c_k) + ε/2)²`, the smallest CRB reachable with
/// `‖M‖_F² = P`.
pub fn crb_min<T: Real>(c: &[T], n_params: usize, noise: NoiseModel<T>, power: T) -> Result<CrbMinResult<T>> {
    noise.validate()?;
    check_power(power)?;
    if n_params == 0 {
        return Err(Error::InvalidArgument("N_p must be ≥ 1".into()));
    }
    let c = validate_couplings(c, n_params)?;
    let epsilon = n_params % 2;
    let s = c.iter().fold(T::zero(), |acc, &x| acc + T::one() / (T::one() + x).sqrt())
        + T::lit(epsilon as f64 * 0.5);
    let np2 = T::lit((n_params * n_params) as f64);
    Ok(CrbMinResult {
        value: T::lit(2.0) * noise.sigma2 / power * s * s,
        c,
        epsilon,
        power,
        sigma2: noise.sigma2,
        lower_bound: noise.sigma2 * np2 / (T::lit(4.0) * power),
        upper_bound: noise.sigma2 * np2 / (T::lit(2.0) * power),
    })
}

/// Convenience: the CRB value only, as `+∞` when not identifiable.
pub fn crb_value<T: Real>(basis: &VariationSpaceBasis<T>, m: &CMatrix<T>, noise: NoiseModel<T>) -> Result<T> {
    let r = crb_via_variation_space(basis, m, noise)?;
    Ok(if r.identifiable { r.value } else { infinity() })
}

/// `+∞` for the scalar type.
pub fn infinity<T: Real>() -> T {
    T::one() / T::zero()
}

/// `y = Mᴴh`, noiseless observations (used by the estimation routines).
pub fn observe<T: Real>(m: &CMatrix<T>, h: &crate::CVector<T>) -> crate::CVector<T> {
    m.adjoint() * h
}
