//! Complex linear algebra under the real inner product `⟨x, y⟩_ℝ = Re{xᴴy}`.
//!
//! A matrix `U` is an *ℝ-orthonormal basis* when `Re{UᴴU} = I`. Its columns
//! span an ℝ-vector space inside `ℂ^{N_d}` which in general is not closed under
//! multiplication by `j`; the skew-symmetric matrix `Im{UᴴU}` measures how far
//! it is from being a ℂ-subspace, and [`skew_canonical_form`] brings that
//! matrix into its 2×2 block normal form.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen, SVD};

use crate::{CMatrix, CVector, Error, RMatrix, Real, Result};

/// Columns that are ℝ-orthonormal: `Re{UᴴU} = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct RBasis<T: Real> {
    u: CMatrix<T>,
}

impl<T: Real> RBasis<T> {
    /// Wraps `u` after checking `‖Re{UᴴU} − I‖_F ≤ 1e-10·K` (scaled for `f32`).
    pub fn from_orthonormal(u: CMatrix<T>) -> Result<Self> {
        check_finite(&u)?;
        let k = u.ncols();
        let gram = re_part(&(u.adjoint() * &u));
        let err = (gram - RMatrix::<T>::identity(k, k)).norm();
        if err > T::rank_rtol() * T::lit(k.max(1) as f64) {
            return Err(Error::InvalidArgument(format!(
                "columns are not ℝ-orthonormal (‖Re{{UᴴU}} − I‖_F = {:e})",
                err.to_f64_lossy()
            )));
        }
        Ok(Self { u })
    }

    pub(crate) fn new_unchecked(u: CMatrix<T>) -> Self {
        Self { u }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.u
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.u
    }

    /// `N_d`, the complex dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.u.nrows()
    }

    /// `K`, the real dimension of the spanned space.
    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    /// Right-multiplies by a real `K×K` matrix. The caller guarantees that it
    /// is orthogonal.
    pub(crate) fn rotate(&self, b: &RMatrix<T>) -> CMatrix<T> {
        &self.u * to_complex(b)
    }
}

/// Real orthogonal `B` with `BᵀAB = Γ`, the canonical block form of a
/// skew-symmetric `A`.
///
/// `Γ` is block diagonal with blocks `[[0, −c_k], [c_k, 0]]`, `c_k` sorted in
/// descending order, followed by a single zero when `K` is odd.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewBlockForm<T: Real> {
    pub b: RMatrix<T>,
    pub gamma: Vec<T>,
    pub has_lone_vector: bool,
}

impl<T: Real> SkewBlockForm<T> {
    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    /// The block-diagonal matrix `Γ`.
    pub fn gamma_matrix(&self) -> RMatrix<T> {
        gamma_matrix(&self.gamma, self.dim())
    }
}

/// Builds the `K×K` block-diagonal `Γ` from couplings.
pub fn gamma_matrix<T: Real>(c: &[T], k: usize) -> RMatrix<T> {
    let mut g = RMatrix::<T>::zeros(k, k);
    for (i, &ci) in c.iter().enumerate() {
        g[(2 * i, 2 * i + 1)] = -ci;
        g[(2 * i + 1, 2 * i)] = ci;
    }
    g
}

/// `Re{xᴴy}`.
pub fn r_inner<T: Real>(x: &CVector<T>, y: &CVector<T>) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "r_inner",
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.dotc(y).re)
}

/// ℝ-orthonormalizes the columns of `g`, returning `(U, R)` with `U·R = G`,
/// `Re{UᴴU} = I` and `R` real upper triangular with a positive diagonal.
///
/// Computed through a real QR factorization of `[Re{G}; Im{G}]`. Fails with
/// [`Error::RankDeficient`] when the stacked matrix has a singular value below
/// `rank_rtol` times the largest one.
pub fn r_orthonormalize<T: Real>(g: &CMatrix<T>) -> Result<(RBasis<T>, RMatrix<T>)> {
    check_finite(g)?;
    let (n, k) = g.shape();
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("empty generator matrix".into()));
    }
    let stacked = real_stack(g);
    let rank = numerical_rank(&stacked);
    if rank < k {
        return Err(Error::RankDeficient {
            context: "generators are not ℝ-independent".into(),
            rank,
            expected: k,
            dependent: dependent_columns(&stacked),
        });
    }

    let qr = stacked.qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..k {
        if r[(i, i)] < T::zero() {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    Ok((RBasis::new_unchecked(real_unstack(&q)), r))
}

/// Numerical rank of a real matrix relative to its largest singular value.
pub fn numerical_rank<T: Real>(a: &RMatrix<T>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = SVD::new(a.clone(), false, false).singular_values;
    let smax = sv.iter().copied().fold(T::zero(), T::max);
    if smax <= T::zero() {
        return 0;
    }
    let tol = T::rank_rtol() * smax;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Indices of columns lying in the span of the preceding ones, found by
/// modified Gram-Schmidt with reorthogonalization.
fn dependent_columns<T: Real>(a: &RMatrix<T>) -> Vec<usize> {
    let scale = a.column_iter().map(|c| c.norm()).fold(T::zero(), T::max);
    let tol = T::rank_rtol() * scale;
    let mut kept: Vec<DVector<T>> = Vec::new();
    let mut dependent = Vec::new();
    for (j, col) in a.column_iter().enumerate() {
        let mut r = col.into_owned();
        for _ in 0..2 {
            for q in &kept {
                let p = q.dot(&r);
                r.axpy(-p, q, T::one());
            }
        }
        let nr = r.norm();
        if nr <= tol {
            dependent.push(j);
        } else {
            kept.push(r / nr);
        }
    }
    dependent
}

/// Canonical 2×2 block form of a real skew-symmetric matrix.
///
/// The input is symmetrized as `(A − Aᵀ)/2` after checking
/// `‖A + Aᵀ‖_F ≤ rank_rtol·(1 + ‖A‖_F)`. Each block is `[[0, −c], [c, 0]]`
/// with `c ≥ 0`, blocks are sorted by descending `c`, and for odd `K` the zero
/// 1×1 block comes last. Couplings below `snap_tol` become exactly zero;
/// couplings marginally above one are clamped, larger ones are rejected.
pub fn skew_canonical_form<T: Real>(a: &RMatrix<T>) -> Result<SkewBlockForm<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "skew_canonical_form",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let k = a.nrows();
    let residual = (a + a.transpose()).norm();
    if residual > T::rank_rtol() * (T::one() + a.norm()) {
        return Err(Error::NotSkewSymmetric {
            residual: residual.to_f64_lossy(),
        });
    }
    let a = (a - a.transpose()) * T::lit(0.5);
    let n_pairs = k / 2;

    // jA is Hermitian; for an eigenpair (c > 0, x + jy) we get Ax = c·y and
    // Ay = −c·x, so (x, y) spans an invariant plane carrying the block
    // [[0, −c], [c, 0]].
    let h: CMatrix<T> = a.map(|x| Complex::new(T::zero(), x));
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut cols: Vec<DVector<T>> = Vec::with_capacity(k);
    for &idx in order.iter().take(n_pairs) {
        if eig.eigenvalues[idx] <= T::snap_tol() {
            break;
        }
        let z = fix_phase(eig.eigenvectors.column(idx).into_owned());
        let x = z.map(|v| v.re);
        let y = z.map(|v| v.im);
        let mut trial = cols.clone();
        if push_orthonormal(&mut trial, x) && push_orthonormal(&mut trial, y) {
            cols = trial;
        }
    }
    complete_basis(&mut cols, k);

    let mut b = RMatrix::<T>::from_columns(&cols);
    let mut pairs: Vec<(T, usize)> = Vec::with_capacity(n_pairs);
    let upper = T::one() + T::default_epsilon().sqrt();
    for p in 0..n_pairs {
        let (i, j) = (2 * p, 2 * p + 1);
        let mut c = b.column(j).dot(&(&a * b.column(i)));
        if c < T::zero() {
            b.swap_columns(i, j);
            c = -c;
        }
        if c < T::snap_tol() {
            c = T::zero();
        }
        if c > upper {
            return Err(Error::InvalidCoupling {
                value: c.to_f64_lossy(),
            });
        }
        pairs.push((c.min(T::one()), p));
    }
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut sorted = RMatrix::<T>::zeros(k, k);
    for (slot, &(_, p)) in pairs.iter().enumerate() {
        sorted.set_column(2 * slot, &b.column(2 * p));
        sorted.set_column(2 * slot + 1, &b.column(2 * p + 1));
    }
    if k % 2 == 1 {
        sorted.set_column(k - 1, &b.column(k - 1));
    }

    Ok(SkewBlockForm {
        b: sorted,
        gamma: pairs.into_iter().map(|(c, _)| c).collect(),
        has_lone_vector: k % 2 == 1,
    })
}

/// Removes the arbitrary phase of an eigenvector: the first entry whose
/// modulus is at least half the largest one becomes real positive.
fn fix_phase<T: Real>(z: CVector<T>) -> CVector<T> {
    let big = z.iter().map(|v| v.modulus()).fold(T::zero(), T::max);
    match z.iter().find(|v| v.modulus() >= big * T::lit(0.5)) {
        Some(p) if p.modulus() > T::zero() => {
            let rot = p.conj() / Complex::new(p.modulus(), T::zero());
            z * rot
        }
        _ => z,
    }
}

/// Orthogonalizes `v` against `cols` (twice) and appends it when it keeps a
/// meaningful component.
fn push_orthonormal<T: Real>(cols: &mut Vec<DVector<T>>, mut v: DVector<T>) -> bool {
    let n0 = v.norm();
    if n0 <= T::zero() {
        return false;
    }
    for _ in 0..2 {
        for q in cols.iter() {
            let p = q.dot(&v);
            v.axpy(-p, q, T::one());
        }
    }
    let nv = v.norm();
    if nv <= T::lit(1e-6) * n0 {
        return false;
    }
    cols.push(v / nv);
    true
}

/// Extends an orthonormal family to a basis of `ℝ^k`, greedily adding the
/// canonical vector with the largest residual.
fn complete_basis<T: Real>(cols: &mut Vec<DVector<T>>, k: usize) {
    while cols.len() < k {
        let mut best: Option<(T, DVector<T>)> = None;
        for i in 0..k {
            let mut v = DVector::<T>::zeros(k);
            v[i] = T::one();
            for _ in 0..2 {
                for q in cols.iter() {
                    let p = q.dot(&v);
                    v.axpy(-p, q, T::one());
                }
            }
            let nv = v.norm();
            if best.as_ref().is_none_or(|(n, _)| nv > *n) {
                best = Some((nv, v));
            }
        }
        let (nv, v) = best.expect("k > 0");
        cols.push(v / nv);
    }
}

/// Orthogonal projection onto `span_ℝ(U)`: `U·Re{Uᴴz}`.
pub fn project_r<T: Real>(basis: &RBasis<T>, z: &CVector<T>) -> Result<CVector<T>> {
    if z.len() != basis.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "project_r",
            expected: basis.ambient_dim(),
            found: z.len(),
        });
    }
    let u = basis.matrix();
    let coords = (u.adjoint() * z).map(|v| Complex::new(v.re, T::zero()));
    Ok(u * coords)
}

/// `Re{Uᴴ M Mᴴ U}`, the matrix of the compression of `MMᴴ` to `span_ℝ(U)`.
pub fn compression_matrix<T: Real>(basis: &RBasis<T>, m: &CMatrix<T>) -> Result<RMatrix<T>> {
    if m.nrows() != basis.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "compression_matrix",
            expected: basis.ambient_dim(),
            found: m.nrows(),
        });
    }
    let a = basis.matrix().adjoint() * m;
    let c = re_part(&(&a * a.adjoint()));
    Ok((&c + c.transpose()) * T::lit(0.5))
}

pub fn check_finite<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn re_part<T: Real>(m: &CMatrix<T>) -> RMatrix<T> {
    m.map(|z| z.re)
}

pub fn im_part<T: Real>(m: &CMatrix<T>) -> RMatrix<T> {
    m.map(|z| z.im)
}

pub fn to_complex<T: Real>(m: &RMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// `[Re{G}; Im{G}]`.
pub fn real_stack<T: Real>(g: &CMatrix<T>) -> RMatrix<T> {
    let (n, k) = g.shape();
    DMatrix::from_fn(2 * n, k, |i, j| {
        if i < n {
            g[(i, j)].re
        } else {
            g[(i - n, j)].im
        }
    })
}

/// Inverse of [`real_stack`].
pub fn real_unstack<T: Real>(s: &RMatrix<T>) -> CMatrix<T> {
    let n = s.nrows() / 2;
    DMatrix::from_fn(n, s.ncols(), |i, j| Complex::new(s[(i, j)], s[(i + n, j)]))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn cmatrix(n: usize, k: usize) -> impl Strategy<Value = CMatrix<f64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * k).prop_map(move |v| {
            DMatrix::from_iterator(n, k, v.into_iter().map(|(a, b)| Complex::new(a, b)))
        })
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_self_adjoint(
            g in cmatrix(6, 4),
            z in cmatrix(6, 1),
            w in cmatrix(6, 1),
        ) {
            let Ok((u, _)) = r_orthonormalize(&g) else { return Ok(()); };
            let z = z.column(0).into_owned();
            let w = w.column(0).into_owned();
            let pz = project_r(&u, &z).unwrap();
            let ppz = project_r(&u, &pz).unwrap();
            prop_assert!((&ppz - &pz).norm() <= 1e-10 * (1.0 + z.norm()));
            prop_assert!(pz.norm() <= z.norm() * (1.0 + 1e-12) + 1e-12);
            let pw = project_r(&u, &w).unwrap();
            let lhs = r_inner(&pz, &w).unwrap();
            let rhs = r_inner(&z, &pw).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + z.norm() * w.norm()));
        }

        #[test]
        fn canonical_form_reconstructs(g in cmatrix(7, 5)) {
            let Ok((u, _)) = r_orthonormalize(&g) else { return Ok(()); };
            let a = im_part(&(u.matrix().adjoint() * u.matrix()));
            let f = skew_canonical_form(&a).unwrap();
            let rec = &f.b * f.gamma_matrix() * f.b.transpose();
            prop_assert!((rec - &a).norm() <= 1e-9 * (1.0 + a.norm()));
            prop_assert!(f.gamma.iter().all(|&c| (0.0..=1.0).contains(&c)));
        }
    }
}
