//! Optimal observation matrices of minimal length `⌈N_p/2⌉` and the
//! certificates that check their optimality.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::crb::{self, NoiseModel};
use crate::variation::{CanonicalDecomposition, VariationSpaceBasis};
use crate::{cx, CMatrix, CVector, Error, RMatrix, Real, Result};

/// Outcome of the optimality checks on a design.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificates<T> {
    /// Largest off-diagonal magnitude of `Re{VᴴMMᴴV}`.
    pub diagonal_residual: T,
    /// `max_k |d_k|` with `d_k = √(1−c_k²)·Re{ũ_k⁺ᴴ MMᴴ ũ_k⁻}` (pairs with
    /// `c_k = 1` have no `ũ_k⁻` and are skipped).
    pub dk_residual: T,
    /// Received powers `P_k⁺ = ‖Mᴴũ_k⁺‖²`, then `‖Mᴴv_lone‖²` for odd `N_p`.
    pub column_powers: Vec<T>,
    /// Optimal powers `2P/(C√(1+c_k))`, then `P/C` for odd `N_p`.
    pub expected_powers: Vec<T>,
    /// `max_k |P_k⁺ − expected_k|`.
    pub power_residual: T,
    /// `‖M‖_F²`.
    pub total_power: T,
}

impl<T: Real> Certificates<T> {
    /// All residuals below `tol·P`.
    pub fn passes(&self, power: T, tol: T) -> bool {
        let lim = tol * power;
        self.diagonal_residual <= lim
            && self.dk_residual <= lim
            && self.power_residual <= lim
            && (self.total_power - power).abs() <= lim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotDesign<T: Real> {
    /// `N_d × ⌈N_p/2⌉`.
    pub m: CMatrix<T>,
    pub power: T,
    /// `C = 2Σ 1/√(1+c_k) + ε`.
    pub c_norm: T,
    /// CRB achieved on the design space for `σ² = 1`.
    pub crb_unit_noise: T,
    pub certificates: Certificates<T>,
}

impl<T: Real> PilotDesign<T> {
    /// The CRB scales linearly with `σ²`.
    pub fn achieved_crb(&self, noise: NoiseModel<T>) -> T {
        self.crb_unit_noise * noise.sigma2
    }

    pub fn n_cols(&self) -> usize {
        self.m.ncols()
    }
}

fn check_power<T: Real>(power: T) -> Result<()> {
    if !(power.is_finite() && power > T::zero()) {
        return Err(Error::InvalidPower(power.to_f64_lossy()));
    }
    Ok(())
}

/// `C = 2Σ_k 1/√(1+c_k) + ε`.
pub fn normalization<T: Real>(c: &[T], odd: bool) -> T {
    let two = T::lit(2.0);
    c.iter().fold(T::zero(), |acc, &x| acc + two / (T::one() + x).sqrt())
        + if odd { T::one() } else { T::zero() }
}

fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Optimal observation matrix for the decomposed space: column `k` is
/// `√(P/C)·(v_k + j·w_k)/(1+c_k)^{3/4}`, plus `√(P/C)·v_lone` when `N_p` is odd.
pub fn design_observation_matrix<T: Real>(
    decomp: &CanonicalDecomposition<T>,
    power: T,
) -> Result<PilotDesign<T>> {
    check_power(power)?;
    let c = crb::validate_couplings(&decomp.c, decomp.n_params())?;
    let c_norm = normalization(&c, decomp.odd);
    let scale = (power / c_norm).sqrt();
    let j = cplx(T::zero(), T::one());
    let mut cols: Vec<CVector<T>> = Vec::with_capacity(decomp.n_params().div_ceil(2));
    for (k, &ck) in c.iter().enumerate() {
        let a = scale / (T::one() + ck).powf(T::lit(0.75));
        cols.push((decomp.v_col(k) + decomp.w_col(k) * j) * cplx(a, T::zero()));
    }
    if let Some(lone) = decomp.lone() {
        cols.push(lone * cplx(scale, T::zero()));
    }
    let m = CMatrix::from_columns(&cols);
    finish(decomp, m, power, c_norm)
}

/// Same design written as `M = V·S·D` with the selector `S` pairing `v_k`
/// with `j·w_k` and the diagonal power allocation `D`.
pub fn design_via_selector<T: Real>(
    decomp: &CanonicalDecomposition<T>,
    power: T,
) -> Result<PilotDesign<T>> {
    check_power(power)?;
    let c = crb::validate_couplings(&decomp.c, decomp.n_params())?;
    let n_p = decomp.n_params();
    let n_cols = n_p.div_ceil(2);
    let c_norm = normalization(&c, decomp.odd);
    let mut s = CMatrix::zeros(n_p, n_cols);
    let mut d = CMatrix::zeros(n_cols, n_cols);
    let scale = (power / c_norm).sqrt();
    for k in 0..n_cols {
        s[(2 * k, k)] = cplx(T::one(), T::zero());
        if 2 * k + 1 < n_p {
            s[(2 * k + 1, k)] = cplx(T::zero(), T::one());
        }
        let ck = c.get(k).copied();
        let a = match ck {
            Some(ck) => scale / (T::one() + ck).powf(T::lit(0.75)),
            None => scale,
        };
        d[(k, k)] = cplx(a, T::zero());
    }
    let m = &decomp.v * s * d;
    finish(decomp, m, power, c_norm)
}

fn finish<T: Real>(
    decomp: &CanonicalDecomposition<T>,
    m: CMatrix<T>,
    power: T,
    c_norm: T,
) -> Result<PilotDesign<T>> {
    let certificates = verify_optimality_certificates(decomp, &m)?;
    let unit = NoiseModel { sigma2: T::one() };
    let crb_unit_noise = crb::crb_value(&decomp.basis(), &m, unit)?;
    Ok(PilotDesign {
        m,
        power,
        c_norm,
        crb_unit_noise,
        certificates,
    })
}

/// Optimality certificates of an arbitrary `M` relative to a decomposition.
/// The expected powers are those of the optimal design at power `‖M‖_F²`.
pub fn verify_optimality_certificates<T: Real>(
    decomp: &CanonicalDecomposition<T>,
    m: &CMatrix<T>,
) -> Result<Certificates<T>> {
    let v = &decomp.v;
    if m.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch {
            context: "observation matrix rows",
            expected: v.nrows(),
            found: m.nrows(),
        });
    }
    let c = crb::validate_couplings(&decomp.c, decomp.n_params())?;
    let total_power = m.norm_squared();
    let mh = m.adjoint();

    let q = cx::re_part(&{
        let a = &mh * v;
        a.adjoint() * a
    });
    let mut diagonal_residual = T::zero();
    for i in 0..q.nrows() {
        for jx in 0..q.ncols() {
            if i != jx {
                diagonal_residual = diagonal_residual.max(q[(i, jx)].abs());
            }
        }
    }

    let c_norm = normalization(&c, decomp.odd);
    let j = cplx(T::zero(), T::one());
    let two = T::lit(2.0);
    let mut dk_residual = T::zero();
    let mut column_powers = Vec::with_capacity(c.len() + 1);
    let mut expected_powers = Vec::with_capacity(c.len() + 1);
    for (k, &ck) in c.iter().enumerate() {
        let (vk, wk) = (decomp.v_col(k), decomp.w_col(k));
        let plus = (&vk + &wk * j) / cplx((two * (T::one() + ck)).sqrt(), T::zero());
        let mp = &mh * &plus;
        column_powers.push(mp.norm_squared());
        expected_powers.push(two * total_power / (c_norm * (T::one() + ck).sqrt()));
        if T::one() - ck > T::snap_tol() {
            let minus = (&vk - &wk * j) / cplx((two * (T::one() - ck)).sqrt(), T::zero());
            let mm = &mh * &minus;
            let dk = (T::one() - ck * ck).sqrt() * mp.dotc(&mm).re;
            dk_residual = dk_residual.max(dk.abs());
        }
    }
    if let Some(lone) = decomp.lone() {
        column_powers.push((&mh * lone).norm_squared());
        expected_powers.push(total_power / c_norm);
    }
    let power_residual = column_powers
        .iter()
        .zip(&expected_powers)
        .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()));

    Ok(Certificates {
        diagonal_residual,
        dk_residual,
        column_powers,
        expected_powers,
        power_residual,
        total_power,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Iteration budget per restart.
    pub max_iters: usize,
    /// Stop a restart once the relative decrease of an accepted step is
    /// below this value.
    pub tol: f64,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self {
            restarts: 500,
            seed: 0,
            max_iters: 2000,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceResult<T> {
    /// Best CRB found (`+∞` if no iterate was identifiable).
    pub value: T,
    /// Some restart ran out of iterations before converging.
    pub budget_exhausted: bool,
    /// No starting point was identifiable.
    pub never_identifiable: bool,
}

/// Numerical minimization of the CRB over `M ∈ ℂ^{N_d × n_cols}` with
/// `‖M‖_F² = P`, by projected gradient descent on the sphere from random
/// starting points. Intended as an independent check of the closed form on
/// small problems.
pub fn brute_force_optimal_crb<T: Real>(
    basis: &VariationSpaceBasis<T>,
    noise: NoiseModel<T>,
    power: T,
    n_cols: usize,
    config: BruteForceConfig,
) -> Result<BruteForceResult<T>> {
    check_power(power)?;
    NoiseModel::new(noise.sigma2)?;
    if n_cols == 0 {
        return Err(Error::InvalidArgument("n_cols must be ≥ 1".into()));
    }
    let runs: Vec<(T, bool, bool)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            descend(basis, noise, power, n_cols, &config, &mut rng)
        })
        .collect();
    let mut best = crb::infinity::<T>();
    let mut exhausted = false;
    let mut any_identifiable = false;
    for (v, ex, ident) in runs {
        if v < best {
            best = v;
        }
        exhausted |= ex;
        any_identifiable |= ident;
    }
    Ok(BruteForceResult {
        value: best,
        budget_exhausted: exhausted,
        never_identifiable: !any_identifiable,
    })
}

/// CRB and its Euclidean gradient `−σ²·U·C⁻²·UᴴM`.
fn value_and_gradient<T: Real>(
    u: &CMatrix<T>,
    m: &CMatrix<T>,
    sigma2: T,
) -> Option<(T, CMatrix<T>)> {
    let a = u.adjoint() * m;
    let c = cx::re_part(&(&a * a.adjoint()));
    let c = (&c + c.transpose()) * T::lit(0.5);
    let n = c.nrows();
    let eig = nalgebra::SymmetricEigen::new(c.clone()).eigenvalues;
    if eig.max() <= T::zero() || eig.min() <= T::rank_rtol() * eig.max() {
        return None;
    }
    let inv = c.cholesky()?.solve(&RMatrix::identity(n, n));
    let value = sigma2 * T::lit(0.5) * inv.trace();
    if !value.is_finite() || value <= T::zero() {
        return None;
    }
    let w = cx::to_complex(&(&inv * &inv));
    let grad = u * w * a * cplx(-sigma2, T::zero());
    Some((value, grad))
}

fn descend<T: Real>(
    basis: &VariationSpaceBasis<T>,
    noise: NoiseModel<T>,
    power: T,
    n_cols: usize,
    config: &BruteForceConfig,
    rng: &mut ChaCha8Rng,
) -> (T, bool, bool) {
    let u = basis.u();
    let n_d = u.nrows();
    let mut m = CMatrix::from_fn(n_d, n_cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cplx(T::lit(re), T::lit(im))
    });
    let radius = power.sqrt();
    m *= cplx(radius / m.norm(), T::zero());
    // Identifiability is a property of the column count and generic `M`; a
    // non-identifiable start means the random draw (or the size) is deficient.
    let Some((mut f, mut g)) = value_and_gradient(u, &m, noise.sigma2) else {
        return (crb::infinity(), false, false);
    };
    let tol = T::lit(config.tol);
    let mut step = T::lit(0.1) * radius / g.norm().max(T::lit(1e-30));
    for _ in 0..config.max_iters {
        // tangent component of the gradient on the sphere
        let radial = m.iter().zip(g.iter()).fold(T::zero(), |s, (a, b)| s + (a.conj() * b).re) / power;
        let gt = &g - &m * cplx(radial, T::zero());
        let mut accepted = false;
        while step > T::lit(1e-30) {
            let mut trial = &m - &gt * cplx(step, T::zero());
            let norm = trial.norm();
            trial *= cplx(radius / norm, T::zero());
            if let Some((ft, gtr)) = value_and_gradient(u, &trial, noise.sigma2) {
                if ft < f {
                    let rel = (f - ft) / f;
                    m = trial;
                    f = ft;
                    g = gtr;
                    step *= T::lit(1.5);
                    accepted = true;
                    if rel < tol {
                        return (f, false, true);
                    }
                    break;
                }
            }
            step *= T::lit(0.5);
        }
        if !accepted {
            return (f, false, true);
        }
    }
    (f, true, true)
}
