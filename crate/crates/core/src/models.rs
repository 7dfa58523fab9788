//! Channel models for a base station equipped with a half-wavelength uniform
//! linear array: the least-squares model, the physical multipath model and
//! the angle-constrained model, plus the Kronecker observation builder.
//!
//! Antenna `n` sits at `y_n = (n − (N_t − 1)/2)·λ/2`, so the steering vector
//! has entries `exp(jπ·(n − (N_t − 1)/2)·sin φ)/√N_t`. The array is centered,
//! which makes `e(φ)ᴴ ∂e/∂φ = 0` exactly.

use nalgebra::{Complex, DMatrix};

use crate::variation::{BasisSource, ParametricChannelModel, VariationSpaceBasis};
use crate::{CMatrix, CVector, Error, RMatrix, Real, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UlaGeometry {
    n_antennas: usize,
}

impl UlaGeometry {
    pub fn new(n_antennas: usize) -> Self {
        assert!(n_antennas >= 1, "a ULA needs at least one antenna");
        Self { n_antennas }
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    /// Antenna offsets from the array center in half-wavelength units.
    pub fn offsets<T: Real>(&self) -> Vec<T> {
        let center = (self.n_antennas as f64 - 1.0) / 2.0;
        (0..self.n_antennas)
            .map(|n| T::lit(n as f64 - center))
            .collect()
    }
}

/// Unit-norm array response `e(φ)`.
pub fn steering_vector<T: Real>(geom: &UlaGeometry, phi: T) -> CVector<T> {
    let scale = T::one() / T::lit(geom.n_antennas() as f64).sqrt();
    let k = T::pi() * phi.sin();
    CVector::from_iterator(
        geom.n_antennas(),
        geom.offsets::<T>().into_iter().map(|y| {
            let (s, c) = (k * y).sin_cos();
            Complex::new(c * scale, s * scale)
        }),
    )
}

/// `∂e/∂φ`, with entries `jπ·y_n·cos φ·e_n(φ)`.
pub fn steering_derivative<T: Real>(geom: &UlaGeometry, phi: T) -> CVector<T> {
    let e = steering_vector(geom, phi);
    let k = T::pi() * phi.cos();
    let offsets = geom.offsets::<T>();
    CVector::from_fn(geom.n_antennas(), |n, _| {
        e[n] * Complex::new(T::zero(), k * offsets[n])
    })
}

/// `Ê = (e(φ_1), …, e(φ_L))`.
pub fn steering_matrix<T: Real>(geom: &UlaGeometry, azimuths: &[T]) -> CMatrix<T> {
    let cols: Vec<_> = azimuths.iter().map(|&a| steering_vector(geom, a)).collect();
    if cols.is_empty() {
        return CMatrix::zeros(geom.n_antennas(), 0);
    }
    CMatrix::from_columns(&cols)
}

/// Wraps an angle into `[−π, π)`.
pub fn wrap_azimuth<T: Real>(phi: T) -> T {
    if phi >= -T::pi() && phi < T::pi() {
        return phi;
    }
    let two_pi = T::two_pi();
    let mut x = (phi + T::pi()) % two_pi;
    if x < T::zero() {
        x += two_pi;
    }
    x - T::pi()
}

/// Complex gains and azimuths of `L ≥ 1` propagation paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet<T: Real> {
    pub gains: Vec<Complex<T>>,
    pub azimuths: Vec<T>,
}

impl<T: Real> PathSet<T> {
    pub fn new(gains: Vec<Complex<T>>, azimuths: Vec<T>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidArgument("a path set needs at least one path".into()));
        }
        if gains.len() != azimuths.len() {
            return Err(Error::DimensionMismatch {
                context: "path gains vs azimuths",
                expected: gains.len(),
                found: azimuths.len(),
            });
        }
        let azimuths = azimuths.into_iter().map(wrap_azimuth).collect();
        Ok(Self { gains, azimuths })
    }

    pub fn n_paths(&self) -> usize {
        self.gains.len()
    }

    /// Physical-model parameters `[Re β_1, Im β_1, φ_1, …]`.
    pub fn theta(&self) -> Vec<T> {
        self.gains
            .iter()
            .zip(&self.azimuths)
            .flat_map(|(g, &a)| [g.re, g.im, a])
            .collect()
    }

    /// `h = Σ β_l e(φ_l)`.
    pub fn channel(&self, geom: &UlaGeometry) -> CVector<T> {
        let mut h = CVector::zeros(geom.n_antennas());
        for (g, &a) in self.gains.iter().zip(&self.azimuths) {
            h += steering_vector(geom, a) * *g;
        }
        h
    }
}

/// Transmit/receive/subcarrier dimensions of a MIMO-OFDM link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    pub n_t: usize,
    pub n_r: usize,
    pub n_f: usize,
    pub n_ps: usize,
    /// Pilot sequence duration.
    pub t: usize,
}

impl SystemDims {
    pub fn validate(&self) -> Result<()> {
        if [self.n_t, self.n_r, self.n_f, self.n_ps, self.t].contains(&0) {
            return Err(Error::InvalidArgument("system dimensions must be ≥ 1".into()));
        }
        if self.n_ps > self.n_f {
            return Err(Error::InvalidArgument(format!(
                "{} pilot subcarriers exceed {} subcarriers",
                self.n_ps, self.n_f
            )));
        }
        Ok(())
    }

    /// `N_d = N_r·N_t·N_f`.
    pub fn channel_dim(&self) -> usize {
        self.n_r * self.n_t * self.n_f
    }

    /// `N_m = N_r·T·N_ps`.
    pub fn n_observations(&self) -> usize {
        self.n_r * self.t * self.n_ps
    }
}

/// Least-squares model: `θ = (Re(h)ᵀ, Im(h)ᵀ)ᵀ`, `h = (Id, j·Id)·θ`.
#[derive(Debug, Clone)]
pub struct LsModel {
    n_antennas: usize,
}

impl LsModel {
    pub fn new(n_antennas: usize) -> Self {
        assert!(n_antennas >= 1);
        Self { n_antennas }
    }
}

impl<T: Real> ParametricChannelModel<T> for LsModel {
    fn name(&self) -> String {
        format!("ls(N_t={})", self.n_antennas)
    }
    fn n_dims(&self) -> usize {
        self.n_antennas
    }
    fn n_params(&self) -> usize {
        2 * self.n_antennas
    }
    fn evaluate(&self, theta: &[T]) -> Result<CVector<T>> {
        self.check_theta(theta)?;
        let n = self.n_antennas;
        Ok(CVector::from_fn(n, |i, _| Complex::new(theta[i], theta[n + i])))
    }
    fn gradient(&self, theta: &[T]) -> Result<CMatrix<T>> {
        self.check_theta(theta)?;
        let n = self.n_antennas;
        Ok(DMatrix::from_fn(n, 2 * n, |i, j| {
            if j == i {
                Complex::new(T::one(), T::zero())
            } else if j == n + i {
                Complex::new(T::zero(), T::one())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        }))
    }
}

/// Physical multipath model `h = Σ β_l e(φ_l)` with parameters
/// `[Re β_1, Im β_1, φ_1, …, Re β_L, Im β_L, φ_L]`.
#[derive(Debug, Clone)]
pub struct PhysicalModel {
    geom: UlaGeometry,
    n_paths: usize,
}

impl PhysicalModel {
    pub fn new(geom: UlaGeometry, n_paths: usize) -> Self {
        assert!(n_paths >= 1, "at least one path");
        Self { geom, n_paths }
    }

    pub fn geometry(&self) -> &UlaGeometry {
        &self.geom
    }
}

impl<T: Real> ParametricChannelModel<T> for PhysicalModel {
    fn name(&self) -> String {
        format!("physical(N_t={}, L={})", self.geom.n_antennas(), self.n_paths)
    }
    fn n_dims(&self) -> usize {
        self.geom.n_antennas()
    }
    fn n_params(&self) -> usize {
        3 * self.n_paths
    }
    fn evaluate(&self, theta: &[T]) -> Result<CVector<T>> {
        self.check_theta(theta)?;
        let mut h = CVector::zeros(self.geom.n_antennas());
        for p in theta.chunks_exact(3) {
            h += steering_vector(&self.geom, p[2]) * Complex::new(p[0], p[1]);
        }
        Ok(h)
    }
    fn gradient(&self, theta: &[T]) -> Result<CMatrix<T>> {
        self.check_theta(theta)?;
        let mut cols = Vec::with_capacity(3 * self.n_paths);
        for p in theta.chunks_exact(3) {
            let e = steering_vector(&self.geom, p[2]);
            cols.push(e.clone());
            cols.push(e * Complex::new(T::zero(), T::one()));
            cols.push(steering_derivative(&self.geom, p[2]) * Complex::new(p[0], p[1]));
        }
        Ok(CMatrix::from_columns(&cols))
    }
}

/// Gains-only model with frozen azimuths: `h = (Ê, j·Ê)·θ`,
/// `θ = (Re β_1, …, Re β_L, Im β_1, …, Im β_L)`.
#[derive(Debug, Clone)]
pub struct AngleConstrainedModel<T: Real> {
    geom: UlaGeometry,
    azimuths: Vec<T>,
}

impl<T: Real> AngleConstrainedModel<T> {
    pub fn new(geom: UlaGeometry, azimuths: Vec<T>) -> Result<Self> {
        if azimuths.is_empty() {
            return Err(Error::InvalidArgument("at least one azimuth".into()));
        }
        Ok(Self { geom, azimuths })
    }

    pub fn azimuths(&self) -> &[T] {
        &self.azimuths
    }
}

impl<T: Real> ParametricChannelModel<T> for AngleConstrainedModel<T> {
    fn name(&self) -> String {
        format!(
            "angle-constrained(N_t={}, L={})",
            self.geom.n_antennas(),
            self.azimuths.len()
        )
    }
    fn n_dims(&self) -> usize {
        self.geom.n_antennas()
    }
    fn n_params(&self) -> usize {
        2 * self.azimuths.len()
    }
    fn evaluate(&self, theta: &[T]) -> Result<CVector<T>> {
        self.check_theta(theta)?;
        let l = self.azimuths.len();
        let e = steering_matrix(&self.geom, &self.azimuths);
        let beta = CVector::from_fn(l, |i, _| Complex::new(theta[i], theta[l + i]));
        Ok(e * beta)
    }
    fn gradient(&self, theta: &[T]) -> Result<CMatrix<T>> {
        self.check_theta(theta)?;
        let e = steering_matrix(&self.geom, &self.azimuths);
        let je = &e * Complex::new(T::zero(), T::one());
        let l = self.azimuths.len();
        let mut g = CMatrix::zeros(self.geom.n_antennas(), 2 * l);
        g.columns_mut(0, l).copy_from(&e);
        g.columns_mut(l, l).copy_from(&je);
        Ok(g)
    }
}

/// Generators `{e(φ_l), −j·e(φ_l), ∂e/∂φ_l}` of the physical variation space,
/// three consecutive columns per path.
pub fn physical_generators<T: Real>(geom: &UlaGeometry, azimuths: &[T]) -> CMatrix<T> {
    let mut cols = Vec::with_capacity(3 * azimuths.len());
    for &a in azimuths {
        let e = steering_vector(geom, a);
        cols.push(e.clone());
        cols.push(e * Complex::new(T::zero(), -T::one()));
        cols.push(steering_derivative(geom, a));
    }
    CMatrix::from_columns(&cols)
}

/// Human-readable name of generator column `index` of [`physical_generators`].
pub fn describe_physical_generator(index: usize) -> String {
    let path = index / 3 + 1;
    match index % 3 {
        0 => format!("e(φ_{path})"),
        1 => format!("−j·e(φ_{path})"),
        _ => format!("∂e(φ_{path})/∂φ_{path}"),
    }
}

/// Estimate of the physical variation space built from azimuth estimates.
///
/// The exact space at `θ` holds `β_l·∂e/∂φ_l` rather than `∂e/∂φ_l`; both
/// lie on the same ℂ-line, and the two ℝ-spans agree when the gains are real.
///
/// Fails with [`Error::RankDeficient`] for coincident azimuths or at endfire
/// (`cos φ = 0`); the error names the dependent generators.
pub fn estimated_variation_space<T: Real>(
    geom: &UlaGeometry,
    azimuths: &[T],
) -> Result<VariationSpaceBasis<T>> {
    if azimuths.is_empty() {
        return Err(Error::InvalidArgument("at least one azimuth".into()));
    }
    if azimuths.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite);
    }
    let g = physical_generators(geom, azimuths);
    let source = BasisSource::Estimated {
        description: format!(
            "physical variation space at estimated azimuths {:?}",
            azimuths.iter().map(|a| a.to_f64_lossy()).collect::<Vec<_>>()
        ),
    };
    VariationSpaceBasis::from_generators(&g, source).map_err(|e| match e {
        Error::RankDeficient {
            rank,
            expected,
            dependent,
            ..
        } => Error::RankDeficient {
            context: format!(
                "estimated variation space is degenerate ({})",
                dependent
                    .iter()
                    .map(|&i| describe_physical_generator(i))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            rank,
            expected,
            dependent,
        },
        other => other,
    })
}

/// `span_ℝ{e(φ_l), −j·e(φ_l)}`, the angle-constrained variation space.
pub fn angle_constrained_variation_space<T: Real>(
    geom: &UlaGeometry,
    azimuths: &[T],
) -> Result<VariationSpaceBasis<T>> {
    let mut cols = Vec::with_capacity(2 * azimuths.len());
    for &a in azimuths {
        let e = steering_vector(geom, a);
        cols.push(e.clone());
        cols.push(e * Complex::new(T::zero(), -T::one()));
    }
    if cols.is_empty() {
        return Err(Error::InvalidArgument("at least one azimuth".into()));
    }
    VariationSpaceBasis::from_generators(
        &CMatrix::from_columns(&cols),
        BasisSource::Estimated {
            description: "angle-constrained variation space".into(),
        },
    )
}

/// `M = Id_{N_r} ⊗ X ⊗ F` for a pilot block `X` (`N_t × T`) sent on the
/// subcarriers selected by `F` (`N_f × N_ps`, a column-sampled identity).
pub fn kron_observation<T: Real>(x: &CMatrix<T>, f: &RMatrix<T>, n_r: usize) -> Result<CMatrix<T>> {
    if n_r == 0 {
        return Err(Error::InvalidArgument("N_r must be ≥ 1".into()));
    }
    validate_selector(f)?;
    let id = CMatrix::<T>::identity(n_r, n_r);
    let fc = crate::cx::to_complex(f);
    Ok(id.kronecker(x).kronecker(&fc))
}

fn validate_selector<T: Real>(f: &RMatrix<T>) -> Result<()> {
    if f.ncols() == 0 || f.ncols() > f.nrows() {
        return Err(Error::MalformedSelector(format!(
            "shape {}×{}",
            f.nrows(),
            f.ncols()
        )));
    }
    let mut seen = vec![false; f.nrows()];
    for (j, col) in f.column_iter().enumerate() {
        let mut row = None;
        for (i, &v) in col.iter().enumerate() {
            if v == T::one() {
                if row.replace(i).is_some() {
                    return Err(Error::MalformedSelector(format!("column {j} has several ones")));
                }
            } else if v != T::zero() {
                return Err(Error::MalformedSelector(format!("entry ({i}, {j}) is not 0/1")));
            }
        }
        let i = row.ok_or_else(|| Error::MalformedSelector(format!("column {j} is zero")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::MalformedSelector(format!("subcarrier {i} selected twice")));
        }
    }
    Ok(())
}
