//! Lower-bound curves for two channel tracking strategies on a 64-antenna
//! ULA: the angle-constrained strategy, which freezes previously estimated
//! azimuths and estimates gains only, and the proposed strategy, which sends
//! pilots designed on the estimated variation space and re-estimates
//! everything.
//!
//! All curves are relative bounds (MSE divided by `‖h‖²`) against the
//! potential SNR `pSNR = P_t‖h‖²/σ²`. The sweep varies `σ²` at fixed power
//! and channel, so each strategy reduces to a pSNR-independent bias term and
//! a variance term proportional to `1/pSNR` (see [`StrategyBound`]).

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crb::{self, NoiseModel};
use crate::models::{
    angle_constrained_variation_space, estimated_variation_space, steering_derivative,
    steering_matrix, steering_vector, PathSet, PhysicalModel, UlaGeometry,
};
use crate::pilot::design_observation_matrix;
use crate::variation::{canonical_decompose, variation_space, VariationSpaceBasis};
use crate::{ComplexMatrix, ComplexVector, Error, Result};

/// `P_t‖h‖²/σ²`.
pub fn psnr(power: f64, h: &ComplexVector, sigma2: f64) -> f64 {
    power * h.norm_squared() / sigma2
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `(σ²/(2‖h‖²))·Tr[(Re{UᴴMMᴴU})⁻¹]`, `+∞` when `M` does not identify the
/// parameters of `U`.
pub fn relative_crb(true_basis: &VariationSpaceBasis<f64>, m: &ComplexMatrix, sigma2: f64, h: &ComplexVector) -> Result<f64> {
    let noise = NoiseModel::new(sigma2)?;
    Ok(crb::crb_value(true_basis, m, noise)? / h.norm_squared())
}

/// `‖h − Ê(ÊᴴÊ)⁻¹Êᴴh‖²/‖h‖²`, the fraction of the channel outside `range(Ê)`.
pub fn relative_bias(h: &ComplexVector, e_hat: &ComplexMatrix) -> Result<f64> {
    if e_hat.nrows() != h.len() {
        return Err(Error::DimensionMismatch {
            context: "relative_bias",
            expected: h.len(),
            found: e_hat.nrows(),
        });
    }
    let qr = e_hat.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|z| z.norm()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let dependent: Vec<usize> = (0..diag.len()).filter(|&i| diag[i] <= 1e-10 * max).collect();
    if max == 0.0 || !dependent.is_empty() || e_hat.ncols() > e_hat.nrows() {
        return Err(Error::RankDeficient {
            context: "estimated steering matrix".into(),
            rank: diag.len() - dependent.len(),
            expected: e_hat.ncols(),
            dependent,
        });
    }
    let q = qr.q();
    let resid = h - &q * (q.adjoint() * h);
    Ok(resid.norm_squared() / h.norm_squared())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    AngleConstrained,
    Proposed,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::AngleConstrained => "angle-constrained",
            Strategy::Proposed => "proposed",
        }
    }
}

/// Relative MSE lower bound of one strategy on one channel realization:
/// `bound(pSNR) = max(bias, κ/pSNR)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyBound {
    pub strategy: Strategy,
    /// Pilot sequence duration.
    pub pilot_length: usize,
    /// Relative CRB at `pSNR = 1`.
    pub kappa: f64,
    /// Relative bias (always zero for the proposed strategy).
    pub bias: f64,
}

impl StrategyBound {
    /// Bound at a linear pSNR.
    pub fn relative_bound(&self, psnr: f64) -> f64 {
        self.bias.max(self.kappa / psnr)
    }

    pub fn relative_bound_db(&self, psnr_db: f64) -> f64 {
        self.relative_bound(from_db(psnr_db))
    }
}

fn check_counts(paths: &PathSet<f64>, estimated: &[f64]) -> Result<()> {
    if estimated.len() != paths.n_paths() {
        return Err(Error::DimensionMismatch {
            context: "estimated azimuths vs paths",
            expected: paths.n_paths(),
            found: estimated.len(),
        });
    }
    Ok(())
}

/// Pilots `√(P_t/L)·Ê`, gains estimated in `range(Ê)`.
pub fn ac_strategy_bound(geom: &UlaGeometry, paths: &PathSet<f64>, estimated: &[f64], power: f64) -> Result<StrategyBound> {
    check_counts(paths, estimated)?;
    let l = paths.n_paths();
    let h = paths.channel(geom);
    let e_hat = steering_matrix(geom, estimated);
    let bias = relative_bias(&h, &e_hat)?;
    let m = &e_hat * Complex::new((power / l as f64).sqrt(), 0.0);
    let basis = angle_constrained_variation_space(geom, estimated)?;
    let kappa = relative_crb(&basis, &m, power * h.norm_squared(), &h)?;
    Ok(StrategyBound {
        strategy: Strategy::AngleConstrained,
        pilot_length: l,
        kappa,
        bias,
    })
}

/// Which subspace the proposed strategy's CRB is evaluated on.
///
/// The physical model's gradient spans `{e, je, β∂e}`. For complex `β` that
/// is a different ℝ-space from `{e, −je, ∂e}`, the space the pilots are
/// designed for, and the mismatch makes the CRB heavy-tailed over random
/// gain phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrueSpace {
    /// `span{e, −je, ∂e}` at the true azimuths; gains enter only through `h`.
    #[default]
    AzimuthOnly,
    /// The exact gradient span `{e, je, β∂e}` at the true parameters.
    GainWeighted,
}

/// Pilots designed on the estimated physical variation space, CRB evaluated
/// on the true one.
pub fn proposed_strategy_bound(
    geom: &UlaGeometry,
    paths: &PathSet<f64>,
    estimated: &[f64],
    power: f64,
    true_space: TrueSpace,
) -> Result<StrategyBound> {
    check_counts(paths, estimated)?;
    let est = estimated_variation_space(geom, estimated)?;
    let design = design_observation_matrix(&canonical_decompose(&est)?, power)?;
    let truth = match true_space {
        TrueSpace::AzimuthOnly => estimated_variation_space(geom, &paths.azimuths)?,
        TrueSpace::GainWeighted => {
            let model = PhysicalModel::new(geom.clone(), paths.n_paths());
            variation_space(&model, &paths.theta())?
        }
    };
    let h = paths.channel(geom);
    let kappa = relative_crb(&truth, &design.m, power * h.norm_squared(), &h)?;
    Ok(StrategyBound {
        strategy: Strategy::Proposed,
        pilot_length: design.n_cols(),
        kappa,
        bias: 0.0,
    })
}

fn default_delta_deg() -> Vec<f64> {
    vec![0.0, 1.0, 5.0]
}

fn default_psnr_grid() -> Vec<f64> {
    (0..=12).map(|i| -10.0 + 5.0 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_antennas: usize,
    /// Azimuth error magnitudes Δ in degrees.
    pub delta_deg: Vec<f64>,
    pub psnr_grid_db: Vec<f64>,
    /// Channel realizations per Δ (multipath only).
    pub n_trials: usize,
    pub seed: u64,
    /// Minimum separation between path azimuths (true and estimated), in
    /// degrees, measured in spatial frequency: `|sin φ_a − sin φ_b| ≥ floor`.
    pub separation_floor_deg: f64,
    /// Pilot power `P_t`.
    pub power: f64,
    /// Mean path power decays as `exp(−decay_rate·l)`.
    pub decay_rate: f64,
    /// Worker threads for the trials; `None` uses the global pool.
    pub threads: Option<usize>,
    pub true_space: TrueSpace,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_antennas: 64,
            delta_deg: default_delta_deg(),
            psnr_grid_db: default_psnr_grid(),
            n_trials: 100,
            seed: 0,
            separation_floor_deg: 2.0,
            power: 1.0,
            decay_rate: 1.0,
            threads: None,
            true_space: TrueSpace::AzimuthOnly,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_antennas < 2 {
            return bad(format!("n_antennas must be ≥ 2, got {}", self.n_antennas));
        }
        if self.psnr_grid_db.is_empty() {
            return bad("psnr_grid_db is empty".into());
        }
        if self.psnr_grid_db.iter().any(|x| !x.is_finite()) {
            return bad("psnr_grid_db has non-finite entries".into());
        }
        if self.delta_deg.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return bad("delta_deg entries must be finite and ≥ 0".into());
        }
        if self.n_trials == 0 {
            return bad("n_trials must be ≥ 1".into());
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(Error::InvalidPower(self.power));
        }
        if !(self.separation_floor_deg.is_finite() && self.separation_floor_deg >= 0.0) {
            return bad("separation_floor_deg must be finite and ≥ 0".into());
        }
        if !(self.decay_rate.is_finite() && self.decay_rate >= 0.0) {
            return bad("decay_rate must be finite and ≥ 0".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be ≥ 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub strategy: Strategy,
    pub delta_deg: f64,
    pub psnr_db: f64,
    pub relative_bound: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    /// Realizations discarded because a variation space was degenerate.
    pub redraws: usize,
}

pub const CSV_HEADER: &str = "strategy,delta_deg,psnr_db,relative_bound,relative_bound_db,trials";

impl CurveTable {
    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.strategy
                .cmp(&b.strategy)
                .then(a.delta_deg.total_cmp(&b.delta_deg))
                .then(a.psnr_db.total_cmp(&b.psnr_db))
        });
    }

    /// Rows of one strategy at one Δ, in increasing pSNR.
    pub fn curve(&self, strategy: Strategy, delta_deg: f64) -> Vec<&CurveRow> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy && r.delta_deg == delta_deg)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.strategy.name(),
                r.delta_deg,
                r.psnr_db,
                r.relative_bound,
                to_db(r.relative_bound),
                r.trials
            );
        }
        out
    }
}

fn push_rows(rows: &mut Vec<CurveRow>, strategy: Strategy, delta_deg: f64, grid: &[f64], trials: usize, f: impl Fn(f64) -> f64) {
    for &db in grid {
        rows.push(CurveRow {
            strategy,
            delta_deg,
            psnr_db: db,
            relative_bound: f(from_db(db)),
            trials,
        });
    }
}

/// Single path with unit gain, estimated azimuth 0 and true azimuth Δ.
pub fn run_single_path(config: &ExperimentConfig) -> Result<CurveTable> {
    config.validate()?;
    let geom = UlaGeometry::new(config.n_antennas);
    let mut table = CurveTable::default();
    for &delta in &config.delta_deg {
        let paths = PathSet::new(vec![Complex::new(1.0, 0.0)], vec![delta.to_radians()])?;
        let est = [0.0];
        for b in [
            ac_strategy_bound(&geom, &paths, &est, config.power)?,
            proposed_strategy_bound(&geom, &paths, &est, config.power, config.true_space)?,
        ] {
            push_rows(&mut table.rows, b.strategy, delta, &config.psnr_grid_db, 1, |p| b.relative_bound(p));
        }
    }
    table.sort();
    Ok(table)
}

/// Pairwise separation in spatial frequency `sin φ`, the quantity the
/// steering vectors depend on. Since `|asin x − asin y| ≥ |x − y|`, this also
/// keeps `asin(sin φ)` (the angle modulo the front/back ambiguity) `floor` apart.
fn separated(azimuths: &[f64], floor: f64) -> bool {
    azimuths
        .iter()
        .enumerate()
        .all(|(i, a)| azimuths[i + 1..].iter().all(|b| (a.sin() - b.sin()).abs() >= floor))
}

/// Simplified clustered channel: `L` uniform on `1..=7`, azimuths uniform
/// on the circle with a separation floor, exponentially decaying mean path
/// powers normalized to one, Rayleigh magnitudes and uniform phases.
pub fn generate_clustered_channel<R: Rng + ?Sized>(rng: &mut R, config: &ExperimentConfig) -> Result<PathSet<f64>> {
    let l = rng.random_range(1..=7usize);
    let floor = config.separation_floor_deg.to_radians();
    let mut azimuths: Vec<f64> = Vec::with_capacity(l);
    for _ in 0..l {
        let mut placed = false;
        for _ in 0..100 {
            let phi = rng.random_range(0.0..2.0 * PI);
            let phi = if phi >= PI { phi - 2.0 * PI } else { phi };
            if azimuths.iter().all(|&a| (a.sin() - phi.sin()).abs() >= floor) {
                azimuths.push(phi);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InvalidArgument(format!(
                "could not place {l} azimuths {}° apart after 100 draws",
                config.separation_floor_deg
            )));
        }
    }
    let weights: Vec<f64> = (0..l).map(|i| (-config.decay_rate * i as f64).exp()).collect();
    let total: f64 = weights.iter().sum();
    let gains = weights
        .iter()
        .map(|w| {
            let mean = w / total;
            loop {
                let e: f64 = Exp1.sample(rng);
                let mag = (mean * e).sqrt();
                if mag >= 1e-3 {
                    let phase = rng.random_range(0.0..2.0 * PI);
                    return Complex::from_polar(mag, phase);
                }
            }
        })
        .collect();
    PathSet::new(gains, azimuths)
}

const MAX_REDRAWS: usize = 1000;

/// One trial: a channel, its perturbed azimuth estimates, both bounds.
fn multipath_trial(geom: &UlaGeometry, config: &ExperimentConfig, delta: f64, trial: usize) -> Result<([StrategyBound; 2], usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64);
    let mut redraws = 0;
    loop {
        let paths = generate_clustered_channel(&mut rng, config)?;
        let d = delta.to_radians();
        let est: Vec<f64> = paths
            .azimuths
            .iter()
            .map(|&a| if d > 0.0 { a + rng.random_range(-d..=d) } else { a })
            .collect();
        let attempt = if separated(&est, config.separation_floor_deg.to_radians()) {
            ac_strategy_bound(geom, &paths, &est, config.power)
                .and_then(|ac| Ok(Some([ac, proposed_strategy_bound(geom, &paths, &est, config.power, config.true_space)?])))
        } else {
            Ok(None)
        };
        match attempt {
            Ok(Some(b)) if b.iter().all(|s| s.kappa.is_finite()) => return Ok((b, redraws)),
            Ok(_) | Err(Error::RankDeficient { .. }) | Err(Error::NonIdentifiable) => {
                redraws += 1;
                if redraws >= MAX_REDRAWS {
                    return Err(Error::InvalidArgument(format!(
                        "trial {trial}: {MAX_REDRAWS} degenerate realizations in a row"
                    )));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Monte-Carlo average of both bounds over random clustered channels; the
/// azimuth estimates are `φ_l + δ_l` with `δ_l` uniform on `[−Δ, Δ]`.
///
/// Trial `i` draws from the stream `i` of a generator seeded with
/// `config.seed`, so the table does not depend on the thread count.
pub fn run_multipath(config: &ExperimentConfig) -> Result<CurveTable> {
    config.validate()?;
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| multipath_inner(config)),
        None => multipath_inner(config),
    }
}

fn multipath_inner(config: &ExperimentConfig) -> Result<CurveTable> {
    let geom = UlaGeometry::new(config.n_antennas);
    let mut table = CurveTable::default();
    for &delta in &config.delta_deg {
        let trials: Vec<([StrategyBound; 2], usize)> = (0..config.n_trials)
            .into_par_iter()
            .map(|t| multipath_trial(&geom, config, delta, t))
            .collect::<Result<_>>()?;
        table.redraws += trials.iter().map(|t| t.1).sum::<usize>();
        for s in 0..2 {
            let strategy = trials[0].0[s].strategy;
            push_rows(&mut table.rows, strategy, delta, &config.psnr_grid_db, config.n_trials, |p| {
                trials.iter().map(|t| t.0[s].relative_bound(p)).sum::<f64>() / config.n_trials as f64
            });
        }
    }
    table.sort();
    Ok(table)
}

/// Least-squares gains from `y ≈ Mᴴ·Ê·β`.
pub fn ls_gain_estimate(y: &ComplexVector, m: &ComplexMatrix, e_hat: &ComplexMatrix) -> Result<Vec<Complex<f64>>> {
    if m.ncols() != y.len() || m.nrows() != e_hat.nrows() {
        return Err(Error::DimensionMismatch {
            context: "ls_gain_estimate",
            expected: m.ncols(),
            found: y.len(),
        });
    }
    let a = m.adjoint() * e_hat;
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    if smax == 0.0 || rank < e_hat.ncols() {
        return Err(Error::NonIdentifiable);
    }
    let beta = svd.solve(y, 1e-10 * smax).map_err(|e| Error::InvalidArgument(e.into()))?;
    Ok(beta.iter().copied().collect())
}

/// `min_β ‖y − MᴴE(φ)β‖²` and its gradient with respect to `φ`.
fn projected_cost(geom: &UlaGeometry, y: &ComplexVector, m: &ComplexMatrix, phi: &[f64]) -> Result<(f64, Vec<f64>)> {
    let e = steering_matrix(geom, phi);
    let beta = ls_gain_estimate(y, m, &e)?;
    let mh = m.adjoint();
    let bvec = ComplexVector::from_vec(beta.clone());
    let r = y - &mh * (&e * bvec);
    let grad = phi
        .iter()
        .zip(&beta)
        .map(|(&p, &b)| -2.0 * r.dotc(&(&mh * steering_derivative(geom, p) * b)).re)
        .collect();
    Ok((r.norm_squared(), grad))
}

/// Refines azimuths by `steps` iterations of gradient descent with
/// backtracking on the gain-eliminated least-squares cost.
pub fn refine_angles(geom: &UlaGeometry, y: &ComplexVector, m: &ComplexMatrix, initial: &[f64], steps: usize) -> Result<Vec<f64>> {
    let mut phi = initial.to_vec();
    if steps == 0 {
        return Ok(phi);
    }
    let (mut cost, mut grad) = projected_cost(geom, y, m, &phi)?;
    let mut t = 1e-3 / grad.iter().map(|g| g * g).sum::<f64>().sqrt().max(1e-300);
    for _ in 0..steps {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2 == 0.0 {
            break;
        }
        let mut moved = false;
        while t > 1e-300 {
            let trial: Vec<f64> = phi.iter().zip(&grad).map(|(p, g)| p - t * g).collect();
            if let Ok((c, g)) = projected_cost(geom, y, m, &trial) {
                if c <= cost - 1e-4 * t * gnorm2 {
                    phi = trial;
                    cost = c;
                    grad = g;
                    t *= 2.0;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(phi)
}

/// Noiseless observation `Mᴴh` of a path set.
pub fn observe(geom: &UlaGeometry, paths: &PathSet<f64>, m: &ComplexMatrix) -> ComplexVector {
    m.adjoint() * paths.channel(geom)
}

/// `e(φ)` as a one-column matrix.
pub fn single_column(geom: &UlaGeometry, phi: f64) -> ComplexMatrix {
    let e = steering_vector(geom, phi);
    DMatrix::from_column_slice(e.len(), 1, e.as_slice())
}
