use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use pilotspace::crb::{self, NoiseModel};
use pilotspace::experiments::{self, CurveTable, Strategy};
use pilotspace::models::{
    angle_constrained_variation_space, estimated_variation_space, AngleConstrainedModel, LsModel, PhysicalModel,
    UlaGeometry,
};
use pilotspace::pilot::design_observation_matrix;
use pilotspace::variation::{canonical_decompose, variation_space, ParametricChannelModel};
use pilotspace::{ComplexMatrix, VariationSpaceBasisF64};
use serde_json::{json, Value};

use crate::config::{positive, ModelKind, RunConfigFile};
use crate::matrix_io::{parse_matrix, write_matrix};
use crate::{DesignArgs, ExperimentArgs, ExperimentKind, ModelArgs, ProbeArgs};

/// Certificates count as passed below `CERT_TOL·P`.
const CERT_TOL: f64 = 1e-9;

struct ModelSpec {
    kind: ModelKind,
    n_antennas: usize,
    azimuths: Option<Vec<f64>>,
}

impl ModelSpec {
    fn resolve(args: &ModelArgs, cfg: &RunConfigFile) -> Result<Self> {
        let kind = args
            .model
            .or(cfg.model.kind)
            .context("no model given (--model or model.kind)")?;
        let n_antennas = args
            .nt
            .or(cfg.model.n_antennas)
            .context("no antenna count given (--nt or model.n_antennas)")?;
        ensure!(n_antennas >= 1, "--nt must be ≥ 1");
        let azimuths = args.azimuths.clone().or_else(|| cfg.model.azimuths.clone());
        if let Some(az) = &azimuths {
            ensure!(!az.is_empty(), "empty azimuth list");
            ensure!(az.iter().all(|a| a.is_finite()), "azimuths must be finite");
        }
        Ok(Self {
            kind,
            n_antennas,
            azimuths,
        })
    }

    fn geom(&self) -> UlaGeometry {
        UlaGeometry::new(self.n_antennas)
    }

    fn azimuths(&self) -> Result<&[f64]> {
        match &self.azimuths {
            Some(a) => Ok(a),
            None => bail!("model {} needs --azimuths", self.name()),
        }
    }

    fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Ls => "ls",
            ModelKind::Physical => "physical",
            ModelKind::AngleConstrained => "angle-constrained",
        }
    }

    /// The space pilots are designed for: gain-free for the physical model.
    fn design_space(&self) -> Result<VariationSpaceBasisF64> {
        Ok(match self.kind {
            ModelKind::Ls => variation_space(&LsModel::new(self.n_antennas), &vec![0.0; 2 * self.n_antennas])?,
            ModelKind::Physical => estimated_variation_space(&self.geom(), self.azimuths()?)?,
            ModelKind::AngleConstrained => angle_constrained_variation_space(&self.geom(), self.azimuths()?)?,
        })
    }

    /// The parametric model and its parameter vector. The linear models
    /// default to `θ = 0`, their gradient does not depend on it.
    fn model(&self, theta: Option<Vec<f64>>) -> Result<(Box<dyn ParametricChannelModel<f64>>, Vec<f64>)> {
        let model: Box<dyn ParametricChannelModel<f64>> = match self.kind {
            ModelKind::Ls => Box::new(LsModel::new(self.n_antennas)),
            ModelKind::Physical => {
                let theta = theta.as_ref().context("the physical model needs --theta")?;
                ensure!(
                    !theta.is_empty() && theta.len() % 3 == 0,
                    "physical θ holds [Re β, Im β, φ] per path, got {} values",
                    theta.len()
                );
                Box::new(PhysicalModel::new(self.geom(), theta.len() / 3))
            }
            ModelKind::AngleConstrained => {
                Box::new(AngleConstrainedModel::new(self.geom(), self.azimuths()?.to_vec())?)
            }
        };
        let theta = theta.unwrap_or_else(|| vec![0.0; model.n_params()]);
        model.check_theta(&theta)?;
        Ok((model, theta))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_theta(path: &Path) -> Result<Vec<f64>> {
    serde_json::from_str(&read(path)?).with_context(|| format!("{}: expected a JSON array of numbers", path.display()))
}

fn read_observation(path: &Path) -> Result<ComplexMatrix> {
    parse_matrix(&read(path)?).with_context(|| format!("reading matrix {}", path.display()))
}

/// `+∞` has no JSON literal.
fn number_or_inf(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn design(args: &DesignArgs) -> Result<()> {
    let cfg = RunConfigFile::load(args.config.as_deref())?;
    let spec = ModelSpec::resolve(&args.model, &cfg)?;
    let power = positive("power", args.power.or(cfg.power).unwrap_or(1.0))?;
    let sigma2 = positive("sigma2", args.sigma2.or(cfg.sigma2).unwrap_or(1.0))?;
    let noise = NoiseModel::new(sigma2)?;

    let decomp = canonical_decompose(&spec.design_space()?)?;
    let d = design_observation_matrix(&decomp, power)?;
    let min = crb::crb_min(&decomp.c, decomp.n_params(), noise, power)?;
    let cert = &d.certificates;
    let report = json!({
        "model": spec.name(),
        "n_antennas": spec.n_antennas,
        "azimuths": spec.azimuths,
        "n_params": decomp.n_params(),
        "columns": d.n_cols(),
        "power": power,
        "sigma2": sigma2,
        "couplings": min.c,
        "normalization": d.c_norm,
        "column_powers": cert.column_powers,
        "expected_column_powers": cert.expected_powers,
        "achieved_crb": d.achieved_crb(noise),
        "crb_min": min.value,
        "crb_min_bounds": [min.lower_bound, min.upper_bound],
        "certificates": {
            "diagonal_residual": cert.diagonal_residual,
            "dk_residual": cert.dk_residual,
            "power_residual": cert.power_residual,
            "total_power": cert.total_power,
            "tolerance": CERT_TOL * power,
            "pass": cert.passes(power, CERT_TOL),
        },
    });
    let m_text = write_matrix(&d.m)?;
    let out = args.output.clone().or(cfg.output.path);
    match out {
        Some(path) => {
            let report_path = args
                .report
                .clone()
                .or(cfg.output.report)
                .unwrap_or_else(|| default_report_path(&path));
            write(&path, &m_text)?;
            write(&report_path, &pretty(&report))?;
            eprintln!(
                "design: {} × {} observation matrix → {}, report → {}",
                d.m.nrows(),
                d.m.ncols(),
                path.display(),
                report_path.display()
            );
        }
        None => {
            let report_text = pretty(&report);
            print!("{{\n\"m\": {},\n\"report\": {}}}\n", m_text.trim_end(), report_text.trim_end());
        }
    }
    Ok(())
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn crb(args: &ProbeArgs) -> Result<()> {
    let cfg = RunConfigFile::load(args.config.as_deref())?;
    let spec = ModelSpec::resolve(&args.model, &cfg)?;
    let sigma2 = positive("sigma2", args.sigma2.or(cfg.sigma2).unwrap_or(1.0))?;
    let m = read_observation(&args.matrix)?;
    let theta = args.theta.as_deref().map(read_theta).transpose()?;
    let (model, theta) = spec.model(theta)?;
    let report = crb::crb_direct(model.as_ref(), &theta, &m, NoiseModel::new(sigma2)?)?;
    let out = json!({
        "crb": number_or_inf(report.value),
        "identifiable": report.identifiable,
        "min_eig": report.min_eig_compression,
        "nm_required": model.n_params().div_ceil(2),
        "nm_given": m.ncols(),
    });
    emit(args.output.as_deref(), &pretty(&out))
}

pub fn identify(args: &ProbeArgs) -> Result<()> {
    let cfg = RunConfigFile::load(args.config.as_deref())?;
    let spec = ModelSpec::resolve(&args.model, &cfg)?;
    let m = read_observation(&args.matrix)?;
    let basis = match args.theta.as_deref() {
        Some(p) => {
            let (model, theta) = spec.model(Some(read_theta(p)?))?;
            match variation_space(model.as_ref(), &theta) {
                Ok(b) => Some(b),
                // a rank-deficient gradient is an answer here, not a failure
                Err(pilotspace::Error::RankDeficient { .. }) => None,
                Err(e) => return Err(e.into()),
            }
        }
        None => Some(spec.design_space()?),
    };
    let out = match basis {
        Some(b) => {
            let r = crb::check_identifiability(&b, &m)?;
            json!({
                "identifiable": r.identifiable,
                "counting_ok": r.counting_ok,
                "min_eig": r.min_eig,
                "max_eig": r.max_eig,
                "nm_required": r.nm_required,
                "nm_given": r.nm_given,
            })
        }
        None => json!({
            "identifiable": false,
            "reason": "gradient is rank deficient",
            "nm_given": m.ncols(),
        }),
    };
    emit(args.output.as_deref(), &pretty(&out))
}

/// Cap from `PILOTSPACE_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("PILOTSPACE_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("PILOTSPACE_THREADS={v:?} is not a thread count"))?;
            ensure!(n >= 1, "PILOTSPACE_THREADS must be ≥ 1");
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("PILOTSPACE_THREADS"),
    }
}

pub fn experiment(kind: ExperimentKind, args: &ExperimentArgs) -> Result<()> {
    let cfg = RunConfigFile::load(args.config.as_deref())?;
    let mut exp = cfg.experiment.clone();
    if let Some(seed) = args.seed {
        exp.seed = seed;
    }
    if let Some(n) = args.trials {
        exp.n_trials = n;
    }
    if let Some(cap) = thread_cap()? {
        exp.threads = Some(exp.threads.map_or(cap, |t| t.min(cap)));
    }
    exp.validate()?;
    let output = args.output.clone().or(cfg.output.path);
    let plot = args.plot.clone().or(cfg.output.plot);
    if plot.is_some() && output.is_none() {
        bail!("--plot needs --output: the script refers to the CSV file");
    }

    let started = std::time::Instant::now();
    let table = match kind {
        ExperimentKind::SinglePath => experiments::run_single_path(&exp)?,
        ExperimentKind::Multipath => experiments::run_multipath(&exp)?,
    };
    eprintln!(
        "{}: {} rows, {} redraws, {:.2} s",
        kind.name(),
        table.rows.len(),
        table.redraws,
        started.elapsed().as_secs_f64()
    );
    emit(output.as_deref(), &table.to_csv())?;
    if let (Some(p), Some(csv)) = (plot, output) {
        write(&p, &plot_script(&csv, &table))?;
    }
    Ok(())
}

/// gnuplot script drawing one curve per (strategy, Δ) from the CSV.
pub fn plot_script(csv: &Path, table: &CurveTable) -> String {
    let mut curves: Vec<(Strategy, f64)> = Vec::new();
    for r in &table.rows {
        if !curves.contains(&(r.strategy, r.delta_deg)) {
            curves.push((r.strategy, r.delta_deg));
        }
    }
    let file = csv.display().to_string().replace('"', "\\\"");
    let mut s = String::from(
        "set datafile separator \",\"\nset xlabel \"pSNR [dB]\"\nset ylabel \"relative bound [dB]\"\nset grid\nset key outside right\n",
    );
    if curves.is_empty() {
        s.push_str("# no curves\n");
        return s;
    }
    s.push_str("plot ");
    for (i, (strategy, delta)) in curves.iter().enumerate() {
        if i > 0 {
            s.push_str(", \\\n     ");
        }
        let dash = match strategy {
            Strategy::AngleConstrained => 2,
            Strategy::Proposed => 1,
        };
        let _ = write!(
            s,
            "\"{file}\" skip 1 using 3:((strcol(1) eq \"{name}\" && $2 == {delta:e}) ? $5 : 1/0) \
             with linespoints dt {dash} title \"{name}, Δ = {delta}°\"",
            name = strategy.name()
        );
    }
    s.push('\n');
    s
}

/// `m.json` → `m.report.json`.
fn default_report_path(output: &Path) -> PathBuf {
    output.with_extension("report.json")
}
