//! Command-line front end of the `epsd` binary.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 1 computation error.
//! `EPSD_THREADS` sets the worker count.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::axis::{FrequencyAxis, ScaleAxis};
use crate::error::EpsdError;
use crate::estimators::{epsd_estimate, smooth_time, EnsembleAccumulator};
use crate::grid::SpectralGrid;
use crate::io;
use crate::kernels::{norm_constants, Family, KappaCurve, TransformSpec};
use crate::pipeline::{figure8_preset, residual_axes, run_mc_with, run_residual_study, McConfig};
use crate::residuals::{ratio_cwt, ratio_st, ratio_stft, residual_grid_masked, Order};
use crate::series::TimeSeries;
use crate::simulator::{EpsdModel, SeismicModelParams, SrmSimulator};
use crate::transforms::TransformPlan;

/// Failure of a CLI invocation.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 2.
    Usage(String),
    /// Computation or I/O failure; exit code 1.
    Run(EpsdError),
}

impl From<EpsdError> for CliError {
    fn from(e: EpsdError) -> Self {
        CliError::Run(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// Transform specs

#[derive(Debug, Deserialize)]
#[serde(tag = "transform", rename_all = "kebab-case", deny_unknown_fields)]
enum SpecDoc {
    StftBox {
        h: f64,
    },
    StftGauss {
        sigma: f64,
    },
    #[serde(rename = "s-transform")]
    STransform {
        kappa: f64,
    },
    #[serde(rename = "s-transform-generalized")]
    STransformGeneralized {
        kappa0: Option<f64>,
        f_ref: Option<f64>,
        p: Option<f64>,
        freqs: Option<Vec<f64>>,
        values: Option<Vec<f64>>,
    },
    CwtHarmonic {
        m: f64,
        n: f64,
        c0: Option<f64>,
        s0: Option<f64>,
        levels: Option<usize>,
        f_min: Option<f64>,
    },
    CwtMorse {
        beta: f64,
        gamma: f64,
        c0: Option<f64>,
        s0: Option<f64>,
        levels: Option<usize>,
        f_min: Option<f64>,
    },
}

/// Lowest mapped frequency of a default CWT scale grid (Hz).
pub const DEFAULT_F_MIN: f64 = 0.05;

fn scale_axis(
    c0: Option<f64>,
    s0: Option<f64>,
    levels: Option<usize>,
    f_min: Option<f64>,
    default_s0: f64,
    f0: f64,
) -> crate::Result<ScaleAxis> {
    let c0 = c0.unwrap_or(0.01);
    let s0 = s0.unwrap_or(default_s0);
    match (levels, f_min) {
        (Some(_), Some(_)) => Err(EpsdError::param("levels", "give either levels or f_min, not both")),
        (Some(l), None) => ScaleAxis::geometric(c0, s0, l),
        (None, f) => ScaleAxis::covering(c0, s0, f0, f.unwrap_or(DEFAULT_F_MIN)),
    }
}

fn spec_from_doc(doc: SpecDoc) -> crate::Result<TransformSpec> {
    let spec = match doc {
        SpecDoc::StftBox { h } => TransformSpec::StftBox { h },
        SpecDoc::StftGauss { sigma } => TransformSpec::StftGauss { sigma },
        SpecDoc::STransform { kappa } => TransformSpec::STrans { kappa },
        SpecDoc::STransformGeneralized { kappa0, f_ref, p, freqs, values } => {
            let k = match (kappa0, f_ref, p, freqs, values) {
                (Some(kappa0), Some(f_ref), Some(p), None, None) => {
                    KappaCurve::PowerLaw { kappa0, f_ref, p }
                }
                (None, None, None, Some(freqs), Some(values)) => {
                    KappaCurve::Tabulated { freqs, values }
                }
                _ => {
                    return Err(EpsdError::param(
                        "k",
                        "give either kappa0, f_ref and p (power law) or freqs and values (table)",
                    ))
                }
            };
            TransformSpec::STransGeneralized { k }
        }
        SpecDoc::CwtHarmonic { m, n, c0, s0, levels, f_min } => {
            if !(m > 0.0 && m < n) {
                return Err(EpsdError::param(
                    "m",
                    format!("harmonic wavelet bounds require m < n (and m > 0), got m = {m}, n = {n}"),
                ));
            }
            let scales = scale_axis(c0, s0, levels, f_min, std::f64::consts::SQRT_2, 0.5 * (m + n))?;
            TransformSpec::CwtHarmonic { m, n, scales }
        }
        SpecDoc::CwtMorse { beta, gamma, c0, s0, levels, f_min } => {
            if !(beta > 0.0 && gamma > 0.0) {
                return Err(EpsdError::param("beta", "beta and gamma must be positive"));
            }
            let f0 = (beta / gamma).powf(1.0 / gamma) / (2.0 * std::f64::consts::PI);
            let scales = scale_axis(c0, s0, levels, f_min, 2f64.powf(0.1), f0)?;
            TransformSpec::CwtMorse { beta, gamma, scales }
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Parse a JSON transform spec such as `{"transform":"stft-gauss","sigma":1.0}`.
///
/// Unknown fields are rejected and a missing parameter is reported by name.
/// CWT specs accept an optional scale grid: `c0` (default 0.01), `s0` and
/// either `levels` or `f_min` (default 0.05 Hz).
pub fn parse_spec(text: &str) -> crate::Result<TransformSpec> {
    spec_from_doc(serde_json::from_str(text)?)
}

fn parse_spec_value(value: Value) -> crate::Result<TransformSpec> {
    spec_from_doc(serde_json::from_value(value)?)
}

/// Spec document for a bare transform name with default parameters.
pub fn default_spec_doc(name: &str) -> Option<Value> {
    Some(match name {
        "stft-box" => json!({"transform": name, "h": 1.0}),
        "stft-gauss" => json!({"transform": name, "sigma": 1.0}),
        "s-transform" => json!({"transform": name, "kappa": 1.0}),
        "cwt-harmonic" => json!({"transform": name, "m": 1.0, "n": 2.0}),
        "cwt-morse" => json!({"transform": name, "beta": 20.0, "gamma": 3.0}),
        _ => return None,
    })
}

/// JSON document describing a spec (round-trips through [`parse_spec`]).
pub fn spec_to_json(spec: &TransformSpec) -> Value {
    let scales = |s: &ScaleAxis| (s.c0(), s.s0(), s.first_level() + s.len());
    match spec {
        TransformSpec::StftBox { h } => json!({"transform": "stft-box", "h": h}),
        TransformSpec::StftGauss { sigma } => json!({"transform": "stft-gauss", "sigma": sigma}),
        TransformSpec::STrans { kappa } => json!({"transform": "s-transform", "kappa": kappa}),
        TransformSpec::STransGeneralized { k } => match k {
            KappaCurve::PowerLaw { kappa0, f_ref, p } => json!({
                "transform": "s-transform-generalized", "kappa0": kappa0, "f_ref": f_ref, "p": p
            }),
            KappaCurve::Tabulated { freqs, values } => json!({
                "transform": "s-transform-generalized", "freqs": freqs, "values": values
            }),
        },
        TransformSpec::CwtHarmonic { m, n, scales: s } => {
            let (c0, s0, levels) = scales(s);
            json!({"transform": "cwt-harmonic", "m": m, "n": n, "c0": c0, "s0": s0, "levels": levels})
        }
        TransformSpec::CwtMorse { beta, gamma, scales: s } => {
            let (c0, s0, levels) = scales(s);
            json!({
                "transform": "cwt-morse", "beta": beta, "gamma": gamma,
                "c0": c0, "s0": s0, "levels": levels
            })
        }
    }
}

// `--spec` accepts inline JSON, a JSON file or a bare transform name.
fn resolve_spec_doc(arg: &str) -> CliResult<Value> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if let Some(doc) = default_spec_doc(arg) {
        return Ok(doc);
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| usage(format!("--spec `{arg}`: not JSON, a known transform or a readable file ({e})")))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("--spec: {e}")))
}

fn resolve_spec(arg: &str) -> CliResult<TransformSpec> {
    parse_spec_value(resolve_spec_doc(arg)?).map_err(|e| usage(format!("--spec: {e}")))
}

// Sweeps

/// Parameter sweep `name=start:stop:count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl std::str::FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("sweep `{s}` is not of the form name=start:stop:count"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 || name.is_empty() {
            return Err(format!("sweep `{s}` is not of the form name=start:stop:count"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a count", parts[2]))?;
        let sweep = Sweep {
            name: name.trim().to_string(),
            start: num(parts[0])?,
            stop: num(parts[1])?,
            count,
        };
        if count == 0 || !sweep.start.is_finite() || !sweep.stop.is_finite() {
            return Err(format!("sweep `{s}` needs finite bounds and a positive count"));
        }
        if sweep.geometric() && !(sweep.start > 0.0 && sweep.stop > 0.0) {
            return Err(format!("geometric sweep of `{}` needs positive bounds", sweep.name));
        }
        Ok(sweep)
    }
}

impl Sweep {
    /// Scale-like parameters are swept geometrically, the rest linearly.
    pub fn geometric(&self) -> bool {
        matches!(self.name.as_str(), "h" | "sigma" | "kappa" | "kappa0")
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let u = i as f64 / last;
                if self.geometric() {
                    self.start * (self.stop / self.start).powf(u)
                } else {
                    self.start + (self.stop - self.start) * u
                }
            })
            .collect()
    }
}

fn parse_linear_axis(s: &str) -> std::result::Result<FrequencyAxis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("frequency axis `{s}` is not start:stop:count"));
    }
    let a: f64 = parts[0].parse().map_err(|_| format!("`{}` is not a number", parts[0]))?;
    let b: f64 = parts[1].parse().map_err(|_| format!("`{}` is not a number", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("`{}` is not a count", parts[2]))?;
    if n == 0 {
        return Err("frequency count must be positive".into());
    }
    let values = if n == 1 {
        vec![a]
    } else {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    };
    FrequencyAxis::new(values).map_err(|e| e.to_string())
}

/// Comma-separated ratio indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple(pub Vec<u32>);

impl std::str::FromStr for Tuple {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| format!("`{p}` is not a nonnegative integer")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Tuple)
    }
}

// Arguments

#[derive(Debug, Parser)]
#[command(
    name = "epsd",
    version,
    about = "Evolutionary power spectral density estimation, residual analysis and Monte Carlo validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelKind {
    /// Lognormal-in-frequency seismic target.
    Seismic,
    /// Stationary band-limited white noise.
    Flat,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "seismic")]
    model: ModelKind,
    /// JSON file overriding the seismic model parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Two-sided level of the flat model.
    #[arg(long, default_value_t = 1.0)]
    flat_level: f64,
    /// Upper band edge of the flat model (Hz).
    #[arg(long, default_value_t = 20.0)]
    flat_band: f64,
    /// Duration of the flat model (s).
    #[arg(long, default_value_t = 21.5)]
    flat_duration: f64,
}

impl ModelArgs {
    fn build(&self) -> CliResult<(EpsdModel, Value)> {
        match self.model {
            ModelKind::Seismic => {
                let params = match &self.params {
                    Some(p) => {
                        let text = std::fs::read_to_string(p)
                            .map_err(|e| usage(format!("--params {}: {e}", p.display())))?;
                        serde_json::from_str::<SeismicModelParams>(&text)
                            .map_err(|e| usage(format!("--params {}: {e}", p.display())))?
                    }
                    None => SeismicModelParams::default(),
                };
                let desc = json!({"name": "seismic", "params": params});
                let model = EpsdModel::seismic(params).map_err(|e| usage(format!("--params: {e}")))?;
                Ok((model, desc))
            }
            ModelKind::Flat => {
                let model = EpsdModel::flat(self.flat_level, self.flat_band, self.flat_duration)
                    .map_err(|e| usage(e.to_string()))?;
                let desc = json!({
                    "name": "flat", "level": self.flat_level, "band": self.flat_band, "duration": self.flat_duration
                });
                Ok((model, desc))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// Box h = 1, Gaussian σ = 1, ST κ = 1, harmonic (1, √2), Morse (20, 3).
    Figure8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate records with the spectral representation method.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Transform coefficients of one series.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// JSON text, JSON file or transform name.
        #[arg(long)]
        spec: String,
        /// Analysis frequencies `start:stop:count` (STFT/ST; default DFT bins).
        #[arg(long, value_parser = parse_linear_axis)]
        freqs: Option<FrequencyAxis>,
        #[arg(long)]
        out: PathBuf,
    },
    /// EPSD estimate of a series, or ensemble mean of a directory of series.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        spec: String,
        #[arg(long, value_parser = parse_linear_axis)]
        freqs: Option<FrequencyAxis>,
        /// Half-width (s) of the time-smoothing box.
        #[arg(long)]
        smooth_halfwidth: Option<f64>,
        /// Also write the ensemble standard deviation next to `--out`.
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Signed residual grid of a model.
    Residual {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
        /// Sampling interval defining the frequency grid and the default box band.
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
        /// Time step of the residual grid (s).
        #[arg(long, default_value_t = 0.1)]
        time_step: f64,
        /// Box-window integration band (Hz); default Nyquist.
        #[arg(long)]
        band: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ratio integrals along a parameter sweep.
    Ratios {
        #[arg(long)]
        spec: String,
        /// `name=start:stop:count`; `f` sweeps the analysis frequency.
        #[arg(long)]
        sweep: Sweep,
        /// `k,l,m,n` for STFT/ST or `j,k` for CWT.
        #[arg(long)]
        tuple: Tuple,
        /// Analysis frequency for ST and CWT ratios (Hz).
        #[arg(long, default_value_t = 1.0)]
        freq: f64,
        /// Box-window integration band (Hz).
        #[arg(long, default_value_t = 25.0)]
        band: f64,
        /// Output CSV (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalization constants of a transform.
    Constants {
        #[arg(long)]
        spec: String,
        /// Analysis frequency for the S-transform (Hz).
        #[arg(long)]
        freq: Option<f64>,
    },
    /// Monte Carlo study against the model.
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "figure8")]
        preset: Preset,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lowest CWT frequency (Hz).
        #[arg(long, default_value_t = DEFAULT_F_MIN)]
        f_min: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Residual grids of every preset transform.
    ResidualStudy {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "figure8")]
        preset: Preset,
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
        #[arg(long, default_value_t = 0.1)]
        time_step: f64,
        #[arg(long)]
        band: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_F_MIN)]
        f_min: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

// Commands

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Run(e.into()))
}

fn simulate(model: &ModelArgs, samples: usize, dt: f64, seed: u64, out: &Path) -> CliResult<()> {
    if samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let (model, desc) = model.build()?;
    let sim = SrmSimulator::new(&model, dt, seed)?;
    create_dir(out)?;
    let mut files = Vec::with_capacity(samples);
    for start in (0..samples).step_by(64) {
        let count = 64.min(samples - start);
        for (i, ts) in sim.records(start as u64, count).iter().enumerate() {
            let name = format!("record_{:05}.csv", start + i);
            io::write_series(&out.join(&name), ts)?;
            files.push(name);
        }
    }
    let manifest = json!({
        "model": desc,
        "seed": seed,
        "samples": samples,
        "dt": dt,
        "record_len": sim.record_len(),
        "harmonics": sim.harmonics().len(),
        "files": files,
    });
    io::write_json(&out.join("manifest.json"), &manifest)?;
    Ok(())
}

fn transform_cmd(input: &Path, spec: &str, freqs: Option<&FrequencyAxis>, out: &Path) -> CliResult<()> {
    let spec = resolve_spec(spec)?;
    let ts = io::read_series(input)?;
    let coeffs = crate::transforms::transform(&ts, &spec, freqs)?;
    io::write_coefficients(out, &coeffs, Some(spec.name()))?;
    Ok(())
}

fn estimate_one(plan: &TransformPlan, spec: &TransformSpec, ts: &TimeSeries, smooth: Option<f64>) -> crate::Result<SpectralGrid> {
    let grid = epsd_estimate(&plan.apply(ts)?, spec)?;
    match smooth {
        Some(h) => smooth_time(&grid, h),
        None => Ok(grid),
    }
}

/// `out` with `suffix` inserted before the extension.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn estimate_cmd(
    input: &Path,
    spec: &str,
    freqs: Option<&FrequencyAxis>,
    smooth: Option<f64>,
    stats: bool,
    out: &Path,
) -> CliResult<()> {
    let spec = resolve_spec(spec)?;
    let inputs = if input.is_dir() {
        let files = io::csv_files(input)?;
        if files.len() < 2 {
            return Err(usage(format!("{}: ensemble needs at least two series", input.display())));
        }
        files
    } else {
        if stats {
            return Err(usage("--stats needs a directory of at least two series"));
        }
        vec![input.to_path_buf()]
    };
    let first = io::read_series(&inputs[0])?;
    let plan = TransformPlan::new(&spec, first.len(), first.dt(), freqs)?;
    if inputs.len() == 1 {
        io::write_grid(out, &estimate_one(&plan, &spec, &first, smooth)?)?;
        return Ok(());
    }
    let mut acc = EnsembleAccumulator::new();
    let mut shape = None;
    for (k, path) in inputs.iter().enumerate() {
        let ts = if k == 0 { first.clone() } else { io::read_series(path)? };
        let grid = estimate_one(&plan, &spec, &ts, smooth)?;
        acc.push(grid.values())?;
        if shape.is_none() {
            shape = Some(grid);
        }
    }
    let shape = shape.expect("at least two inputs");
    let (mean, std) = acc.finish()?;
    io::write_grid(out, &shape.with_values(mean, false)?)?;
    if stats {
        io::write_grid(&sibling(out, "_std"), &shape.with_values(std, false)?)?;
    }
    Ok(())
}

fn box_band(spec: &TransformSpec, band: Option<f64>, dt: f64) -> Option<f64> {
    match (spec, band) {
        (_, Some(b)) => Some(b),
        (TransformSpec::StftBox { .. }, None) => Some(0.5 / dt),
        _ => None,
    }
}

fn residual_cmd(
    model: &ModelArgs,
    spec: &str,
    order: u32,
    dt: f64,
    time_step: f64,
    band: Option<f64>,
    out: &Path,
) -> CliResult<()> {
    let spec = resolve_spec(spec)?;
    let order = Order::try_from(order).map_err(|e| usage(e.to_string()))?;
    let (model, _) = model.build()?;
    let (freqs, times) = residual_axes(&model, dt, time_step)?;
    let grid = residual_grid_masked(
        &model,
        &spec,
        &freqs,
        &times,
        order,
        box_band(&spec, band, dt),
        Some(crate::pipeline::POWER_MASK),
    )?;
    io::write_grid(out, &grid)?;
    Ok(())
}

fn ratios_cmd(
    spec: &str,
    sweep: &Sweep,
    tuple: &[u32],
    freq: f64,
    band: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let doc = resolve_spec_doc(spec)?;
    let base = parse_spec_value(doc.clone()).map_err(|e| usage(format!("--spec: {e}")))?;
    let family = base.family();
    match (family, tuple.len()) {
        (Family::Cwt, 2) | (Family::Stft | Family::STransform, 4) => {}
        (Family::Cwt, _) => return Err(usage("--tuple for a CWT is j,k")),
        _ => return Err(usage("--tuple for STFT/ST is k,l,m,n")),
    }
    if sweep.name != "f" && doc.get(&sweep.name).is_none() {
        return Err(usage(format!(
            "--sweep parameter `{}` is neither `f` nor a field of the {} spec",
            sweep.name,
            base.name()
        )));
    }
    if sweep.name == "f" && family == Family::Stft {
        return Err(usage("STFT ratios do not depend on the analysis frequency"));
    }
    let mut lines = vec![format!("{},ratio", sweep.name)];
    for v in sweep.values() {
        let (spec, f) = if sweep.name == "f" {
            (base.clone(), v)
        } else {
            let mut d = doc.clone();
            d[sweep.name.as_str()] = json!(v);
            (parse_spec_value(d).map_err(|e| usage(format!("--sweep: {e}")))?, freq)
        };
        let r = match family {
            Family::Stft => {
                let b = matches!(spec, TransformSpec::StftBox { .. }).then_some(band);
                ratio_stft(&spec, tuple[0], tuple[1], tuple[2], tuple[3], b)?
            }
            Family::STransform => ratio_st(&spec, f, tuple[0], tuple[1], tuple[2], tuple[3])?,
            Family::Cwt => ratio_cwt(&spec, f, tuple[0], tuple[1])?,
        };
        lines.push(format!("{v},{r}"));
    }
    let text = lines.join("\n") + "\n";
    match out {
        Some(path) => io::write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn constants_cmd(spec: &str, freq: Option<f64>) -> CliResult<()> {
    let spec = resolve_spec(spec)?;
    let c = norm_constants(&spec, freq)?;
    print!("{}", c.to_text());
    println!("{}", serde_json::to_string_pretty(&c).map_err(EpsdError::from)?);
    Ok(())
}

fn preset_specs(preset: Preset, f_min: f64) -> CliResult<Vec<TransformSpec>> {
    match preset {
        Preset::Figure8 => figure8_preset(f_min).map_err(|e| usage(e.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn mc_cmd(
    model: &ModelArgs,
    preset: Preset,
    samples: usize,
    dt: f64,
    seed: u64,
    f_min: f64,
    out: &Path,
) -> CliResult<()> {
    if samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    let (model, desc) = model.build()?;
    let specs = preset_specs(preset, f_min)?;
    let report = run_mc_with(&model, &specs, samples, dt, seed, &McConfig::default())?;
    create_dir(out)?;
    io::write_grid(&out.join("target.csv"), &report.target)?;
    let mut entries = Vec::new();
    for o in &report.outcomes {
        let name = o.spec.name();
        match &o.result {
            Ok(r) => {
                io::write_grid(&out.join(format!("{name}_mean.csv")), &r.mean)?;
                io::write_grid(&out.join(format!("{name}_std.csv")), &r.std)?;
                io::write_grid(&out.join(format!("{name}_diff.csv")), &r.diff)?;
                entries.push(json!({
                    "transform": name, "spec": spec_to_json(&o.spec), "status": "ok",
                    "dropped_levels": r.dropped_levels, "metrics": r.metrics,
                }));
            }
            Err(e) => entries.push(json!({
                "transform": name, "spec": spec_to_json(&o.spec), "status": "failed", "error": e,
            })),
        }
    }
    let summary = json!({
        "model": desc, "samples": samples, "seed": seed, "dt": dt, "transforms": entries,
    });
    io::write_json(&out.join("summary.json"), &summary)?;
    let failed = report.outcomes.iter().filter(|o| o.result.is_err()).count();
    if failed > 0 {
        eprintln!("epsd: {failed} transform(s) failed; see summary.json");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn residual_study_cmd(
    model: &ModelArgs,
    preset: Preset,
    dt: f64,
    time_step: f64,
    band: Option<f64>,
    f_min: f64,
    out: &Path,
) -> CliResult<()> {
    let (model, desc) = model.build()?;
    let specs = preset_specs(preset, f_min)?;
    let (freqs, times) = residual_axes(&model, dt, time_step)?;
    let band = band.unwrap_or(0.5 / dt);
    let results = run_residual_study(&model, &specs, &freqs, &times, Some(band))?;
    create_dir(out)?;
    let mut entries = Vec::new();
    for r in &results {
        let name = r.spec.name();
        io::write_grid(&out.join(format!("{name}_r2.csv")), &r.second)?;
        if let Some(g) = &r.first {
            io::write_grid(&out.join(format!("{name}_r1.csv")), g)?;
        }
        entries.push(json!({
            "transform": name, "spec": spec_to_json(&r.spec),
            "aggregate_r1": r.aggregate_first, "aggregate_r2": r.aggregate_second,
        }));
    }
    let summary = json!({"model": desc, "dt": dt, "band": band, "transforms": entries});
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("EPSD_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("EPSD_THREADS=`{v}` is not a positive integer")))?;
        // A pool already built by the host process is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(command: Command) -> CliResult<()> {
    configure_threads()?;
    match command {
        Command::Simulate { model, samples, dt, seed, out } => simulate(&model, samples, dt, seed, &out),
        Command::Transform { input, spec, freqs, out } => transform_cmd(&input, &spec, freqs.as_ref(), &out),
        Command::Estimate { input, spec, freqs, smooth_halfwidth, stats, out } => {
            estimate_cmd(&input, &spec, freqs.as_ref(), smooth_halfwidth, stats, &out)
        }
        Command::Residual { model, spec, order, dt, time_step, band, out } => {
            residual_cmd(&model, &spec, order, dt, time_step, band, &out)
        }
        Command::Ratios { spec, sweep, tuple, freq, band, out } => {
            ratios_cmd(&spec, &sweep, &tuple.0, freq, band, out.as_deref())
        }
        Command::Constants { spec, freq } => constants_cmd(&spec, freq),
        Command::Mc { model, preset, samples, dt, seed, f_min, out } => {
            mc_cmd(&model, preset, samples, dt, seed, f_min, &out)
        }
        Command::ResidualStudy { model, preset, dt, time_step, band, f_min, out } => {
            residual_study_cmd(&model, preset, dt, time_step, band, f_min, &out)
        }
    }
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("epsd: {e}");
            match e {
                CliError::Usage(_) => 2,
                CliError::Run(_) => 1,
            }
        }
    }
}
