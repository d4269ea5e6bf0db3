//! Target EPSD models and spectral-representation simulation of evolutionary
//! Gaussian records.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EpsdError, Result};
use crate::series::TimeSeries;

/// Value and first/second partial derivatives of `A = √S_E` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmplitudeJet {
    pub a: f64,
    pub a_f: f64,
    pub a_t: f64,
    pub a_ff: f64,
    pub a_ft: f64,
    pub a_tt: f64,
}

pub type SurfaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type JetFn = Arc<dyn Fn(f64, f64) -> AmplitudeJet + Send + Sync>;

/// Two-sided evolutionary PSD `S_E(f, t)` over `[0, duration]`.
///
/// Evaluation is symmetric in `f` by construction.
#[derive(Clone)]
pub struct EpsdModel {
    name: String,
    duration: f64,
    surface: SurfaceFn,
    jet: Option<JetFn>,
    seismic: Option<SeismicModelParams>,
}

impl fmt::Debug for EpsdModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EpsdModel")
            .field("name", &self.name)
            .field("duration", &self.duration)
            .field("analytic_derivatives", &self.jet.is_some())
            .finish()
    }
}

impl EpsdModel {
    pub fn new(
        name: impl Into<String>,
        duration: f64,
        surface: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(EpsdError::param("duration", "must be positive"));
        }
        Ok(Self {
            name: name.into(),
            duration,
            surface: Arc::new(surface),
            jet: None,
            seismic: None,
        })
    }

    /// Attach analytic derivatives of `A = √S_E` (evaluated at `f >= 0`).
    pub fn with_jet(
        mut self,
        jet: impl Fn(f64, f64) -> AmplitudeJet + Send + Sync + 'static,
    ) -> Self {
        self.jet = Some(Arc::new(jet));
        self
    }

    /// `S_E = s0` everywhere.
    pub fn constant(s0: f64, duration: f64) -> Result<Self> {
        if !(s0.is_finite() && s0 >= 0.0) {
            return Err(EpsdError::param("s0", "must be nonnegative"));
        }
        let a = s0.sqrt();
        Ok(Self::new("constant", duration, move |_, _| s0)?.with_jet(move |_, _| AmplitudeJet {
            a,
            ..AmplitudeJet::default()
        }))
    }

    /// Stationary band-limited white: `S_E = s0` on `|f| <= band`, 0 beyond.
    pub fn flat(s0: f64, band: f64, duration: f64) -> Result<Self> {
        if !(s0.is_finite() && s0 >= 0.0) {
            return Err(EpsdError::param("s0", "must be nonnegative"));
        }
        if !(band.is_finite() && band > 0.0) {
            return Err(EpsdError::param("band", "must be positive"));
        }
        Self::new("flat", duration, move |f, _| if f.abs() <= band { s0 } else { 0.0 })
    }

    /// Lognormal-in-frequency seismic target with the given parameters.
    pub fn seismic(params: SeismicModelParams) -> Result<Self> {
        params.validate()?;
        let p = params.clone();
        let q = params.clone();
        let mut model = Self::new("seismic", params.duration, move |f, t| p.eval(f, t))?
            .with_jet(move |f, t| q.jet(f, t));
        model.seismic = Some(params);
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn seismic_params(&self) -> Option<&SeismicModelParams> {
        self.seismic.as_ref()
    }

    pub fn has_jet(&self) -> bool {
        self.jet.is_some()
    }

    /// `S_E(f, t)`.
    pub fn eval(&self, f: f64, t: f64) -> f64 {
        (self.surface)(f.abs(), t)
    }

    /// Analytic jet of `A`, if provided.
    pub fn jet(&self, f: f64, t: f64) -> Option<AmplitudeJet> {
        self.jet.as_ref().map(|j| j(f, t))
    }

    /// Values on a frequency × time grid.
    pub fn grid(&self, freqs: &[f64], times: &[f64]) -> Array2<f64> {
        Array2::from_shape_fn((freqs.len(), times.len()), |(i, j)| self.eval(freqs[i], times[j]))
    }
}

/// Parameters of the lognormal-in-frequency seismic target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeismicModelParams {
    /// Total energy scale `E_T` (cm²/s³).
    pub e_t: f64,
    /// Duration `T` (s).
    pub duration: f64,
    pub eta: f64,
    /// `ln F_c(t) = fc_a - fc_b ln t`.
    pub fc_a: f64,
    pub fc_b: f64,
    /// `λ0(t) = exp(-(ln t - lambda_mu)²/lambda_d) / (lambda_c · t · √(lambda_k))`.
    pub lambda_c: f64,
    pub lambda_k: f64,
    pub lambda_mu: f64,
    pub lambda_d: f64,
}

impl Default for SeismicModelParams {
    fn default() -> Self {
        Self {
            e_t: 1478.0,
            duration: 21.5,
            eta: 0.71,
            fc_a: 1.942,
            fc_b: 0.35,
            lambda_c: 0.42,
            lambda_k: 1.42 * PI,
            lambda_mu: 2.15,
            lambda_d: 0.18,
        }
    }
}

impl SeismicModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("e_t", self.e_t),
            ("duration", self.duration),
            ("eta", self.eta),
            ("lambda_c", self.lambda_c),
            ("lambda_k", self.lambda_k),
            ("lambda_d", self.lambda_d),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EpsdError::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.fc_a.is_finite() && self.fc_b.is_finite() && self.lambda_mu.is_finite()) {
            return Err(EpsdError::param("fc/lambda", "must be finite"));
        }
        Ok(())
    }

    /// Time envelope `λ0(t)`; 0 for `t <= 0`.
    pub fn lambda0(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let v = t.ln();
        (-(v - self.lambda_mu).powi(2) / self.lambda_d).exp()
            / (self.lambda_c * t * self.lambda_k.sqrt())
    }

    /// Corner frequency `F_c(t)`.
    pub fn corner(&self, t: f64) -> f64 {
        (self.fc_a - self.fc_b * t.ln()).exp()
    }

    /// `∫ S_E(f, t) df` over the whole line, `E_T λ0(t)`.
    pub fn total_power(&self, t: f64) -> f64 {
        self.e_t * self.lambda0(t)
    }

    // ln S_E and its partials in (u, v) = (ln f, ln t).
    fn log_surface(&self, f: f64, t: f64) -> [f64; 6] {
        let (u, v) = (f.ln(), t.ln());
        let eta = self.eta;
        let z = (u - self.fc_a + self.fc_b * v + 0.5 * eta * eta) / eta;
        let ln_lambda = -(v - self.lambda_mu).powi(2) / self.lambda_d
            - self.lambda_c.ln()
            - v
            - 0.5 * self.lambda_k.ln();
        let value = (0.5 * self.e_t).ln() + ln_lambda
            - u
            - ((2.0 * PI).sqrt() * eta).ln()
            - 0.5 * z * z;
        let d_u = -1.0 - z / eta;
        let d_v = -2.0 * (v - self.lambda_mu) / self.lambda_d - 1.0 - z * self.fc_b / eta;
        let d_uu = -1.0 / (eta * eta);
        let d_uv = -self.fc_b / (eta * eta);
        let d_vv = -2.0 / self.lambda_d - (self.fc_b / eta).powi(2);
        [value, d_u, d_v, d_uu, d_uv, d_vv]
    }

    /// `S_E(f, t)`; 0 for `t <= 0` or `f = 0`.
    pub fn eval(&self, f: f64, t: f64) -> f64 {
        let f = f.abs();
        if t <= 0.0 || f == 0.0 {
            return 0.0;
        }
        self.log_surface(f, t)[0].exp()
    }

    /// Analytic jet of `A = √S_E` for `f > 0`, `t > 0` (zero elsewhere).
    pub fn jet(&self, f: f64, t: f64) -> AmplitudeJet {
        let f = f.abs();
        if t <= 0.0 || f == 0.0 {
            return AmplitudeJet::default();
        }
        let [ls, su, sv, suu, suv, svv] = self.log_surface(f, t);
        // L = ln A = ½ ln S_E
        let a = (0.5 * ls).exp();
        let (lu, lv, luu, luv, lvv) = (0.5 * su, 0.5 * sv, 0.5 * suu, 0.5 * suv, 0.5 * svv);
        // ∂_f = ∂_u / f, ∂²_f = (∂²_u - ∂_u)/f²
        let lf = lu / f;
        let lt = lv / t;
        let lff = (luu - lu) / (f * f);
        let ltt = (lvv - lv) / (t * t);
        let lft = luv / (f * t);
        AmplitudeJet {
            a,
            a_f: a * lf,
            a_t: a * lt,
            a_ff: a * (lff + lf * lf),
            a_ft: a * (lft + lf * lt),
            a_tt: a * (ltt + lt * lt),
        }
    }
}

/// Spectral-representation generator with precomputed amplitude tables.
///
/// `x(t_q) = Σ_k √(4 S_E(f_k, t_q) Δf) cos(2π f_k t_q + φ_k)` with
/// `f_k = (k + ½)Δf < Nyquist`, `Δf = 1/T` and phases uniform on `[0, 2π)`.
#[derive(Debug, Clone)]
pub struct SrmSimulator {
    n: usize,
    dt: f64,
    seed: u64,
    freqs: Vec<f64>,
    // a_kq cos(2π f_k t_q) and a_kq sin(2π f_k t_q), harmonics × samples.
    p: Array2<f64>,
    q: Array2<f64>,
}

impl SrmSimulator {
    pub fn new(model: &EpsdModel, dt: f64, seed: u64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EpsdError::param("dt", "must be positive"));
        }
        let duration = model.duration();
        let n = (duration / dt).round() as usize;
        if n < 2 || (n as f64 * dt - duration).abs() > dt {
            return Err(EpsdError::param(
                "dt",
                format!("duration {duration} s is not resolved by dt = {dt} s"),
            ));
        }
        let df = 1.0 / duration;
        let nyquist = 0.5 / dt;
        let freqs: Vec<f64> = (0..)
            .map(|k| (k as f64 + 0.5) * df)
            // A harmonic exactly at Nyquist would have phase-dependent power.
            .take_while(|&f| f < nyquist * (1.0 - 1e-12))
            .collect();
        let mut p = Array2::<f64>::zeros((freqs.len(), n));
        let mut q = Array2::<f64>::zeros((freqs.len(), n));
        for (k, &f) in freqs.iter().enumerate() {
            for j in 0..n {
                let t = j as f64 * dt;
                let s = model.eval(f, t);
                if !s.is_finite() || s < 0.0 {
                    return Err(EpsdError::Model(format!(
                        "model value {s} at f = {f} Hz, t = {t} s is not a nonnegative number"
                    )));
                }
                let amp = (4.0 * s * df).sqrt();
                let (sin, cos) = (2.0 * PI * f * t).sin_cos();
                p[[k, j]] = amp * cos;
                q[[k, j]] = amp * sin;
            }
        }
        Ok(Self {
            n,
            dt,
            seed,
            freqs,
            p,
            q,
        })
    }

    pub fn record_len(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn harmonics(&self) -> &[f64] {
        &self.freqs
    }

    /// Exact ensemble variance at sample `j`: the sum of `a_k²/2` over harmonics.
    pub fn expected_variance(&self, j: usize) -> f64 {
        self.p
            .column(j)
            .iter()
            .zip(self.q.column(j))
            .map(|(a, b)| 0.5 * (a * a + b * b))
            .sum()
    }

    /// Phases of record `index`: the stream `(seed, index)`, harmonic `k` taking the `k`-th draw.
    pub fn phases(&self, index: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        (0..self.freqs.len())
            .map(|_| 2.0 * PI * rng.gen::<f64>())
            .collect()
    }

    /// Record number `index`; depends only on `(model, dt, seed, index)`.
    pub fn record(&self, index: u64) -> TimeSeries {
        let phases = self.phases(index);
        let mut x = vec![0.0; self.n];
        for (k, phi) in phases.iter().enumerate() {
            let (s, c) = phi.sin_cos();
            let pk = self.p.row(k);
            let qk = self.q.row(k);
            let pk = pk.as_slice().expect("standard layout");
            let qk = qk.as_slice().expect("standard layout");
            for ((xj, &a), &b) in x.iter_mut().zip(pk).zip(qk) {
                *xj += a * c - b * s;
            }
        }
        TimeSeries::new(x, self.dt).expect("finite by construction")
    }

    /// Records `start..start + count`, generated in parallel.
    pub fn records(&self, start: u64, count: usize) -> Vec<TimeSeries> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.record(start + i))
            .collect()
    }
}

/// `n_records` spectral-representation records of `model` at interval `dt`.
pub fn srm_simulate(model: &EpsdModel, n_records: usize, dt: f64, seed: u64) -> Result<Vec<TimeSeries>> {
    Ok(SrmSimulator::new(model, dt, seed)?.records(0, n_records))
}
