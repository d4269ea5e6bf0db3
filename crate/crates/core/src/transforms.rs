//! STFT, S-transform and CWT coefficient grids.
//!
//! Every transform is evaluated as a bank of FFT-based filters, one row per
//! analysis frequency or scale, on a dense time grid equal to the sample grid.
//!
//! * STFT and ST rows are the Riemann sum
//!   `x(f, τ_q) = Σ_p x_p v(t_p - τ_q) e^{-i2πf t_p} Δt` with the window truncated
//!   by the record (linear convolution, zero padded to avoid wrap-around).
//! * CWT rows follow the frequency-domain form
//!   `x_w(s, qΔt) = √s (1/N) Σ_k X_k ψ̂*(s f_k) e^{i2πkq/N}` where `X_k` is the
//!   unnormalized DFT and `f_k` the signed frequency of bin `k`.
//!
//! Each cell carries a validity value: the fraction of the row kernel's energy
//! whose source samples lie inside the record.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::axis::{Axis, FrequencyAxis, ScaleAxis};
use crate::error::{EpsdError, Result};
use crate::fourier::fast_len;
use crate::grid::CoefficientGrid;
use crate::kernels::{Family, TransformSpec, Window};
use crate::series::TimeSeries;

/// Precomputed filter bank for one spec, record length and sampling interval.
///
/// Build once and apply to many records of the same shape.
pub struct TransformPlan {
    spec: TransformSpec,
    n: usize,
    dt: f64,
    axis: Axis,
    dropped: usize,
    // Analysis frequency per row; drives the STFT/ST phase reference.
    row_freqs: Vec<f64>,
    // Frequency responses, rows × fft_len.
    filters: Array2<Complex64>,
    validity: Array2<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan")
            .field("spec", &self.spec)
            .field("n", &self.n)
            .field("dt", &self.dt)
            .field("rows", &self.filters.nrows())
            .field("fft_len", &self.filters.ncols())
            .field("dropped", &self.dropped)
            .finish()
    }
}

/// Scale levels of a CWT spec whose center frequency `f0/s` does not exceed the
/// Nyquist frequency, and the number of leading levels dropped.
pub fn resolvable_scales(spec: &TransformSpec, dt: f64) -> Result<(ScaleAxis, usize)> {
    let (wavelet, scales) = match (spec.wavelet(), spec.scales()) {
        (Some(w), Some(s)) => (w, s),
        _ => return Err(EpsdError::SpecMismatch(format!("{} is not a CWT", spec.name()))),
    };
    let nyquist = 0.5 / dt;
    let f0 = wavelet.f0();
    let skip = (0..scales.len())
        .take_while(|&j| f0 / scales.scale(j) > nyquist * (1.0 + 1e-12))
        .count();
    match scales.drop_first(skip) {
        Some(kept) => Ok((kept, skip)),
        None => Err(EpsdError::param(
            "scales",
            format!("every level has f0/s above the Nyquist frequency {nyquist} Hz"),
        )),
    }
}

impl TransformPlan {
    /// Plan for records of `n` samples at interval `dt`.
    ///
    /// `freqs` selects the STFT/ST analysis frequencies (default: DFT bins in
    /// `(0, Nyquist]`); it is ignored for the CWT, whose rows are its scales.
    pub fn new(
        spec: &TransformSpec,
        n: usize,
        dt: f64,
        freqs: Option<&FrequencyAxis>,
    ) -> Result<Self> {
        spec.validate()?;
        if n < 2 {
            return Err(EpsdError::InvalidInput("record needs at least two samples".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EpsdError::param("dt", "must be positive"));
        }
        match spec.family() {
            Family::Stft | Family::STransform => {
                let freqs = match freqs {
                    Some(f) => f.clone(),
                    None => FrequencyAxis::dft_bins(n, dt)?,
                };
                Self::window_bank(spec, n, dt, freqs)
            }
            Family::Cwt => Self::wavelet_bank(spec, n, dt),
        }
    }

    fn window_bank(spec: &TransformSpec, n: usize, dt: f64, freqs: FrequencyAxis) -> Result<Self> {
        if freqs.is_empty() {
            return Err(EpsdError::InvalidInput("empty frequency axis".into()));
        }
        let duration = n as f64 * dt;
        if let TransformSpec::StftBox { h } = spec {
            if *h > duration {
                return Err(EpsdError::param(
                    "h",
                    format!("box half-width {h} s exceeds the record duration {duration} s"),
                ));
            }
        }
        if let TransformSpec::StftGauss { sigma } = spec {
            if 4.0 * sigma > duration {
                return Err(EpsdError::param(
                    "sigma",
                    format!("4σ = {} s exceeds the record duration {duration} s", 4.0 * sigma),
                ));
            }
        }
        let windows = freqs
            .values()
            .iter()
            .map(|&f| spec.window(Some(f)))
            .collect::<Result<Vec<Window>>>()?;

        let m = fast_len(2 * n - 1);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let rows = freqs.len();
        let mut filters = Array2::<Complex64>::zeros((rows, m));
        let mut validity = Array2::<f64>::zeros((rows, n));
        let mut scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len()];

        // STFT rows share one window; reuse its validity row.
        let shared_validity = match spec.family() {
            Family::Stft => Some(window_validity(&windows[0], n, dt)),
            _ => None,
        };
        for (r, (&f, w)) in freqs.values().iter().zip(&windows).enumerate() {
            let mut row = filters.row_mut(r);
            let buf = row.as_slice_mut().expect("standard layout");
            for d in -(n as i64 - 1)..=(n as i64 - 1) {
                let t = d as f64 * dt;
                let v = w.value(t);
                if v == 0.0 {
                    continue;
                }
                let idx = d.rem_euclid(m as i64) as usize;
                buf[idx] = Complex64::from_polar(v * dt, 2.0 * PI * f * t);
            }
            fwd.process_with_scratch(buf, &mut scratch);
            let vrow = match &shared_validity {
                Some(v) => v.clone(),
                None => window_validity(w, n, dt),
            };
            validity.row_mut(r).assign(&ndarray::Array1::from(vrow));
        }
        Ok(Self {
            spec: spec.clone(),
            n,
            dt,
            axis: Axis::Frequency(freqs.clone()),
            dropped: 0,
            row_freqs: freqs.values().to_vec(),
            filters,
            validity,
            fwd,
            inv,
        })
    }

    fn wavelet_bank(spec: &TransformSpec, n: usize, dt: f64) -> Result<Self> {
        let (scales, dropped) = resolvable_scales(spec, dt)?;
        let wavelet = spec.wavelet().expect("CWT spec");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let df = 1.0 / (n as f64 * dt);
        let rows = scales.len();
        let mut filters = Array2::<Complex64>::zeros((rows, n));
        let mut validity = Array2::<f64>::zeros((rows, n));
        let mut scratch = vec![Complex64::default(); inv.get_inplace_scratch_len()];
        let mut kernel = vec![Complex64::default(); n];
        for r in 0..rows {
            let s = scales.scale(r);
            let root = s.sqrt();
            for k in 0..n {
                let fk = signed_bin(k, n) as f64 * df;
                // ψ̂ is real for both wavelets, so ψ̂* = ψ̂.
                filters[[r, k]] = Complex64::new(root * wavelet.ft(s * fk), 0.0);
            }
            // Circular impulse response h[m]; source of output q at lag m is q - m.
            kernel.copy_from_slice(filters.row(r).as_slice().expect("standard layout"));
            inv.process_with_scratch(&mut kernel, &mut scratch);
            let energy: Vec<f64> = (0..n)
                .map(|j| {
                    // signed lag ℓ = j - offset
                    let lag = j as i64 - (n as i64 - 1) / 2;
                    kernel[lag.rem_euclid(n as i64) as usize].norm_sqr()
                })
                .collect();
            let offset = (n as i64 - 1) / 2;
            let prefix = prefix_sums(&energy);
            let total = prefix[n];
            for q in 0..n {
                // inside iff q - n + 1 <= ℓ <= q
                let lo = (q as i64 - n as i64 + 1 + offset).max(0) as usize;
                let hi = ((q as i64 + offset).min(n as i64 - 1) + 1) as usize;
                validity[[r, q]] = if total > 0.0 {
                    ((prefix[hi] - prefix[lo]) / total).clamp(0.0, 1.0)
                } else {
                    0.0
                };
            }
        }
        let f0 = wavelet.f0();
        let row_freqs = (0..rows).map(|r| f0 / scales.scale(r)).collect();
        Ok(Self {
            spec: spec.clone(),
            n,
            dt,
            axis: Axis::Scale(scales),
            dropped,
            row_freqs,
            filters,
            validity,
            fwd,
            inv,
        })
    }

    pub fn spec(&self) -> &TransformSpec {
        &self.spec
    }

    /// Frequency axis (STFT/ST) or retained scale axis (CWT).
    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    /// CWT levels dropped for exceeding the Nyquist frequency.
    pub fn dropped_levels(&self) -> usize {
        self.dropped
    }

    /// Analysis frequency of each row (`f0/s` for CWT rows).
    pub fn row_freqs(&self) -> &[f64] {
        &self.row_freqs
    }

    pub fn validity(&self) -> &Array2<f64> {
        &self.validity
    }

    pub fn record_len(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn check(&self, ts: &TimeSeries) -> Result<()> {
        if ts.len() != self.n || (ts.dt() - self.dt).abs() > 1e-12 * self.dt {
            return Err(EpsdError::DimensionMismatch(format!(
                "plan expects {} samples at dt = {}, got {} at dt = {}",
                self.n,
                self.dt,
                ts.len(),
                ts.dt()
            )));
        }
        Ok(())
    }

    // Calls `sink(row, values)` with the unphased filter output for each row.
    fn for_each_row<F: FnMut(usize, &[Complex64])>(&self, ts: &TimeSeries, mut sink: F) {
        let m = self.filters.ncols();
        let mut spectrum = vec![Complex64::default(); m];
        for (z, &x) in spectrum.iter_mut().zip(ts.samples()) {
            *z = Complex64::new(x, 0.0);
        }
        let mut scratch =
            vec![Complex64::default(); self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())];
        self.fwd.process_with_scratch(&mut spectrum, &mut scratch);
        let mut buf = vec![Complex64::default(); m];
        let scale = 1.0 / m as f64;
        for r in 0..self.filters.nrows() {
            let h = self.filters.row(r);
            for ((b, x), g) in buf.iter_mut().zip(&spectrum).zip(h.iter()) {
                *b = x * g;
            }
            self.inv.process_with_scratch(&mut buf, &mut scratch);
            for b in buf[..self.n].iter_mut() {
                *b *= scale;
            }
            sink(r, &buf[..self.n]);
        }
    }

    /// Complex coefficient grid of one record.
    pub fn apply(&self, ts: &TimeSeries) -> Result<CoefficientGrid> {
        self.check(ts)?;
        let mut values = Array2::<Complex64>::zeros((self.filters.nrows(), self.n));
        let phased = self.spec.family() != Family::Cwt;
        let times = ts.times();
        self.for_each_row(ts, |r, row| {
            let f = self.row_freqs[r];
            for (q, z) in row.iter().enumerate() {
                values[[r, q]] = if phased {
                    z * Complex64::from_polar(1.0, -2.0 * PI * f * times[q])
                } else {
                    *z
                };
            }
        });
        CoefficientGrid::new(self.axis.clone(), times, values)?.with_validity(self.validity.clone())
    }

    /// `|coefficient|²` of one record (phase-free shortcut).
    pub fn power(&self, ts: &TimeSeries) -> Result<Array2<f64>> {
        self.check(ts)?;
        let mut values = Array2::<f64>::zeros((self.filters.nrows(), self.n));
        self.for_each_row(ts, |r, row| {
            for (v, z) in values.row_mut(r).iter_mut().zip(row) {
                *v = z.norm_sqr();
            }
        });
        Ok(values)
    }
}

fn signed_bin(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for v in values {
        acc += v;
        out.push(acc);
    }
    out
}

// Energy fraction of the sampled window inside the record for every output time.
fn window_validity(w: &Window, n: usize, dt: f64) -> Vec<f64> {
    let reach = ((w.reach() / dt).ceil() as usize).max(n - 1);
    let energy: Vec<f64> = (0..=2 * reach)
        .map(|j| w.value((j as f64 - reach as f64) * dt).powi(2))
        .collect();
    let prefix = prefix_sums(&energy);
    let total = prefix[energy.len()];
    (0..n)
        .map(|q| {
            // lags d ∈ [-q, n-1-q] keep the source q + d inside the record
            let lo = reach - q;
            let hi = reach + (n - 1 - q) + 1;
            ((prefix[hi] - prefix[lo]) / total).clamp(0.0, 1.0)
        })
        .collect()
}

/// STFT coefficients on `freqs`.
pub fn stft(ts: &TimeSeries, spec: &TransformSpec, freqs: &FrequencyAxis) -> Result<CoefficientGrid> {
    if spec.family() != Family::Stft {
        return Err(EpsdError::SpecMismatch(format!("stft called with {}", spec.name())));
    }
    TransformPlan::new(spec, ts.len(), ts.dt(), Some(freqs))?.apply(ts)
}

/// S-transform coefficients on `freqs` (all frequencies must be positive).
pub fn s_transform(
    ts: &TimeSeries,
    spec: &TransformSpec,
    freqs: &FrequencyAxis,
) -> Result<CoefficientGrid> {
    if spec.family() != Family::STransform {
        return Err(EpsdError::SpecMismatch(format!(
            "s_transform called with {}",
            spec.name()
        )));
    }
    if freqs.contains_zero() {
        return Err(EpsdError::DegenerateWindow(
            "S-transform Gaussian window of std K(f)/|f| is undefined at f = 0".into(),
        ));
    }
    TransformPlan::new(spec, ts.len(), ts.dt(), Some(freqs))?.apply(ts)
}

/// CWT coefficients on the spec's resolvable scale levels.
pub fn cwt(ts: &TimeSeries, spec: &TransformSpec) -> Result<CoefficientGrid> {
    if spec.family() != Family::Cwt {
        return Err(EpsdError::SpecMismatch(format!("cwt called with {}", spec.name())));
    }
    TransformPlan::new(spec, ts.len(), ts.dt(), None)?.apply(ts)
}

/// Dispatch on the spec family; `freqs` defaults to the DFT bins for STFT/ST.
pub fn transform(
    ts: &TimeSeries,
    spec: &TransformSpec,
    freqs: Option<&FrequencyAxis>,
) -> Result<CoefficientGrid> {
    let default;
    let freqs = match freqs {
        Some(f) => f,
        None => {
            default = FrequencyAxis::dft_bins(ts.len(), ts.dt())?;
            &default
        }
    };
    match spec.family() {
        Family::Stft => stft(ts, spec, freqs),
        Family::STransform => s_transform(ts, spec, freqs),
        Family::Cwt => cwt(ts, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Wavelet;
    use crate::quadrature::Quadrature;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cosine(f: f64, dt: f64, n: usize) -> TimeSeries {
        let x = (0..n).map(|q| (2.0 * PI * f * q as f64 * dt).cos()).collect();
        TimeSeries::new(x, dt).unwrap()
    }

    fn random(seed: u64, n: usize, dt: f64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSeries::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), dt).unwrap()
    }

    fn direct_riemann(ts: &TimeSeries, w: &Window, f: f64, q: usize) -> Complex64 {
        let tau = ts.time(q);
        ts.samples()
            .iter()
            .enumerate()
            .map(|(p, &x)| {
                let t = ts.time(p);
                x * w.value(t - tau) * Complex64::from_polar(ts.dt(), -2.0 * PI * f * t)
            })
            .sum()
    }

    #[test]
    fn zero_signal_gives_zero_grids() {
        let ts = TimeSeries::new(vec![0.0; 128], 0.05).unwrap();
        let freqs = FrequencyAxis::new(vec![1.0, 2.0]).unwrap();
        for spec in [
            TransformSpec::StftBox { h: 0.5 },
            TransformSpec::STrans { kappa: 1.0 },
        ] {
            let g = transform(&ts, &spec, Some(&freqs)).unwrap();
            assert!(g.values().iter().all(|z| z.norm() == 0.0));
        }
        let hw = TransformSpec::CwtHarmonic {
            m: 1.0,
            n: 2.0,
            scales: ScaleAxis::geometric(0.2, 2.0, 4).unwrap(),
        };
        assert!(cwt(&ts, &hw).unwrap().values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn stft_of_cosine_has_half_amplitude() {
        let ts = cosine(5.0, 0.02, 1000);
        let freqs = FrequencyAxis::new(vec![5.0]).unwrap();
        let g = stft(&ts, &TransformSpec::StftGauss { sigma: 1.0 }, &freqs).unwrap();
        let z = g.values()[[0, 500]];
        assert!((z.norm() - 0.5).abs() < 1e-6, "{}", z.norm());
        assert!(g.validity().unwrap()[[0, 500]] > 0.999);
        assert!(g.validity().unwrap()[[0, 0]] < 0.6);
    }

    #[test]
    fn s_transform_examples() {
        let spec = TransformSpec::STrans { kappa: 1.0 };
        let ts = cosine(5.0, 0.02, 1000);
        let freqs = FrequencyAxis::new(vec![5.0]).unwrap();
        let g = s_transform(&ts, &spec, &freqs).unwrap();
        assert!((g.values()[[0, 500]].norm() - 0.5).abs() < 1e-6);

        let ones = TimeSeries::new(vec![1.0; 1000], 0.02).unwrap();
        let freqs = FrequencyAxis::new(vec![1.0, 3.0]).unwrap();
        let g = s_transform(&ones, &spec, &freqs).unwrap();
        let bound = (-2.0 * PI * PI).exp();
        for r in 0..2 {
            assert!(g.values()[[r, 500]].norm() < 2.0 * bound);
        }

        let with_zero = FrequencyAxis::new(vec![0.0, 1.0]).unwrap();
        let err = s_transform(&ones, &spec, &with_zero).unwrap_err().to_string();
        assert!(err.contains("degenerate window"), "{err}");
    }

    #[test]
    fn filter_bank_matches_direct_sum() {
        let ts = random(3, 64, 0.05);
        let freqs = FrequencyAxis::new(vec![0.7, 2.5, 9.0]).unwrap();
        for spec in [
            TransformSpec::StftBox { h: 0.4 },
            TransformSpec::StftGauss { sigma: 0.3 },
            TransformSpec::STrans { kappa: 1.0 },
        ] {
            let g = transform(&ts, &spec, Some(&freqs)).unwrap();
            for (r, &f) in freqs.values().iter().enumerate() {
                let w = spec.window(Some(f)).unwrap();
                for q in [0, 17, 40, 63] {
                    let direct = direct_riemann(&ts, &w, f, q);
                    let fast = g.values()[[r, q]];
                    assert!(
                        (fast - direct).norm() <= 1e-6 * direct.norm().max(1e-12),
                        "{} f={f} q={q}: {fast} vs {direct}",
                        spec.name()
                    );
                }
            }
        }
    }

    #[test]
    fn transforms_are_linear() {
        let x = random(11, 200, 0.02);
        let y = random(12, 200, 0.02);
        let (a, b) = (1.7, -0.4);
        let combo: Vec<f64> = x
            .samples()
            .iter()
            .zip(y.samples())
            .map(|(p, q)| a * p + b * q)
            .collect();
        let z = TimeSeries::new(combo, 0.02).unwrap();
        let freqs = FrequencyAxis::new(vec![1.0, 6.0, 20.0]).unwrap();
        let specs = [
            TransformSpec::StftGauss { sigma: 0.5 },
            TransformSpec::STrans { kappa: 1.0 },
            TransformSpec::CwtMorse {
                beta: 20.0,
                gamma: 3.0,
                scales: ScaleAxis::geometric(0.02, 2.0, 5).unwrap(),
            },
        ];
        for spec in specs {
            let gx = transform(&x, &spec, Some(&freqs)).unwrap();
            let gy = transform(&y, &spec, Some(&freqs)).unwrap();
            let gz = transform(&z, &spec, Some(&freqs)).unwrap();
            let scale = gz.values().iter().map(|c| c.norm()).fold(0.0, f64::max);
            for ((u, v), w) in gx.values().iter().zip(gy.values()).zip(gz.values()) {
                assert!((a * u + b * v - w).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn harmonic_cwt_of_complex_exponential() {
        // Real cosine: the negative-frequency half never reaches an analytic wavelet,
        // so the positive half alone gives √s ψ̂*(s f1) / 2.
        let n = 400;
        let dt = 0.05;
        let f1 = 1.5;
        let ts = cosine(f1, dt, n);
        let spec = TransformSpec::CwtHarmonic {
            m: 1.0,
            n: 2.0,
            scales: ScaleAxis::geometric(0.25, 2.0, 4).unwrap(),
        };
        let g = cwt(&ts, &spec).unwrap();
        // scales 0.25, 0.5, 1, 2: s·f1 = 0.375, 0.75, 1.5, 3
        for q in [0, 100, 399] {
            assert!(g.values()[[0, q]].norm() < 1e-12);
            assert!(g.values()[[1, q]].norm() < 1e-12);
            assert!((g.values()[[2, q]].norm() - 0.5).abs() < 1e-12);
            assert!(g.values()[[3, q]].norm() < 1e-12);
        }
    }

    #[test]
    fn morse_cwt_matches_time_domain_quadrature() {
        let dt = 0.1;
        let n = 64;
        let pulse = |t: f64| (-((t - 3.2) / 0.5).powi(2)).exp() * (2.0 * PI * t).cos();
        let ts = TimeSeries::new((0..n).map(|q| pulse(q as f64 * dt)).collect(), dt).unwrap();
        let wavelet = Wavelet::Morse {
            beta: 20.0,
            gamma: 3.0,
        };
        let s = wavelet.f0();
        let spec = TransformSpec::CwtMorse {
            beta: 20.0,
            gamma: 3.0,
            scales: ScaleAxis::geometric(s, 2.0, 1).unwrap(),
        };
        let g = cwt(&ts, &spec).unwrap();
        let (lo, hi) = wavelet.band();
        let quad = Quadrature::with_rel_tol(1e-12);
        // ψ(t) = ∫ ψ̂(f) e^{i2πft} df
        let psi = |t: f64| {
            let re = quad.integrate(|f| wavelet.ft(f) * (2.0 * PI * f * t).cos(), lo, hi).value;
            let im = quad.integrate(|f| wavelet.ft(f) * (2.0 * PI * f * t).sin(), lo, hi).value;
            Complex64::new(re, im)
        };
        for q in [28, 32, 36] {
            let tau = q as f64 * dt;
            let re = quad
                .integrate(|t| pulse(t) * psi((t - tau) / s).re, 0.0, 6.4)
                .value;
            let im = quad
                .integrate(|t| -pulse(t) * psi((t - tau) / s).im, 0.0, 6.4)
                .value;
            let direct = Complex64::new(re, im) / s.sqrt();
            let fast = g.values()[[0, q]];
            assert!(
                (fast - direct).norm() <= 1e-4 * direct.norm(),
                "q={q}: {fast} vs {direct}"
            );
        }
    }

    #[test]
    fn s_transform_width_follows_kappa_over_f() {
        let n = 1000;
        let dt = 0.01;
        let mut x = vec![0.0; n];
        x[500] = 1.0;
        let ts = TimeSeries::new(x, dt).unwrap();
        for (kappa, f) in [(1.0, 2.0), (1.0, 5.0), (2.0, 5.0)] {
            let spec = TransformSpec::STrans { kappa };
            let freqs = FrequencyAxis::new(vec![f]).unwrap();
            let g = s_transform(&ts, &spec, &freqs).unwrap();
            let p: Vec<f64> = g.values().row(0).iter().map(|z| z.norm_sqr()).collect();
            let peak = p.iter().cloned().fold(0.0, f64::max);
            let above = p.iter().filter(|&&v| v >= 0.5 * peak).count() as f64 * dt;
            // |v|² = ½ peak at |t| = σ √ln 2
            let sigma = above / (2.0 * 2f64.ln().sqrt());
            let expected = kappa / f;
            assert!((sigma / expected - 1.0).abs() < 0.1, "κ={kappa} f={f}: {sigma}");
        }
    }

    #[test]
    fn levels_above_nyquist_are_dropped() {
        let spec = TransformSpec::CwtHarmonic {
            m: 1.0,
            n: 2.0,
            scales: ScaleAxis::geometric(0.01, 2.0, 8).unwrap(),
        };
        // Nyquist 10 Hz, f0 = 1.5: the first four levels map to 150, 75, 37.5 and 18.75 Hz
        let (kept, dropped) = resolvable_scales(&spec, 0.05).unwrap();
        assert_eq!(dropped, 4);
        assert_eq!(kept.len(), 4);
        assert!((kept.scale(0) - 0.16).abs() < 1e-12);
        let plan = TransformPlan::new(&spec, 100, 0.05, None).unwrap();
        assert_eq!(plan.dropped_levels(), 4);
        assert!(resolvable_scales(&spec, 1e-6).is_ok());
        assert!(resolvable_scales(
            &TransformSpec::CwtHarmonic {
                m: 1.0,
                n: 2.0,
                scales: ScaleAxis::geometric(0.001, 2.0, 2).unwrap()
            },
            0.05
        )
        .is_err());
    }

    #[test]
    fn preconditions() {
        let ts = random(1, 100, 0.01);
        let freqs = FrequencyAxis::new(vec![1.0]).unwrap();
        assert!(stft(&ts, &TransformSpec::StftGauss { sigma: 1.0 }, &freqs).is_err());
        assert!(stft(&ts, &TransformSpec::StftBox { h: 2.0 }, &freqs).is_err());
        assert!(matches!(
            stft(&ts, &TransformSpec::STrans { kappa: 1.0 }, &freqs),
            Err(EpsdError::SpecMismatch(_))
        ));
        assert!(FrequencyAxis::new(vec![]).is_err());
    }
}
