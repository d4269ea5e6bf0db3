//! EPSD estimates from coefficient grids, optional time smoothing and ensemble
//! statistics.

use ndarray::{Array1, Array2, Axis as NdAxis};

use crate::axis::{Axis, FrequencyAxis};
use crate::error::{EpsdError, Result};
use crate::grid::{CoefficientGrid, SpectralGrid};
use crate::kernels::{norm_constants, Family, TransformSpec};

/// Multiplier from `|coefficient|²` to the EPSD estimate for each row frequency.
///
/// CWT rows are given by their mapped frequency `f0/s`.
pub fn row_scales(spec: &TransformSpec, row_freqs: &[f64]) -> Result<Vec<f64>> {
    match spec.family() {
        Family::Stft | Family::Cwt => {
            let c = norm_constants(spec, None)?;
            let k = c.coefficient_scale.expect("populated for STFT and CWT");
            Ok(vec![k; row_freqs.len()])
        }
        Family::STransform => row_freqs
            .iter()
            .map(|&f| {
                let kappa = spec.kappa_at(f).expect("S-transform spec");
                if f == 0.0 {
                    return Err(EpsdError::DegenerateWindow(
                        "S-transform estimate is undefined at f = 0".into(),
                    ));
                }
                // 1/(|f| C_nS0) with C_nS0 = 1/(K(f)√(4π))
                Ok(kappa * (4.0 * std::f64::consts::PI).sqrt() / f.abs())
            })
            .collect(),
    }
}

fn check_axis(coeffs: &CoefficientGrid, spec: &TransformSpec) -> Result<()> {
    let ok = matches!(
        (coeffs.axis(), spec.family()),
        (Axis::Frequency(_), Family::Stft | Family::STransform) | (Axis::Scale(_), Family::Cwt)
    );
    if ok {
        Ok(())
    } else {
        Err(EpsdError::SpecMismatch(format!(
            "{} coefficients do not match a {} spec",
            coeffs.axis().kind(),
            spec.name()
        )))
    }
}

// Row frequencies in the coefficient order and the permutation to increasing frequency.
fn mapped_rows(coeffs: &CoefficientGrid, spec: &TransformSpec) -> Result<(Vec<f64>, Vec<usize>)> {
    check_axis(coeffs, spec)?;
    match coeffs.axis() {
        Axis::Frequency(f) => Ok((f.values().to_vec(), (0..f.len()).collect())),
        Axis::Scale(s) => {
            let w = spec.wavelet().expect("CWT spec");
            let freqs = s
                .values()
                .iter()
                .map(|&x| w.scale_to_freq(x))
                .collect::<Result<Vec<_>>>()?;
            let mut order: Vec<usize> = (0..freqs.len()).collect();
            order.sort_by(|&a, &b| freqs[a].total_cmp(&freqs[b]));
            Ok((freqs, order))
        }
    }
}

fn assemble(
    coeffs: &CoefficientGrid,
    freqs: &[f64],
    order: &[usize],
    scales: &[f64],
) -> Result<SpectralGrid> {
    let power = coeffs.power();
    let mut values = Array2::<f64>::zeros(power.dim());
    for (out, &src) in order.iter().enumerate() {
        let k = scales[src];
        values
            .row_mut(out)
            .assign(&power.row(src).mapv(|p| p * k));
    }
    let axis = FrequencyAxis::new(order.iter().map(|&i| freqs[i]).collect())?;
    let grid = SpectralGrid::new(axis, coeffs.times().to_vec(), values)?;
    match coeffs.validity() {
        Some(v) => grid.with_validity(v.select(NdAxis(0), order)),
        None => Ok(grid),
    }
}

/// EPSD estimate: `|x|²/C_n²` (STFT), `|x|²/(|f| C_nS0)` (ST) or `|x|²/C_nw²`
/// on the frequency axis `f0/s` (CWT, rows ordered by increasing frequency).
pub fn epsd_estimate(coeffs: &CoefficientGrid, spec: &TransformSpec) -> Result<SpectralGrid> {
    let (freqs, order) = mapped_rows(coeffs, spec)?;
    let scales = row_scales(spec, &freqs)?;
    assemble(coeffs, &freqs, &order, &scales)
}

/// Frequency-mapped scalogram `S_wf = |x_w|² |ds/df| / (s² C_ψ) = |x_w|²/(f0 C_ψ)`.
pub fn scalogram_to_freq(coeffs: &CoefficientGrid, spec: &TransformSpec) -> Result<SpectralGrid> {
    if spec.family() != Family::Cwt {
        return Err(EpsdError::SpecMismatch(format!(
            "scalogram mapping needs a CWT spec, got {}",
            spec.name()
        )));
    }
    let (freqs, order) = mapped_rows(coeffs, spec)?;
    let w = spec.wavelet().expect("CWT spec");
    let k = 1.0 / (w.f0() * w.c_psi());
    assemble(coeffs, &freqs, &order, &vec![k; freqs.len()])
}

/// Moving average along time with a unit-mass box of the given half-width (s).
///
/// Near the record ends the box is truncated and renormalized.
pub fn smooth_time(grid: &SpectralGrid, halfwidth: f64) -> Result<SpectralGrid> {
    if !(halfwidth.is_finite() && halfwidth >= 0.0) {
        return Err(EpsdError::param("halfwidth", "must be nonnegative"));
    }
    let times = grid.times();
    if times.len() < 2 {
        return if halfwidth == 0.0 {
            Ok(grid.clone())
        } else {
            Err(EpsdError::param("halfwidth", "needs at least two time columns"))
        };
    }
    let dt = times[1] - times[0];
    let duration = times.len() as f64 * dt;
    if halfwidth > duration {
        return Err(EpsdError::param(
            "halfwidth",
            format!("{halfwidth} s exceeds the record duration {duration} s"),
        ));
    }
    let k = (halfwidth / dt).round() as usize;
    if k == 0 {
        return Ok(grid.clone());
    }
    let n = times.len();
    let mut out = Array2::<f64>::zeros(grid.values().dim());
    for (src, mut dst) in grid.values().outer_iter().zip(out.outer_iter_mut()) {
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in src.iter() {
            acc += v;
            prefix.push(acc);
        }
        for q in 0..n {
            let lo = q.saturating_sub(k);
            let hi = (q + k + 1).min(n);
            let mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            dst[q] = if grid.is_signed() { mean } else { mean.max(0.0) };
        }
    }
    grid.with_values(out, grid.is_signed())
}

/// Sample count, mean and sum of squared deviations of a set of grids.
#[derive(Debug, Clone)]
struct Moments {
    n: usize,
    mean: Array2<f64>,
    m2: Array2<f64>,
}

impl Moments {
    fn single(values: &Array2<f64>) -> Self {
        Self {
            n: 1,
            mean: values.clone(),
            m2: Array2::zeros(values.dim()),
        }
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        let n = a.n + b.n;
        let wa = a.n as f64;
        let wb = b.n as f64;
        let nf = n as f64;
        let mut mean = a.mean;
        let mut m2 = a.m2;
        ndarray::Zip::from(&mut mean)
            .and(&mut m2)
            .and(&b.mean)
            .and(&b.m2)
            .for_each(|ma, sa, &mb, &sb| {
                let delta = mb - *ma;
                *ma += delta * wb / nf;
                *sa += sb + delta * delta * wa * wb / nf;
            });
        Moments { n, mean, m2 }
    }
}

/// Streaming pointwise mean and standard deviation.
///
/// Grids are combined along a fixed binary tree determined only by their
/// arrival order, so the result is bit-identical for identical input order.
#[derive(Debug, Clone, Default)]
pub struct EnsembleAccumulator {
    // (level, moments); levels strictly decrease from bottom to top.
    stack: Vec<(u32, Moments)>,
    dim: Option<(usize, usize)>,
}

impl EnsembleAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> usize {
        self.stack.iter().map(|(_, m)| m.n).sum()
    }

    pub fn push(&mut self, values: &Array2<f64>) -> Result<()> {
        match self.dim {
            Some(d) if d != values.dim() => {
                return Err(EpsdError::DimensionMismatch(format!(
                    "ensemble grid is {:?}, expected {:?}",
                    values.dim(),
                    d
                )))
            }
            _ => self.dim = Some(values.dim()),
        }
        let mut item = (0u32, Moments::single(values));
        while let Some((level, _)) = self.stack.last() {
            if *level != item.0 {
                break;
            }
            let (level, top) = self.stack.pop().expect("non-empty");
            item = (level + 1, Moments::merge(top, item.1));
        }
        self.stack.push(item);
        Ok(())
    }

    /// Pointwise mean and `(n-1)`-normalized standard deviation.
    pub fn finish(self) -> Result<(Array2<f64>, Array2<f64>)> {
        let mut it = self.stack.into_iter().rev().map(|(_, m)| m);
        let mut acc = it
            .next()
            .ok_or_else(|| EpsdError::InvalidInput("ensemble needs at least two grids".into()))?;
        for m in it {
            acc = Moments::merge(m, acc);
        }
        if acc.n < 2 {
            return Err(EpsdError::InvalidInput("ensemble needs at least two grids".into()));
        }
        let denom = (acc.n - 1) as f64;
        let std = acc.m2.mapv(|s| (s.max(0.0) / denom).sqrt());
        Ok((acc.mean, std))
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub mean: SpectralGrid,
    pub std: SpectralGrid,
    pub count: usize,
}

/// Pointwise sample mean and standard deviation of at least two grids on identical axes.
pub fn ensemble_stats(grids: &[SpectralGrid]) -> Result<EnsembleStats> {
    if grids.len() < 2 {
        return Err(EpsdError::InvalidInput("ensemble needs at least two grids".into()));
    }
    let first = &grids[0];
    let mut acc = EnsembleAccumulator::new();
    for g in grids {
        if !g.same_axes(first) {
            return Err(EpsdError::DimensionMismatch(
                "ensemble grids must share frequency and time axes".into(),
            ));
        }
        acc.push(g.values())?;
    }
    let (mean, std) = acc.finish()?;
    let signed = grids.iter().any(|g| g.is_signed());
    Ok(EnsembleStats {
        mean: first.with_values(mean, signed)?,
        std: first.with_values(std, false)?,
        count: grids.len(),
    })
}

/// Monotone piecewise-linear interpolation in `ln f` from one frequency axis to another.
///
/// Targets outside the source range receive value 0 and validity 0.
#[derive(Debug, Clone)]
pub struct LogFreqInterp {
    // (lower source row, weight of the upper row) per target row; None = uncovered.
    taps: Vec<Option<(usize, f64)>>,
    target: FrequencyAxis,
}

impl LogFreqInterp {
    pub fn new(source: &FrequencyAxis, target: &FrequencyAxis) -> Result<Self> {
        if source.values().first().copied().unwrap_or(0.0) <= 0.0 {
            return Err(EpsdError::param(
                "source axis",
                "log-frequency interpolation needs positive frequencies",
            ));
        }
        let src: Vec<f64> = source.values().iter().map(|f| f.ln()).collect();
        let lo = source.values()[0];
        let hi = *source.values().last().expect("non-empty");
        let taps = target
            .values()
            .iter()
            .map(|&f| {
                if f < lo * (1.0 - 1e-12) || f > hi * (1.0 + 1e-12) {
                    return None;
                }
                if src.len() == 1 {
                    return Some((0, 0.0));
                }
                let x = f.ln();
                let i = src.partition_point(|&s| s <= x).clamp(1, src.len() - 1) - 1;
                let w = ((x - src[i]) / (src[i + 1] - src[i])).clamp(0.0, 1.0);
                Some((i, w))
            })
            .collect();
        Ok(Self {
            taps,
            target: target.clone(),
        })
    }

    pub fn target(&self) -> &FrequencyAxis {
        &self.target
    }

    /// Interpolated rows; `fill` is used for uncovered targets.
    pub fn apply(&self, values: &Array2<f64>, fill: f64) -> Array2<f64> {
        let cols = values.ncols();
        let mut out = Array2::<f64>::from_elem((self.taps.len(), cols), fill);
        for (r, tap) in self.taps.iter().enumerate() {
            if let Some((i, w)) = *tap {
                let a = values.row(i);
                let mut dst = out.row_mut(r);
                if w == 0.0 {
                    dst.assign(&a);
                } else {
                    let b = values.row(i + 1);
                    ndarray::Zip::from(&mut dst)
                        .and(&a)
                        .and(&b)
                        .for_each(|d, &x, &y| *d = (1.0 - w) * x + w * y);
                }
            }
        }
        out
    }

    /// Resampled grid; validity is interpolated too and 0 outside coverage.
    pub fn resample(&self, grid: &SpectralGrid) -> Result<SpectralGrid> {
        let values = self.apply(grid.values(), 0.0);
        let times = grid.times().to_vec();
        let out = if grid.is_signed() {
            SpectralGrid::signed(self.target.clone(), times, values)?
        } else {
            SpectralGrid::new(self.target.clone(), times, values)?
        };
        let validity = match grid.validity() {
            Some(v) => self.apply(v, 0.0),
            None => {
                let ones = Array2::<f64>::ones(grid.values().dim());
                self.apply(&ones, 0.0)
            }
        };
        out.with_validity(validity)
    }
}

/// Resample a grid onto `target` by linear interpolation in `ln f`.
pub fn resample_log_freq(grid: &SpectralGrid, target: &FrequencyAxis) -> Result<SpectralGrid> {
    LogFreqInterp::new(grid.freqs(), target)?.resample(grid)
}

/// Column sums over frequency (trapezoid-free rectangle rule with local bin widths).
pub fn frequency_weights(freqs: &FrequencyAxis) -> Array1<f64> {
    let f = freqs.values();
    let n = f.len();
    if n == 1 {
        return Array1::from(vec![1.0]);
    }
    (0..n)
        .map(|i| {
            let lo = if i == 0 { f[0] } else { 0.5 * (f[i - 1] + f[i]) };
            let hi = if i == n - 1 { f[n - 1] } else { 0.5 * (f[i] + f[i + 1]) };
            let width = hi - lo;
            // End cells extend half a spacing beyond the outermost points.
            let pad = if i == 0 { 0.5 * (f[1] - f[0]) } else { 0.0 }
                + if i == n - 1 { 0.5 * (f[n - 1] - f[n - 2]) } else { 0.0 };
            width + pad
        })
        .collect()
}
