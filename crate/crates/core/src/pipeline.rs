//! Monte Carlo validation: simulate a shared ensemble, estimate every record
//! with each transform, reduce to mean and standard deviation, and compare with
//! the target; plus the matching residual study.

use std::f64::consts::SQRT_2;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::axis::{FrequencyAxis, ScaleAxis};
use crate::error::{EpsdError, Result};
use crate::estimators::{frequency_weights, row_scales, EnsembleAccumulator, LogFreqInterp};
use crate::grid::SpectralGrid;
use crate::kernels::{Family, TransformSpec};
use crate::residuals::{aggregate_abs, residual_grid_masked, Order};
use crate::series::TimeSeries;
use crate::simulator::{EpsdModel, SrmSimulator};
use crate::transforms::TransformPlan;

/// Cells with validity below this are excluded from aggregate comparisons.
pub const VALIDITY_MASK: f64 = 0.9;

/// Residual aggregates only consider cells with `S_E` above this fraction of the peak.
pub const POWER_MASK: f64 = 0.01;

/// The five transforms of the seismic Monte Carlo study.
///
/// CWT scale grids reach down to `f_min`; levels above the Nyquist frequency are
/// dropped when a plan is built.
pub fn figure8_preset(f_min: f64) -> Result<Vec<TransformSpec>> {
    let hw_f0 = 0.5 * (1.0 + SQRT_2);
    let gmw_f0 = (20.0_f64 / 3.0).powf(1.0 / 3.0) / (2.0 * std::f64::consts::PI);
    Ok(vec![
        TransformSpec::StftBox { h: 1.0 },
        TransformSpec::StftGauss { sigma: 1.0 },
        TransformSpec::STrans { kappa: 1.0 },
        TransformSpec::CwtHarmonic {
            m: 1.0,
            n: SQRT_2,
            scales: ScaleAxis::covering(0.01, SQRT_2, hw_f0, f_min)?,
        },
        TransformSpec::CwtMorse {
            beta: 20.0,
            gamma: 3.0,
            scales: ScaleAxis::covering(0.01, 2f64.powf(0.1), gmw_f0, f_min)?,
        },
    ])
}

/// Plan plus the bookkeeping that turns `|coefficient|²` into an estimate on a
/// common frequency axis.
#[derive(Debug)]
pub struct EnsembleEstimator {
    plan: TransformPlan,
    // Row of the plan feeding each output row before interpolation (ascending frequency).
    order: Vec<usize>,
    scales: Vec<f64>,
    interp: Option<LogFreqInterp>,
    axis: FrequencyAxis,
    validity: Array2<f64>,
}

impl EnsembleEstimator {
    /// Estimator for records of `n` samples at `dt` reporting on `freqs`.
    ///
    /// STFT/ST rows are evaluated on `freqs` directly; CWT rows are mapped to
    /// `f0/s` and interpolated in `ln f`.
    pub fn new(spec: &TransformSpec, n: usize, dt: f64, freqs: &FrequencyAxis) -> Result<Self> {
        let plan = TransformPlan::new(spec, n, dt, Some(freqs))?;
        let row_freqs = plan.row_freqs().to_vec();
        let mut order: Vec<usize> = (0..row_freqs.len()).collect();
        order.sort_by(|&a, &b| row_freqs[a].total_cmp(&row_freqs[b]));
        let scales = row_scales(spec, &row_freqs)?;
        let sorted = plan.validity().select(ndarray::Axis(0), &order);
        let (interp, validity) = if spec.family() == Family::Cwt {
            let source = FrequencyAxis::new(order.iter().map(|&i| row_freqs[i]).collect())?;
            let interp = LogFreqInterp::new(&source, freqs)?;
            let validity = interp.apply(&sorted, 0.0);
            (Some(interp), validity)
        } else {
            (None, sorted)
        };
        Ok(Self {
            plan,
            order,
            scales,
            interp,
            axis: freqs.clone(),
            validity,
        })
    }

    pub fn plan(&self) -> &TransformPlan {
        &self.plan
    }

    pub fn axis(&self) -> &FrequencyAxis {
        &self.axis
    }

    /// Validity on the output axis (0 where a CWT does not cover the frequency).
    pub fn validity(&self) -> &Array2<f64> {
        &self.validity
    }

    /// EPSD estimate of one record on the output axis.
    pub fn estimate(&self, ts: &TimeSeries) -> Result<Array2<f64>> {
        let power = self.plan.power(ts)?;
        let mut sorted = Array2::<f64>::zeros(power.dim());
        for (out, &src) in self.order.iter().enumerate() {
            let k = self.scales[src];
            sorted.row_mut(out).assign(&power.row(src).mapv(|p| p * k));
        }
        Ok(match &self.interp {
            Some(interp) => interp.apply(&sorted, 0.0),
            None => sorted,
        })
    }
}

/// Aggregate comparison of an ensemble mean with its target.
#[derive(Debug, Clone, Serialize)]
pub struct McMetrics {
    /// Masked `∫∫ mean df dt` over masked `∫∫ S_E df dt`.
    pub total_power_ratio: f64,
    /// Pearson correlation of `∫ mean df` with `E_T λ0(t)` (or `∫ S_E df` for
    /// models without seismic parameters) over columns where the mask keeps at
    /// least 90% of the positive-frequency target power.
    pub time_marginal_r: f64,
    /// Pearson correlation of `mean(·, t_ref)` with `S_E(·, t_ref)` over masked rows.
    pub freq_marginal_r: f64,
    pub t_ref: f64,
    pub masked_cells: usize,
    pub marginal_columns: usize,
    /// Largest `|diff|/target` over masked cells with target above 1% of its peak.
    pub max_rel_diff: f64,
}

/// Ensemble statistics of one transform.
#[derive(Debug, Clone)]
pub struct McResult {
    pub spec: TransformSpec,
    pub mean: SpectralGrid,
    pub std: SpectralGrid,
    pub diff: SpectralGrid,
    pub dropped_levels: usize,
    pub metrics: McMetrics,
}

/// Per-spec outcome; a spec that cannot be planned fails alone.
#[derive(Debug, Clone)]
pub struct McOutcome {
    pub spec: TransformSpec,
    pub result: std::result::Result<McResult, String>,
}

#[derive(Debug, Clone)]
pub struct McReport {
    pub freqs: FrequencyAxis,
    pub times: Vec<f64>,
    pub target: SpectralGrid,
    pub n_samples: usize,
    pub seed: u64,
    pub outcomes: Vec<McOutcome>,
}

/// Monte Carlo run options.
#[derive(Debug, Clone)]
pub struct McConfig {
    /// Common output axis; default: DFT bins in `(0, Nyquist]`.
    pub freqs: Option<FrequencyAxis>,
    /// Records simulated per batch (bounds memory; does not affect results).
    pub batch: usize,
    /// Reference time of the frequency-marginal comparison.
    pub t_ref: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            freqs: None,
            batch: 16,
            t_ref: 8.0,
        }
    }
}

/// Monte Carlo study with default options.
pub fn run_mc(
    model: &EpsdModel,
    specs: &[TransformSpec],
    n_samples: usize,
    dt: f64,
    seed: u64,
) -> Result<McReport> {
    run_mc_with(model, specs, n_samples, dt, seed, &McConfig::default())
}

/// Monte Carlo study: every spec sees the same `n_samples` SRM records.
pub fn run_mc_with(
    model: &EpsdModel,
    specs: &[TransformSpec],
    n_samples: usize,
    dt: f64,
    seed: u64,
    config: &McConfig,
) -> Result<McReport> {
    if n_samples < 2 {
        return Err(EpsdError::param("samples", "need at least two records"));
    }
    if config.batch == 0 {
        return Err(EpsdError::param("batch", "must be positive"));
    }
    let sim = SrmSimulator::new(model, dt, seed)?;
    let n = sim.record_len();
    let freqs = match &config.freqs {
        Some(f) => f.clone(),
        None => FrequencyAxis::dft_bins(n, dt)?,
    };
    let times: Vec<f64> = (0..n).map(|q| q as f64 * dt).collect();
    let target_values = model.grid(freqs.values(), &times);
    let target = SpectralGrid::new(freqs.clone(), times.clone(), target_values)?;

    let planned: Vec<std::result::Result<EnsembleEstimator, String>> = specs
        .iter()
        .map(|s| EnsembleEstimator::new(s, n, dt, &freqs).map_err(|e| e.to_string()))
        .collect();
    let mut accs: Vec<Option<EnsembleAccumulator>> = planned
        .iter()
        .map(|p| p.as_ref().ok().map(|_| EnsembleAccumulator::new()))
        .collect();
    let mut failures: Vec<Option<String>> = vec![None; specs.len()];

    let mut start = 0usize;
    while start < n_samples {
        let count = config.batch.min(n_samples - start);
        let records = sim.records(start as u64, count);
        for (k, est) in planned.iter().enumerate() {
            let (Ok(est), Some(acc)) = (est, accs[k].as_mut()) else {
                continue;
            };
            // Estimates in parallel, accumulated in record order.
            let batch: Vec<Result<Array2<f64>>> =
                records.par_iter().map(|r| est.estimate(r)).collect();
            for grid in batch {
                match grid.and_then(|g| acc.push(&g)) {
                    Ok(()) => {}
                    Err(e) => {
                        failures[k] = Some(e.to_string());
                        accs[k] = None;
                        break;
                    }
                }
            }
        }
        start += count;
    }

    let mut outcomes = Vec::with_capacity(specs.len());
    for (k, (spec, est)) in specs.iter().zip(planned).enumerate() {
        let result = match (est, accs[k].take(), failures[k].take()) {
            (Err(e), _, _) => Err(e),
            (_, _, Some(e)) => Err(e),
            (Ok(est), Some(acc), None) => {
                finish_spec(spec, model, &est, acc, &target, config.t_ref).map_err(|e| e.to_string())
            }
            (Ok(_), None, None) => Err("no accumulator".to_string()),
        };
        outcomes.push(McOutcome {
            spec: spec.clone(),
            result,
        });
    }
    Ok(McReport {
        freqs,
        times,
        target,
        n_samples,
        seed,
        outcomes,
    })
}

fn finish_spec(
    spec: &TransformSpec,
    model: &EpsdModel,
    est: &EnsembleEstimator,
    acc: EnsembleAccumulator,
    target: &SpectralGrid,
    t_ref: f64,
) -> Result<McResult> {
    let (mean, std) = acc.finish()?;
    let diff = &mean - target.values();
    let validity = est.validity().clone();
    let freqs = target.freqs().clone();
    let times = target.times().to_vec();
    let mean = SpectralGrid::new(freqs.clone(), times.clone(), mean)?.with_validity(validity.clone())?;
    let std = SpectralGrid::new(freqs.clone(), times.clone(), std)?.with_validity(validity.clone())?;
    let diff = SpectralGrid::signed(freqs, times, diff)?.with_validity(validity)?;
    let metrics = compare(&mean, target, model, t_ref)?;
    Ok(McResult {
        spec: spec.clone(),
        mean,
        std,
        diff,
        dropped_levels: est.plan().dropped_levels(),
        metrics,
    })
}

/// Aggregation mask: validity ≥ 0.9 and `f ≥ 2Δf`, with `Δf` the spacing of the
/// first two frequencies.
pub fn interior_mask(grid: &SpectralGrid) -> Array2<bool> {
    let f = grid.freqs().values();
    let df = if f.len() > 1 { f[1] - f[0] } else { 0.0 };
    let mut mask = Array2::from_elem(grid.values().dim(), true);
    for (i, &fi) in f.iter().enumerate() {
        let low = fi < 2.0 * df * (1.0 - 1e-9);
        for j in 0..grid.times().len() {
            let v = grid.validity().map_or(1.0, |v| v[[i, j]]);
            mask[[i, j]] = !low && v >= VALIDITY_MASK;
        }
    }
    mask
}

/// Pearson correlation coefficient; NaN for fewer than two points or zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Masked aggregate comparison of an estimate with the target on the same axes.
pub fn compare(
    mean: &SpectralGrid,
    target: &SpectralGrid,
    model: &EpsdModel,
    t_ref: f64,
) -> Result<McMetrics> {
    if !mean.same_axes(target) {
        return Err(EpsdError::DimensionMismatch("estimate and target axes differ".into()));
    }
    let mask = interior_mask(mean);
    let w = frequency_weights(mean.freqs());
    let (m, s) = (mean.values(), target.values());
    let times = mean.times();
    let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
    let (nf, nt) = m.dim();

    let mut est_total = 0.0;
    let mut tgt_total = 0.0;
    let mut cells = 0;
    let peak = s.iter().cloned().fold(0.0, f64::max);
    let mut max_rel = 0.0_f64;
    let mut est_marg = Vec::new();
    let mut ref_marg = Vec::new();
    for j in 0..nt {
        let (mut em, mut tm, mut full) = (0.0, 0.0, 0.0);
        for i in 0..nf {
            full += w[i] * s[[i, j]];
            if mask[[i, j]] {
                em += w[i] * m[[i, j]];
                tm += w[i] * s[[i, j]];
                cells += 1;
                if s[[i, j]] > POWER_MASK * peak {
                    max_rel = max_rel.max((m[[i, j]] - s[[i, j]]).abs() / s[[i, j]]);
                }
            }
        }
        est_total += em * dt;
        tgt_total += tm * dt;
        let reference = match model.seismic_params() {
            Some(p) => 0.5 * p.e_t * p.lambda0(times[j]),
            None => full,
        };
        if reference > 0.0 && tm >= 0.9 * reference {
            est_marg.push(em);
            ref_marg.push(reference);
        }
    }
    let j_ref = mean.nearest_time(t_ref);
    let (mut fe, mut ft) = (Vec::new(), Vec::new());
    for i in 0..nf {
        if mask[[i, j_ref]] {
            fe.push(m[[i, j_ref]]);
            ft.push(s[[i, j_ref]]);
        }
    }
    Ok(McMetrics {
        total_power_ratio: est_total / tgt_total,
        time_marginal_r: pearson(&est_marg, &ref_marg),
        freq_marginal_r: pearson(&fe, &ft),
        t_ref: times[j_ref],
        masked_cells: cells,
        marginal_columns: est_marg.len(),
        max_rel_diff: max_rel,
    })
}

/// Residual grids of one transform.
#[derive(Debug, Clone)]
pub struct ResidualOutcome {
    pub spec: TransformSpec,
    /// First order; only for the CWT (identically zero otherwise).
    pub first: Option<SpectralGrid>,
    pub second: SpectralGrid,
    pub aggregate_first: Option<f64>,
    pub aggregate_second: f64,
}

/// Residual grids for each spec, evaluated where `S_E` exceeds 1% of its grid peak.
///
/// `band` is the box-window integration band (typically the Nyquist frequency).
pub fn run_residual_study(
    model: &EpsdModel,
    specs: &[TransformSpec],
    freqs: &FrequencyAxis,
    times: &[f64],
    band: Option<f64>,
) -> Result<Vec<ResidualOutcome>> {
    specs
        .iter()
        .map(|spec| {
            let grid = |order| {
                residual_grid_masked(model, spec, freqs, times, order, band, Some(POWER_MASK))
            };
            let second = grid(Order::Second)?;
            let first = if spec.family() == Family::Cwt {
                Some(grid(Order::First)?)
            } else {
                None
            };
            Ok(ResidualOutcome {
                spec: spec.clone(),
                aggregate_first: first.as_ref().map(|g| aggregate_abs(g, model, POWER_MASK)),
                aggregate_second: aggregate_abs(&second, model, POWER_MASK),
                first,
                second,
            })
        })
        .collect()
}

/// Residual-study axes: DFT bins from `2Δf` to Nyquist and times every `step`
/// seconds in `(0, T)`.
pub fn residual_axes(model: &EpsdModel, dt: f64, step: f64) -> Result<(FrequencyAxis, Vec<f64>)> {
    if !(step > 0.0) {
        return Err(EpsdError::param("step", "must be positive"));
    }
    let n = (model.duration() / dt).round() as usize;
    let bins = FrequencyAxis::dft_bins(n, dt)?;
    let freqs = FrequencyAxis::new(bins.values().iter().skip(1).copied().collect())?;
    let count = (model.duration() / step).floor() as usize;
    let times: Vec<f64> = (1..count)
        .map(|k| k as f64 * step)
        .filter(|&t| t < model.duration())
        .collect();
    Ok((freqs, times))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_shapes() {
        let specs = figure8_preset(0.05).unwrap();
        assert_eq!(specs.len(), 5);
        let names: Vec<_> = specs.iter().map(|s| s.name()).collect();
        assert_eq!(
            names,
            ["stft-box", "stft-gauss", "s-transform", "cwt-harmonic", "cwt-morse"]
        );
        for s in &specs[3..] {
            let w = s.wavelet().unwrap();
            let axis = s.scales().unwrap();
            assert!(w.f0() / axis.scale(axis.len() - 1) <= 0.05);
            assert!(w.f0() / axis.scale(axis.len() - 2) > 0.05);
        }
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn small_run_is_deterministic_and_consistent() {
        let model = EpsdModel::flat(1.0, 20.0, 8.0).unwrap();
        let specs = vec![
            TransformSpec::StftGauss { sigma: 1.0 },
            TransformSpec::CwtHarmonic {
                m: 1.0,
                n: 2.0,
                // The first level sits above the 25 Hz Nyquist frequency.
                scales: ScaleAxis::geometric(0.05, 2.0, 6).unwrap(),
            },
            TransformSpec::CwtHarmonic {
                m: 1.0,
                n: 2.0,
                scales: ScaleAxis::geometric(0.001, 2.0, 2).unwrap(),
            },
        ];
        let a = run_mc(&model, &specs, 3, 0.02, 7).unwrap();
        let b = run_mc(&model, &specs, 3, 0.02, 7).unwrap();
        let ra = a.outcomes[0].result.as_ref().unwrap();
        let rb = b.outcomes[0].result.as_ref().unwrap();
        assert_eq!(ra.mean, rb.mean);
        assert_eq!(ra.std, rb.std);
        let cwt = a.outcomes[1].result.as_ref().unwrap();
        assert_eq!(cwt.dropped_levels, 1);
        assert!(a.outcomes[2].result.is_err());
        for r in [ra, cwt] {
            for ((m, d), t) in r.mean.values().iter().zip(r.diff.values()).zip(a.target.values()) {
                assert!((t + d - m).abs() <= 1e-15 * m.abs().max(t.abs()));
            }
        }
    }

    #[test]
    fn residual_study_constant_model_is_zero() {
        let model = EpsdModel::constant(2.0, 10.0).unwrap();
        let (freqs, times) = residual_axes(&model, 0.05, 0.5).unwrap();
        assert!(freqs.values()[0] > 0.0);
        let out = run_residual_study(&model, &figure8_preset(0.1).unwrap(), &freqs, &times, Some(10.0))
            .unwrap();
        for o in out {
            assert!(o.second.values().iter().all(|&v| v == 0.0));
            assert_eq!(o.aggregate_second, 0.0);
            if let Some(g) = o.first {
                assert!(g.values().iter().all(|&v| v == 0.0));
            }
        }
    }
}
