//! Estimation of the evolutionary power spectral density (EPSD) of nonstationary
//! signals with the short-time Fourier transform, the S-transform and the
//! continuous wavelet transform, together with the analytic residual terms that
//! quantify the slow-variation assumption and a Monte Carlo harness built on the
//! spectral representation method.

pub mod axis;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod pipeline;
pub mod quadrature;
pub mod residuals;
pub mod series;
pub mod simulator;
pub mod special;
pub mod transforms;

pub use axis::{Axis, FrequencyAxis, ScaleAxis};
pub use error::{EpsdError, Result};
pub use fourier::{fourier_transform, Spectrum};
pub use grid::{CoefficientGrid, SpectralGrid};
pub use kernels::{
    d_kappa, freq_to_scale, moment_kernel, norm_constants, scale_to_freq, wavelet_ft, window_ft,
    DKappa, DKappaMethod, Family, KappaCurve, KernelConstants, TransformSpec, Wavelet, Window,
};
pub use series::TimeSeries;
pub use transforms::{cwt, resolvable_scales, s_transform, stft, transform, TransformPlan};
pub use estimators::{
    ensemble_stats, epsd_estimate, resample_log_freq, scalogram_to_freq, smooth_time,
    EnsembleAccumulator, EnsembleStats, LogFreqInterp,
};
pub use simulator::{srm_simulate, AmplitudeJet, EpsdModel, SeismicModelParams, SrmSimulator};
pub use residuals::{
    aggregate_abs, ratio_cwt, ratio_st, ratio_stft, residual_grid, residual_grid_masked, taylor_coeffs, Order,
    TaylorCoeffs,
};
pub use pipeline::{
    figure8_preset, run_mc, run_mc_with, run_residual_study, McConfig, McMetrics, McOutcome,
    McReport, McResult, ResidualOutcome,
};
