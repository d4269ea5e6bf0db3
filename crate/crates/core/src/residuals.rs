//! Taylor coefficients of the modulation function and the ratio integrals that
//! assemble the slow-variation residuals of each estimator.
//!
//! With `A = √S_E` expanded as `Σ C_{l,m} (η - f)^l (t - τ)^m`, the second-order
//! residuals are
//!
//! * STFT/ST: `(C10² + 2 C20 C00) r(2,2,0,0) + C01² r(0,0,2,0) + 2 C02 C00 r(0,1,0,1)`
//! * CWT: `(C10² + 2 C00 C20) r_w(2,0) + (2 C10 C01 + 2 C00 C11) r_w(1,1)
//!   + (C01² + 2 C00 C02) r_w(0,2)`
//!
//! and the first-order CWT residual is `2 C00 C01 r_w(0,1) + 2 C00 C10 r_w(1,0)`.
//! First-order STFT and ST residuals vanish identically.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::axis::FrequencyAxis;
use crate::error::{EpsdError, Result};
use crate::grid::SpectralGrid;
use crate::kernels::{Family, TransformSpec, Wavelet, Window};
use crate::quadrature::Quadrature;
use crate::simulator::EpsdModel;

/// Taylor coefficients `C_{l,m}`, `l + m <= 2`, of `A = √S_E` at `(f, t)`,
/// including the `1/(l! m!)` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoeffs {
    pub f: f64,
    pub t: f64,
    pub c00: f64,
    pub c10: f64,
    pub c01: f64,
    pub c20: f64,
    pub c11: f64,
    pub c02: f64,
}

impl TaylorCoeffs {
    /// `C_{l,m}`; zero for `l + m > 2`.
    pub fn get(&self, l: u32, m: u32) -> f64 {
        match (l, m) {
            (0, 0) => self.c00,
            (1, 0) => self.c10,
            (0, 1) => self.c01,
            (2, 0) => self.c20,
            (1, 1) => self.c11,
            (0, 2) => self.c02,
            _ => 0.0,
        }
    }
}

/// Taylor coefficients from the model's analytic derivatives, or from central
/// differences of `√S_E` with steps `max(1e-3 f, 1e-4)` Hz and `max(1e-3 t, 1e-4)` s.
pub fn taylor_coeffs(model: &EpsdModel, f: f64, t: f64) -> Result<TaylorCoeffs> {
    let s = model.eval(f, t);
    if !(s > 0.0 && s.is_finite()) {
        return Err(EpsdError::Model(format!(
            "S_E({f}, {t}) = {s}; the square root is not differentiable there"
        )));
    }
    if let Some(j) = model.jet(f, t) {
        return Ok(TaylorCoeffs {
            f,
            t,
            c00: j.a,
            c10: j.a_f,
            c01: j.a_t,
            c20: 0.5 * j.a_ff,
            c11: j.a_ft,
            c02: 0.5 * j.a_tt,
        });
    }
    let df = (1e-3 * f.abs()).max(1e-4);
    let dt = (1e-3 * t.abs()).max(1e-4);
    let a = |i: i32, k: i32| -> Result<f64> {
        let (x, y) = (f + i as f64 * df, t + k as f64 * dt);
        let v = model.eval(x, y);
        if v > 0.0 && v.is_finite() {
            Ok(v.sqrt())
        } else {
            Err(EpsdError::Model(format!(
                "S_E({x}, {y}) = {v} on the difference stencil"
            )))
        }
    };
    let a00 = a(0, 0)?;
    let (ap0, am0, a0p, a0m) = (a(1, 0)?, a(-1, 0)?, a(0, 1)?, a(0, -1)?);
    let (app, apm, amp, amm) = (a(1, 1)?, a(1, -1)?, a(-1, 1)?, a(-1, -1)?);
    Ok(TaylorCoeffs {
        f,
        t,
        c00: a00,
        c10: (ap0 - am0) / (2.0 * df),
        c01: (a0p - a0m) / (2.0 * dt),
        c20: 0.5 * (ap0 - 2.0 * a00 + am0) / (df * df),
        c11: (app - apm - amp + amm) / (4.0 * df * dt),
        c02: 0.5 * (a0p - 2.0 * a00 + a0m) / (dt * dt),
    })
}

/// Index tuples `(k, l, m, n)` entering the second-order STFT/ST residual.
pub const WINDOW_TUPLES: [(u32, u32, u32, u32); 3] = [(2, 2, 0, 0), (0, 0, 2, 0), (0, 1, 0, 1)];

/// Index pairs `(j, k)` entering the CWT residuals.
pub const WAVELET_PAIRS: [(u32, u32); 5] = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

fn check_tuple(k: u32, l: u32, m: u32, n: u32) -> Result<()> {
    if WINDOW_TUPLES.contains(&(k, l, m, n)) {
        Ok(())
    } else {
        Err(EpsdError::Unsupported(format!(
            "ratio tuple ({k},{l},{m},{n}); supported: (2,2,0,0), (0,0,2,0), (0,1,0,1)"
        )))
    }
}

// (1/C_n²) ∫ ξ^k M0^l |M1|^m M2^n dξ over [-band, band] for a window.
fn window_ratio(w: Window, k: u32, l: u32, m: u32, n: u32, band: Option<f64>) -> Result<f64> {
    check_tuple(k, l, m, n)?;
    if let Some(b) = band {
        if !(b.is_finite() && b > 0.0) {
            return Err(EpsdError::param("band", "must be positive"));
        }
    }
    let cn2 = w.cn2();
    let (limit, breaks_step) = match w {
        // M0² < e^{-150} beyond 2/σ.
        Window::Gauss { sigma } => (2.0 / sigma, None),
        Window::Box { h } => match band {
            Some(b) => (b, Some(0.5 / h)),
            None => {
                if (k, l, m, n) == (2, 2, 0, 0) {
                    return Err(EpsdError::Divergent(
                        "ξ²M0² of the box window does not decay; r(2,2,0,0) needs a finite band"
                            .into(),
                    ));
                }
                // Both remaining tuples equal ∫ s² v(s)² ds / C_n² on the full line (Parseval).
                let q = Quadrature::with_rel_tol(1e-12)
                    .integrate(|s| s * s * w.value(s).powi(2), -h, h)
                    .value;
                return Ok(q / cn2);
            }
        },
    };
    let limit = band.map_or(limit, |b| b.min(limit));
    // Integrate over [0, limit] and double: every integrand here is even in ξ.
    let mut breaks = vec![0.0];
    if let Some(step) = breaks_step {
        let mut x = step;
        while x < limit {
            breaks.push(x);
            x += step;
        }
    }
    breaks.push(limit);
    let integrand = |xi: f64| -> Complex64 {
        let m0 = w.moment_kernel(0, xi).expect("order 0");
        let m1 = w.moment_kernel(1, xi).expect("order 1");
        let m2 = w.moment_kernel(2, xi).expect("order 2");
        Complex64::new(xi.powi(k as i32), 0.0)
            * m0.powu(l)
            * Complex64::new(m1.norm().powi(m as i32), 0.0)
            * m2.powu(n)
    };
    let quad = Quadrature::with_rel_tol(1e-10);
    let re = quad.integrate_breaks(|x| integrand(x).re, &breaks).value;
    let im = quad.integrate_breaks(|x| integrand(x).im, &breaks).value;
    if im.abs() > 1e-8 * re.abs() {
        return Err(EpsdError::Defect(format!(
            "ratio ({k},{l},{m},{n}) has imaginary part {im} against real part {re}"
        )));
    }
    Ok(2.0 * re / cn2)
}

/// `r(k,l,m,n) = (1/C_n²) ∫ ξ^k M0^l |M1|^m M2^n dξ` for an STFT window.
///
/// `band` truncates the integral to `[-band, band]`; it is mandatory for the
/// box window with `(2,2,0,0)`, whose integrand does not decay.
pub fn ratio_stft(spec: &TransformSpec, k: u32, l: u32, m: u32, n: u32, band: Option<f64>) -> Result<f64> {
    if spec.family() != Family::Stft {
        return Err(EpsdError::SpecMismatch(format!("ratio_stft called with {}", spec.name())));
    }
    window_ratio(spec.window(None)?, k, l, m, n, band)
}

/// `r_S(k,l,m,n)` at analysis frequency `f` (Gaussian voice window of std `K(f)/|f|`).
pub fn ratio_st(spec: &TransformSpec, f: f64, k: u32, l: u32, m: u32, n: u32) -> Result<f64> {
    if spec.family() != Family::STransform {
        return Err(EpsdError::SpecMismatch(format!("ratio_st called with {}", spec.name())));
    }
    if !(f.is_finite() && f > 0.0) {
        return Err(EpsdError::DegenerateWindow(format!(
            "S-transform ratio needs f > 0, got {f}"
        )));
    }
    window_ratio(spec.window(Some(f))?, k, l, m, n, None)
}

/// `r_w(j,k) = (s^k/C_nw²) ∫ (u/s - f)^j |ψ̂(u)|² du` with `s = f0/f`.
pub fn ratio_cwt(spec: &TransformSpec, f: f64, j: u32, k: u32) -> Result<f64> {
    let w = spec
        .wavelet()
        .ok_or_else(|| EpsdError::SpecMismatch(format!("ratio_cwt called with {}", spec.name())))?;
    spec.validate()?;
    if !(f.is_finite() && f > 0.0) {
        return Err(EpsdError::param("f", format!("must be positive, got {f}")));
    }
    if !WAVELET_PAIRS.contains(&(j, k)) {
        return Err(EpsdError::Unsupported(format!(
            "wavelet ratio ({j},{k}); supported: (1,0), (0,1), (2,0), (1,1), (0,2)"
        )));
    }
    let s = w.freq_to_scale(f)?;
    let moment = match w {
        Wavelet::Harmonic { m, n } => {
            // u/s - f is uniform on ±(n - m)/(2s): odd central moments vanish.
            if j % 2 == 1 {
                return Ok(0.0);
            }
            let q = Quadrature::with_rel_tol(1e-12);
            q.integrate(|u| (u / s - f).powi(j as i32) * w.ft(u).powi(2), m, n).value
        }
        Wavelet::Morse { .. } => {
            let (lo, hi) = w.band();
            Quadrature::with_rel_tol(1e-12)
                .integrate_breaks(
                    |u| (u / s - f).powi(j as i32) * w.ft(u).powi(2),
                    &[lo, w.f0(), hi],
                )
                .value
        }
    };
    Ok(s.powi(k as i32) * moment / w.cnw2())
}

/// Residual order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl TryFrom<u32> for Order {
    type Error = EpsdError;
    fn try_from(v: u32) -> Result<Self> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(EpsdError::Unsupported(format!(
                "residual order {v}; only orders 1 and 2 are available"
            ))),
        }
    }
}

/// Second-order STFT/ST residual from coefficients and the three ratios.
pub fn window_residual(c: &TaylorCoeffs, r2200: f64, r0020: f64, r0101: f64) -> f64 {
    (c.c10 * c.c10 + 2.0 * c.c20 * c.c00) * r2200
        + c.c01 * c.c01 * r0020
        + 2.0 * c.c02 * c.c00 * r0101
}

/// First-order CWT residual.
pub fn wavelet_residual_1(c: &TaylorCoeffs, r01: f64, r10: f64) -> f64 {
    2.0 * c.c00 * c.c01 * r01 + 2.0 * c.c00 * c.c10 * r10
}

/// Second-order CWT residual.
pub fn wavelet_residual_2(c: &TaylorCoeffs, r20: f64, r11: f64, r02: f64) -> f64 {
    (c.c10 * c.c10 + 2.0 * c.c00 * c.c20) * r20
        + (2.0 * c.c10 * c.c01 + 2.0 * c.c00 * c.c11) * r11
        + (c.c01 * c.c01 + 2.0 * c.c00 * c.c02) * r02
}

/// Signed residual grid `R(f, τ; order)`.
///
/// `band` is the STFT integration band (required for the box window at order 2).
pub fn residual_grid(
    model: &EpsdModel,
    spec: &TransformSpec,
    freqs: &FrequencyAxis,
    times: &[f64],
    order: Order,
    band: Option<f64>,
) -> Result<SpectralGrid> {
    residual_grid_masked(model, spec, freqs, times, order, band, None)
}

/// As [`residual_grid`], but cells where `S_E <= fraction · peak` (peak over the
/// grid) are set to 0 without evaluating the model's derivatives there.
pub fn residual_grid_masked(
    model: &EpsdModel,
    spec: &TransformSpec,
    freqs: &FrequencyAxis,
    times: &[f64],
    order: Order,
    band: Option<f64>,
    fraction: Option<f64>,
) -> Result<SpectralGrid> {
    spec.validate()?;
    let dim = (freqs.len(), times.len());
    let family = spec.family();
    if order == Order::First && family != Family::Cwt {
        // Odd imaginary kernels: the first-order term vanishes identically.
        return SpectralGrid::signed(freqs.clone(), times.to_vec(), Array2::zeros(dim));
    }
    if family != Family::Stft && freqs.contains_zero() {
        return Err(EpsdError::param("freqs", "residuals need f > 0 for ST and CWT"));
    }
    // Per-row ratios.
    let rows: Vec<[f64; 3]> = match family {
        Family::Stft => {
            let r = [
                ratio_stft(spec, 2, 2, 0, 0, band)?,
                ratio_stft(spec, 0, 0, 2, 0, band)?,
                ratio_stft(spec, 0, 1, 0, 1, band)?,
            ];
            vec![r; freqs.len()]
        }
        Family::STransform => freqs
            .values()
            .iter()
            .map(|&f| {
                Ok([
                    ratio_st(spec, f, 2, 2, 0, 0)?,
                    ratio_st(spec, f, 0, 0, 2, 0)?,
                    ratio_st(spec, f, 0, 1, 0, 1)?,
                ])
            })
            .collect::<Result<_>>()?,
        Family::Cwt => freqs
            .values()
            .iter()
            .map(|&f| match order {
                Order::First => Ok([ratio_cwt(spec, f, 0, 1)?, ratio_cwt(spec, f, 1, 0)?, 0.0]),
                Order::Second => Ok([
                    ratio_cwt(spec, f, 2, 0)?,
                    ratio_cwt(spec, f, 1, 1)?,
                    ratio_cwt(spec, f, 0, 2)?,
                ]),
            })
            .collect::<Result<_>>()?,
    };
    let keep = match fraction {
        Some(frac) => {
            let target = model.grid(freqs.values(), times);
            let peak = target.iter().cloned().fold(0.0, f64::max);
            target.mapv(|s| s > frac * peak)
        }
        None => Array2::from_elem(dim, true),
    };
    let mut values = Array2::<f64>::zeros(dim);
    for (i, &f) in freqs.values().iter().enumerate() {
        let r = rows[i];
        for (j, &t) in times.iter().enumerate() {
            if !keep[[i, j]] {
                continue;
            }
            let c = taylor_coeffs(model, f, t)?;
            values[[i, j]] = match (family, order) {
                (Family::Cwt, Order::First) => wavelet_residual_1(&c, r[0], r[1]),
                (Family::Cwt, Order::Second) => wavelet_residual_2(&c, r[0], r[1], r[2]),
                _ => window_residual(&c, r[0], r[1], r[2]),
            };
        }
    }
    SpectralGrid::signed(freqs.clone(), times.to_vec(), values)
}

/// Mean of `|R|` over cells where the model exceeds `fraction` of its peak on the grid.
pub fn aggregate_abs(residual: &SpectralGrid, model: &EpsdModel, fraction: f64) -> f64 {
    let target = model.grid(residual.freqs().values(), residual.times());
    let peak = target.iter().cloned().fold(0.0, f64::max);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (r, s) in residual.values().iter().zip(target.iter()) {
        if *s > fraction * peak {
            sum += r.abs();
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Closed forms of the Gaussian-window ratios with standard deviation `sigma`.
pub fn gaussian_ratio_closed_form(sigma: f64, k: u32, l: u32, m: u32, n: u32) -> Option<f64> {
    match (k, l, m, n) {
        (2, 2, 0, 0) => Some(1.0 / (8.0 * PI * PI * sigma * sigma)),
        (0, 0, 2, 0) | (0, 1, 0, 1) => Some(0.5 * sigma * sigma),
        _ => None,
    }
}
