//! Analysis windows and wavelets, their Fourier transforms, moment kernels
//! and power normalization constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::axis::ScaleAxis;
use crate::error::{EpsdError, Result};
use crate::quadrature::Quadrature;
use crate::special::ln_gamma;

/// Default lower cutoff `|ζ| >= ε` for the D_κ integral.
///
/// The integrand `exp(-(2πκ(ζ-1))²)/|ζ|` is logarithmically divergent at ζ = 0.
/// With ζ = η/f the cutoff is the smallest resolved ratio between signal and
/// analysis frequency, roughly `f_min/f_max` of a ~500-bin analysis band.
pub const D_KAPPA_CUTOFF: f64 = 2.5e-3;

/// Frequency-dependent S-transform width `K(f)`.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaCurve {
    /// `K(f) = kappa0·(f_ref/f)^p`.
    PowerLaw { kappa0: f64, f_ref: f64, p: f64 },
    /// Monotone table, linearly interpolated and clamped at the ends.
    Tabulated { freqs: Vec<f64>, values: Vec<f64> },
}

impl KappaCurve {
    pub fn validate(&self) -> Result<()> {
        match self {
            KappaCurve::PowerLaw { kappa0, f_ref, p } => {
                if !(kappa0.is_finite() && *kappa0 > 0.0) {
                    return Err(EpsdError::param("kappa0", "must be positive"));
                }
                if !(f_ref.is_finite() && *f_ref > 0.0) {
                    return Err(EpsdError::param("f_ref", "must be positive"));
                }
                if !p.is_finite() {
                    return Err(EpsdError::param("p", "must be finite"));
                }
            }
            KappaCurve::Tabulated { freqs, values } => {
                if freqs.len() != values.len() || freqs.len() < 2 {
                    return Err(EpsdError::param(
                        "kappa table",
                        "needs at least two (freq, value) pairs of equal length",
                    ));
                }
                if freqs.windows(2).any(|w| w[1] <= w[0]) || freqs[0] < 0.0 {
                    return Err(EpsdError::param(
                        "kappa table",
                        "frequencies must be nonnegative and strictly increasing",
                    ));
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(EpsdError::param("kappa table", "values must be positive"));
                }
                let up = values.windows(2).all(|w| w[1] >= w[0]);
                let down = values.windows(2).all(|w| w[1] <= w[0]);
                if !(up || down) {
                    return Err(EpsdError::param("kappa table", "values must be monotone"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, f: f64) -> f64 {
        match self {
            KappaCurve::PowerLaw { kappa0, f_ref, p } => kappa0 * (f_ref / f.abs()).powf(*p),
            KappaCurve::Tabulated { freqs, values } => {
                let f = f.abs();
                let last = freqs.len() - 1;
                if f <= freqs[0] {
                    return values[0];
                }
                if f >= freqs[last] {
                    return values[last];
                }
                let i = freqs.partition_point(|&x| x <= f) - 1;
                let w = (f - freqs[i]) / (freqs[i + 1] - freqs[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }
}

/// Transform choice with its kernel parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    /// STFT with the unit-area box window of half-width `h` (s).
    StftBox { h: f64 },
    /// STFT with the unit-area Gaussian window of standard deviation `sigma` (s).
    StftGauss { sigma: f64 },
    /// S-transform; the voice window at `f` is Gaussian with std `kappa/|f|`.
    STrans { kappa: f64 },
    /// S-transform with a frequency-dependent width `K(f)`.
    STransGeneralized { k: KappaCurve },
    /// CWT with the harmonic wavelet flat on `[m, n)` Hz.
    CwtHarmonic { m: f64, n: f64, scales: ScaleAxis },
    /// CWT with the generalized Morse wavelet.
    CwtMorse {
        beta: f64,
        gamma: f64,
        scales: ScaleAxis,
    },
}

/// Which family of estimator a spec belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Stft,
    STransform,
    Cwt,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(EpsdError::param(name, format!("must be positive, got {v}")))
    }
}

impl TransformSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TransformSpec::StftBox { h } => positive("h", *h),
            TransformSpec::StftGauss { sigma } => positive("sigma", *sigma),
            TransformSpec::STrans { kappa } => positive("kappa", *kappa),
            TransformSpec::STransGeneralized { k } => k.validate(),
            TransformSpec::CwtHarmonic { m, n, .. } => {
                positive("m", *m)?;
                positive("n", *n)?;
                if m >= n {
                    return Err(EpsdError::param("m", "require m < n"));
                }
                Ok(())
            }
            TransformSpec::CwtMorse { beta, gamma, .. } => {
                positive("beta", *beta)?;
                positive("gamma", *gamma)
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            TransformSpec::StftBox { .. } | TransformSpec::StftGauss { .. } => Family::Stft,
            TransformSpec::STrans { .. } | TransformSpec::STransGeneralized { .. } => {
                Family::STransform
            }
            TransformSpec::CwtHarmonic { .. } | TransformSpec::CwtMorse { .. } => Family::Cwt,
        }
    }

    /// Short kebab-case name.
    pub fn name(&self) -> &'static str {
        match self {
            TransformSpec::StftBox { .. } => "stft-box",
            TransformSpec::StftGauss { .. } => "stft-gauss",
            TransformSpec::STrans { .. } => "s-transform",
            TransformSpec::STransGeneralized { .. } => "s-transform-generalized",
            TransformSpec::CwtHarmonic { .. } => "cwt-harmonic",
            TransformSpec::CwtMorse { .. } => "cwt-morse",
        }
    }

    /// `K(f)` for S-transform variants.
    pub fn kappa_at(&self, f: f64) -> Option<f64> {
        match self {
            TransformSpec::STrans { kappa } => Some(*kappa),
            TransformSpec::STransGeneralized { k } => Some(k.eval(f)),
            _ => None,
        }
    }

    /// Time-domain window used at analysis frequency `f`.
    ///
    /// STFT windows ignore `f`; S-transform windows need `f != 0`.
    pub fn window(&self, f: Option<f64>) -> Result<Window> {
        self.validate()?;
        match self {
            TransformSpec::StftBox { h } => Ok(Window::Box { h: *h }),
            TransformSpec::StftGauss { sigma } => Ok(Window::Gauss { sigma: *sigma }),
            TransformSpec::STrans { .. } | TransformSpec::STransGeneralized { .. } => {
                let f = f.ok_or_else(|| {
                    EpsdError::DegenerateWindow("S-transform window needs a frequency".into())
                })?;
                if f == 0.0 || !f.is_finite() {
                    return Err(EpsdError::DegenerateWindow(
                        "S-transform Gaussian window of std K(f)/|f| is undefined at f = 0".into(),
                    ));
                }
                let kappa = self.kappa_at(f).expect("S-transform variant");
                Ok(Window::Gauss {
                    sigma: kappa / f.abs(),
                })
            }
            _ => Err(EpsdError::SpecMismatch(format!(
                "{} has no analysis window",
                self.name()
            ))),
        }
    }

    pub fn wavelet(&self) -> Option<Wavelet> {
        match self {
            TransformSpec::CwtHarmonic { m, n, .. } => Some(Wavelet::Harmonic { m: *m, n: *n }),
            TransformSpec::CwtMorse { beta, gamma, .. } => Some(Wavelet::Morse {
                beta: *beta,
                gamma: *gamma,
            }),
            _ => None,
        }
    }

    pub fn scales(&self) -> Option<&ScaleAxis> {
        match self {
            TransformSpec::CwtHarmonic { scales, .. } | TransformSpec::CwtMorse { scales, .. } => {
                Some(scales)
            }
            _ => None,
        }
    }
}

/// Unit-area, even time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// `v(t) = 1/(2h)` on `|t| <= h`.
    Box { h: f64 },
    /// `v(t) = exp(-t²/(2σ²))/(√(2π)σ)`.
    Gauss { sigma: f64 },
}

impl Window {
    /// `v(t)`. The box takes half height at `|t| = h` so that sampled sums
    /// follow the trapezoid rule and keep unit mass.
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Window::Box { h } => {
                // Edge detection tolerates rounding in sampled lags.
                let a = t.abs();
                let tol = 1e-9 * h;
                if a < h - tol {
                    0.5 / h
                } else if a <= h + tol {
                    0.25 / h
                } else {
                    0.0
                }
            }
            Window::Gauss { sigma } => {
                (-t * t / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
            }
        }
    }

    /// `M_m(ξ) = ∫ s^m v(-s) e^{i2πξs} ds` for `m ∈ {0, 1, 2}`.
    pub fn moment_kernel(&self, m: u32, xi: f64) -> Result<Complex64> {
        let value = match (*self, m) {
            (Window::Box { h }, 0) => Complex64::new(sinc(2.0 * PI * xi * h), 0.0),
            (Window::Box { h }, 1) => Complex64::new(0.0, h * box_first_moment(2.0 * PI * xi * h)),
            (Window::Box { h }, 2) => Complex64::new(h * h * box_second_moment(2.0 * PI * xi * h), 0.0),
            (Window::Gauss { sigma }, _) if m <= 2 => {
                let s2 = sigma * sigma;
                let m0 = (-2.0 * PI * PI * s2 * xi * xi).exp();
                match m {
                    0 => Complex64::new(m0, 0.0),
                    1 => Complex64::new(0.0, 2.0 * PI * s2 * xi * m0),
                    _ => Complex64::new((s2 - 4.0 * PI * PI * s2 * s2 * xi * xi) * m0, 0.0),
                }
            }
            _ => {
                return Err(EpsdError::Unsupported(format!(
                    "moment kernel of order {m}; only orders 0, 1, 2 enter the residuals"
                )))
            }
        };
        Ok(value)
    }

    /// `M_0(ξ)`, the window's Fourier transform.
    pub fn ft(&self, xi: f64) -> f64 {
        self.moment_kernel(0, xi).expect("order 0").re
    }

    /// Power normalization `C_n² = ∫|v̂(ξ)|² dξ = ∫ v(t)² dt`.
    pub fn cn2(&self) -> f64 {
        match *self {
            Window::Box { h } => 1.0 / (2.0 * h),
            Window::Gauss { sigma } => 1.0 / (2.0 * sigma * PI.sqrt()),
        }
    }

    /// Half-width beyond which the window is negligible (exactly zero for the box).
    pub fn reach(&self) -> f64 {
        match *self {
            Window::Box { h } => h,
            Window::Gauss { sigma } => 8.5 * sigma,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

// (sin x − x cos x)/x², the box first moment divided by h.
fn box_first_moment(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ (−1)^k x^{2k+1} / ((2k+1)! (2k+3))
        let mut term = x; // x^{2k+1}/(2k+1)!
        let mut sum = 0.0;
        for k in 0..12 {
            sum += term / (2 * k + 3) as f64;
            term *= -x * x / (((2 * k + 2) * (2 * k + 3)) as f64);
        }
        sum
    } else {
        (x.sin() - x * x.cos()) / (x * x)
    }
}

// (x² sin x + 2x cos x − 2 sin x)/x³, the box second moment divided by h².
fn box_second_moment(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ (−1)^k x^{2k} / ((2k)! (2k+3))
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..12 {
            sum += term / (2 * k + 3) as f64;
            term *= -x * x / (((2 * k + 1) * (2 * k + 2)) as f64);
        }
        sum
    } else {
        (x * x * x.sin() + 2.0 * x * x.cos() - 2.0 * x.sin()) / (x * x * x)
    }
}

/// Analytic wavelets used by the CWT estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wavelet {
    /// Fourier transform `1/√(n-m)` on `[m, n)`.
    Harmonic { m: f64, n: f64 },
    /// Fourier transform `U(f)·a_{β,γ}(2πf)^β e^{-(2πf)^γ}`.
    Morse { beta: f64, gamma: f64 },
}

/// `ln a_{β,γ}` with `a_{β,γ} = 2(eγ/β)^{β/γ}`.
fn ln_morse_a(beta: f64, gamma: f64) -> f64 {
    2f64.ln() + beta / gamma * (1.0 + gamma.ln() - beta.ln())
}

impl Wavelet {
    /// `ψ̂(f)`; real for both families.
    pub fn ft(&self, f: f64) -> f64 {
        match *self {
            Wavelet::Harmonic { m, n } => {
                if f >= m && f < n {
                    1.0 / (n - m).sqrt()
                } else {
                    0.0
                }
            }
            Wavelet::Morse { beta, gamma } => {
                if f <= 0.0 {
                    0.0
                } else {
                    let w = 2.0 * PI * f;
                    (ln_morse_a(beta, gamma) + beta * w.ln() - w.powf(gamma)).exp()
                }
            }
        }
    }

    /// Center frequency `f0` of the scale-to-frequency map `f = f0/s`.
    pub fn f0(&self) -> f64 {
        match *self {
            Wavelet::Harmonic { m, n } => 0.5 * (m + n),
            Wavelet::Morse { beta, gamma } => (beta / gamma).powf(1.0 / gamma) / (2.0 * PI),
        }
    }

    /// Admissibility constant `C_ψ = ∫|ψ̂(f)|²/|f| df`.
    pub fn c_psi(&self) -> f64 {
        match *self {
            Wavelet::Harmonic { m, n } => (n / m).ln() / (n - m),
            Wavelet::Morse { beta, gamma } => {
                // 2 a_{2β,γ} Γ(2β/γ) / γ
                2.0 * (ln_morse_a(2.0 * beta, gamma) + ln_gamma(2.0 * beta / gamma)).exp() / gamma
            }
        }
    }

    /// `C_1ψ = a_{β,γ} Γ(β/γ)/γ` (Morse only).
    pub fn c1_psi(&self) -> Option<f64> {
        match *self {
            Wavelet::Harmonic { .. } => None,
            Wavelet::Morse { beta, gamma } => {
                Some((ln_morse_a(beta, gamma) + ln_gamma(beta / gamma)).exp() / gamma)
            }
        }
    }

    /// `a_{β,γ}` (Morse only).
    pub fn morse_a(&self) -> Option<f64> {
        match *self {
            Wavelet::Harmonic { .. } => None,
            Wavelet::Morse { beta, gamma } => Some(ln_morse_a(beta, gamma).exp()),
        }
    }

    /// Power normalization `C_nw² = ∫|ψ̂(η)|² dη`.
    pub fn cnw2(&self) -> f64 {
        match *self {
            Wavelet::Harmonic { .. } => 1.0,
            Wavelet::Morse { beta, gamma } => {
                // 2 a_{2β,γ} Γ((2β+1)/γ) / ((2π) 2^{1/γ} γ)
                let ln = ln_morse_a(2.0 * beta, gamma) + ln_gamma((2.0 * beta + 1.0) / gamma);
                2.0 * ln.exp() / (2.0 * PI * 2f64.powf(1.0 / gamma) * gamma)
            }
        }
    }

    /// Multiplier from the frequency-mapped scalogram `S_wf` to the EPSD estimate,
    /// `C_ψ f0 / C_nw²`.
    pub fn epsd_scale(&self) -> f64 {
        self.c_psi() * self.f0() / self.cnw2()
    }

    /// Frequency interval holding the support of `ψ̂` (down to 1e-16 of its peak power).
    pub fn band(&self) -> (f64, f64) {
        match *self {
            Wavelet::Harmonic { m, n } => (m, n),
            Wavelet::Morse { .. } => {
                let f0 = self.f0();
                let floor = self.ft(f0).powi(2) * 1e-16;
                let mut lo = f0;
                while lo > 1e-300 && self.ft(lo).powi(2) > floor {
                    lo *= 0.9;
                }
                let mut hi = f0;
                while self.ft(hi).powi(2) > floor {
                    hi *= 1.1;
                }
                (lo, hi)
            }
        }
    }

    pub fn scale_to_freq(&self, s: f64) -> Result<f64> {
        if !(s.is_finite() && s > 0.0) {
            return Err(EpsdError::param("scale", format!("must be positive, got {s}")));
        }
        Ok(self.f0() / s)
    }

    pub fn freq_to_scale(&self, f: f64) -> Result<f64> {
        if !(f.is_finite() && f > 0.0) {
            return Err(EpsdError::param("frequency", format!("must be positive, got {f}")));
        }
        Ok(self.f0() / f)
    }
}

/// Normalization constants of one transform; inapplicable entries are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelConstants {
    /// Transform name.
    pub transform: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cn2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cns0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1_psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cnw2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_bg: Option<f64>,
    /// Multiplier from the transform-domain PSD to the EPSD estimate
    /// (1 for STFT, `D_K/C_nS0` for ST, `C_ψ f0/C_nw²` for CWT).
    pub epsd_scale: f64,
    /// Multiplier from `|coefficient|²` to the EPSD estimate
    /// (`1/C_n²`, `1/(|f| C_nS0)` or `1/C_nw²`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_scale: Option<f64>,
}

impl KernelConstants {
    fn empty(transform: &'static str) -> Self {
        Self {
            transform,
            cn2: None,
            cns0: None,
            d_kappa: None,
            c_psi: None,
            c1_psi: None,
            cnw2: None,
            f0: None,
            a_bg: None,
            epsd_scale: 1.0,
            coefficient_scale: None,
        }
    }

    /// `key = value` lines, one per populated constant.
    pub fn to_text(&self) -> String {
        let mut out = format!("transform = {}\n", self.transform);
        let fields = [
            ("cn2", self.cn2),
            ("cns0", self.cns0),
            ("d_kappa", self.d_kappa),
            ("c_psi", self.c_psi),
            ("c1_psi", self.c1_psi),
            ("cnw2", self.cnw2),
            ("f0", self.f0),
            ("a_bg", self.a_bg),
            ("epsd_scale", Some(self.epsd_scale)),
            ("coefficient_scale", self.coefficient_scale),
        ];
        for (k, v) in fields {
            if let Some(v) = v {
                out.push_str(&format!("{k} = {v:.6}\n"));
            }
        }
        out
    }
}

/// `M_0(ξ)` (or `M_{S,0}(ξ; f)` for the S-transform).
pub fn window_ft(spec: &TransformSpec, xi: f64, f: Option<f64>) -> Result<Complex64> {
    moment_kernel(spec, 0, xi, f)
}

/// `M_m(ξ)` (or `M_{S,m}(ξ; f)`), `m ∈ {0, 1, 2}`.
pub fn moment_kernel(spec: &TransformSpec, m: u32, xi: f64, f: Option<f64>) -> Result<Complex64> {
    spec.window(f)?.moment_kernel(m, xi)
}

/// `ψ̂(f)` of a CWT spec.
pub fn wavelet_ft(spec: &TransformSpec, f: f64) -> Result<Complex64> {
    let w = spec
        .wavelet()
        .ok_or_else(|| EpsdError::SpecMismatch(format!("{} is not a CWT", spec.name())))?;
    Ok(Complex64::new(w.ft(f), 0.0))
}

/// Constants for `spec`; S-transform variants need the analysis frequency `f`.
pub fn norm_constants(spec: &TransformSpec, f: Option<f64>) -> Result<KernelConstants> {
    spec.validate()?;
    let mut c = KernelConstants::empty(spec.name());
    match spec.family() {
        Family::Stft => {
            let cn2 = spec.window(None)?.cn2();
            c.cn2 = Some(cn2);
            c.coefficient_scale = Some(1.0 / cn2);
        }
        Family::STransform => {
            let f = match f {
                Some(f) if f != 0.0 && f.is_finite() => f,
                _ => {
                    return Err(EpsdError::DegenerateWindow(
                        "S-transform constants need a nonzero analysis frequency".into(),
                    ))
                }
            };
            let kappa = spec.kappa_at(f).expect("S-transform variant");
            let cns0 = 1.0 / (kappa * (4.0 * PI).sqrt());
            let d = d_kappa(kappa, DKappaMethod::Quadrature)?.value;
            c.cns0 = Some(cns0);
            c.d_kappa = Some(d);
            c.epsd_scale = d / cns0;
            c.coefficient_scale = Some(1.0 / (f.abs() * cns0));
        }
        Family::Cwt => {
            let w = spec.wavelet().expect("CWT variant");
            c.c_psi = Some(w.c_psi());
            c.c1_psi = w.c1_psi();
            c.cnw2 = Some(w.cnw2());
            c.f0 = Some(w.f0());
            c.a_bg = w.morse_a();
            c.epsd_scale = w.epsd_scale();
            c.coefficient_scale = Some(1.0 / w.cnw2());
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DKappaMethod {
    Quadrature,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DKappa {
    pub value: f64,
    /// Set when the regression is used outside its fitted range (κ <= 0.1).
    pub warning: bool,
}

/// `D_κ = ∫ exp(-(2πκ(ζ-1))²) dζ/|ζ|`, by quadrature or by the regression
/// `(1 + 2.3 e^{-70 κ^3.14}) C_nS0`.
pub fn d_kappa(kappa: f64, method: DKappaMethod) -> Result<DKappa> {
    match method {
        DKappaMethod::Quadrature => d_kappa_quadrature(kappa, D_KAPPA_CUTOFF),
        DKappaMethod::Regression => {
            positive("kappa", kappa)?;
            let cns0 = 1.0 / (kappa * (4.0 * PI).sqrt());
            Ok(DKappa {
                value: (1.0 + 2.3 * (-70.0 * kappa.powf(3.14)).exp()) * cns0,
                warning: kappa <= 0.1,
            })
        }
    }
}

/// Quadrature of D_κ over `|ζ| >= cutoff`.
pub fn d_kappa_quadrature(kappa: f64, cutoff: f64) -> Result<DKappa> {
    positive("kappa", kappa)?;
    positive("cutoff", cutoff)?;
    let a = 2.0 * PI * kappa;
    let g = |z: f64| (-(a * (z - 1.0)).powi(2)).exp() / z.abs();
    // exp(-x²) < 1e-16 beyond x ≈ 6.1
    let reach = 6.1 / a;
    let hi = 1.0 + reach;
    let quad = Quadrature::with_rel_tol(1e-10);

    let log_breaks = |end: f64| -> Vec<f64> {
        let mut b = vec![cutoff];
        let mut x = cutoff * 10.0;
        while x < end {
            b.push(x);
            x *= 10.0;
        }
        b.push(end);
        b
    };

    let mut positive_breaks = log_breaks(1.0_f64.min(hi));
    if hi > 1.0 {
        positive_breaks.push(hi);
    }
    positive_breaks.dedup();
    let mut total = quad.integrate_breaks(g, &positive_breaks).value;

    // Negative side: the Gaussian tail reaches ζ < 0 only for small κ.
    let lo = reach - 1.0;
    if lo > cutoff {
        let breaks = log_breaks(lo);
        total += quad.integrate_breaks(|z| g(-z), &breaks).value;
    }
    Ok(DKappa {
        value: total,
        warning: false,
    })
}

/// `f = f0/s` for a CWT spec.
pub fn scale_to_freq(spec: &TransformSpec, s: f64) -> Result<f64> {
    spec.wavelet()
        .ok_or_else(|| EpsdError::SpecMismatch(format!("{} is not a CWT", spec.name())))?
        .scale_to_freq(s)
}

/// `s = f0/f` for a CWT spec.
pub fn freq_to_scale(spec: &TransformSpec, f: f64) -> Result<f64> {
    spec.wavelet()
        .ok_or_else(|| EpsdError::SpecMismatch(format!("{} is not a CWT", spec.name())))?
        .freq_to_scale(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn scales() -> ScaleAxis {
        ScaleAxis::geometric(0.01, 2f64.sqrt(), 10).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn window_ft_examples() {
        let bx = TransformSpec::StftBox { h: 1.0 };
        assert!((window_ft(&bx, 0.0, None).unwrap().re - 1.0).abs() < 1e-15);
        assert!(window_ft(&bx, 0.5, None).unwrap().re.abs() < 1e-15);
        let g = TransformSpec::StftGauss { sigma: 1.0 };
        assert!(close(window_ft(&g, 0.1, None).unwrap().re, 0.820_868_717_415_54, 1e-12));
        let st = TransformSpec::STrans { kappa: 1.0 };
        let v = window_ft(&st, 0.2, Some(2.0)).unwrap().re;
        assert!(close(v, (-2.0 * PI * PI * 0.04 / 4.0).exp(), 1e-14));
        assert!(close(v, 0.820_868_717_415_54, 1e-12));
        assert!(matches!(
            window_ft(&st, 0.2, Some(0.0)),
            Err(EpsdError::DegenerateWindow(_))
        ));
    }

    // Direct quadrature of M_m(ξ) = ∫ s^m v(-s) e^{i2πξs} ds.
    fn moment_by_quadrature(w: Window, m: i32, xi: f64) -> Complex64 {
        let r = w.reach();
        let q = Quadrature::with_rel_tol(1e-12);
        let re = q.integrate(|s| s.powi(m) * w.value(-s) * (2.0 * PI * xi * s).cos(), -r, r);
        let im = q.integrate(|s| s.powi(m) * w.value(-s) * (2.0 * PI * xi * s).sin(), -r, r);
        Complex64::new(re.value, im.value)
    }

    #[test]
    fn gaussian_first_moment_matches_quadrature() {
        let g = TransformSpec::StftGauss { sigma: 1.0 };
        let m1 = moment_kernel(&g, 1, 0.1, None).unwrap();
        let oracle = moment_by_quadrature(Window::Gauss { sigma: 1.0 }, 1, 0.1);
        assert!((m1 - oracle).norm() < 1e-10, "{m1} vs {oracle}");
        assert!(m1.re.abs() < 1e-15);
        assert!((m1.im.abs() - 0.515_767_03).abs() < 1e-6);
        assert!(moment_kernel(&g, 1, 0.0, None).unwrap().norm() < 1e-15);
        assert!(close(moment_kernel(&g, 2, 0.0, None).unwrap().re, 1.0, 1e-15));
        assert!(matches!(
            moment_kernel(&g, 3, 0.0, None),
            Err(EpsdError::Unsupported(_))
        ));
    }

    #[test]
    fn box_moments_match_quadrature() {
        for h in [0.25, 1.0, 4.0] {
            let w = Window::Box { h };
            for xi in [0.0, 0.003, 0.05, 0.3, 1.7] {
                for m in 0..=2 {
                    let exact = w.moment_kernel(m as u32, xi).unwrap();
                    let oracle = moment_by_quadrature(w, m, xi);
                    let scale = h.powi(m).max(1e-3);
                    assert!(
                        (exact - oracle).norm() < 1e-9 * scale,
                        "h={h} xi={xi} m={m}: {exact} vs {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn moment_parity() {
        for w in [Window::Box { h: 0.7 }, Window::Gauss { sigma: 0.4 }] {
            for xi in [0.1, 0.9, 2.3] {
                let m1p = w.moment_kernel(1, xi).unwrap();
                let m1n = w.moment_kernel(1, -xi).unwrap();
                assert_eq!(m1p.re, 0.0);
                assert!((m1p + m1n).norm() < 1e-15);
                let m2p = w.moment_kernel(2, xi).unwrap();
                let m2n = w.moment_kernel(2, -xi).unwrap();
                assert_eq!(m2p.im, 0.0);
                assert!((m2p - m2n).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn wavelet_ft_examples() {
        let hw = TransformSpec::CwtHarmonic {
            m: 1.0,
            n: 2.0,
            scales: scales(),
        };
        assert_eq!(wavelet_ft(&hw, 1.5).unwrap().re, 1.0);
        assert_eq!(wavelet_ft(&hw, 0.99).unwrap().re, 0.0);
        assert_eq!(wavelet_ft(&hw, 2.0).unwrap().re, 0.0);
        let gmw = Wavelet::Morse {
            beta: 20.0,
            gamma: 3.0,
        };
        let f0 = gmw.f0();
        assert!(close(f0, (20.0f64 / 3.0).powf(1.0 / 3.0) / (2.0 * PI), 1e-15));
        assert!((f0 - 0.29955).abs() < 1e-5);
        let a = gmw.morse_a().unwrap();
        let peak = a * (20.0f64 / 3.0).powf(20.0 / 3.0) * (-20.0f64 / 3.0).exp();
        assert!(close(gmw.ft(f0), peak, 1e-12));
        assert!(gmw.ft(f0 * 0.98) < gmw.ft(f0) && gmw.ft(f0 * 1.02) < gmw.ft(f0));
        assert_eq!(gmw.ft(0.0), 0.0);
        assert_eq!(gmw.ft(-1.0), 0.0);
        assert!(wavelet_ft(&TransformSpec::STrans { kappa: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn table_constants() {
        let c = norm_constants(&TransformSpec::StftBox { h: 1.0 }, None).unwrap();
        assert_eq!(c.cn2, Some(0.5));
        assert!(c.c_psi.is_none() && c.cns0.is_none());
        let c = norm_constants(&TransformSpec::StftGauss { sigma: 1.0 }, None).unwrap();
        assert!(close(c.cn2.unwrap(), 0.282_094_791_773_878_1, 1e-14));
        let hw = TransformSpec::CwtHarmonic {
            m: 1.0,
            n: 2.0,
            scales: scales(),
        };
        let c = norm_constants(&hw, None).unwrap();
        assert!(close(c.epsd_scale, 2f64.ln() * 1.5, 1e-15));
        assert!((c.epsd_scale - 1.040).abs() < 1e-3);
        assert_eq!(c.cnw2, Some(1.0));
        assert!(c.cn2.is_none());
        let gmw = TransformSpec::CwtMorse {
            beta: 20.0,
            gamma: 3.0,
            scales: scales(),
        };
        let c = norm_constants(&gmw, None).unwrap();
        assert!((c.epsd_scale - 1.008).abs() < 1e-3, "{}", c.epsd_scale);
        let closed = (40.0f64 / 3.0).powf(1.0 / 3.0) * crate::special::gamma(40.0 / 3.0)
            / crate::special::gamma(41.0 / 3.0);
        assert!(close(c.epsd_scale, closed, 1e-12));
        assert!(c.c1_psi.is_some() && c.a_bg.is_some());
        assert!(norm_constants(&TransformSpec::STrans { kappa: 1.0 }, None).is_err());
        assert!(norm_constants(&TransformSpec::STrans { kappa: 1.0 }, Some(0.0)).is_err());
    }

    #[test]
    fn harmonic_scale_tends_to_one() {
        let w = Wavelet::Harmonic { m: 1.0, n: 1.01 };
        assert!((w.epsd_scale() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn morse_constants_match_quadrature() {
        for (beta, gamma) in [(20.0, 3.0), (3.0, 3.0), (8.0, 2.0)] {
            let w = Wavelet::Morse { beta, gamma };
            let (lo, hi) = w.band();
            let q = Quadrature::with_rel_tol(1e-12);
            let breaks = [lo, w.f0(), hi];
            let cnw2 = q.integrate_breaks(|f| w.ft(f).powi(2), &breaks).value;
            assert!(close(cnw2, w.cnw2(), 1e-6), "β={beta}: {cnw2} vs {}", w.cnw2());
            let cpsi = q.integrate_breaks(|f| w.ft(f).powi(2) / f, &breaks).value;
            assert!(close(cpsi, w.c_psi(), 1e-6));
        }
        let hw = Wavelet::Harmonic { m: 1.0, n: 2.0 };
        let cpsi = integrate(|f| hw.ft(f).powi(2) / f, 1.0, 2.0);
        assert!(close(cpsi, hw.c_psi(), 1e-10));
    }

    #[test]
    fn scale_frequency_mapping() {
        let hw = TransformSpec::CwtHarmonic {
            m: 1.0,
            n: 2.0,
            scales: scales(),
        };
        assert_eq!(scale_to_freq(&hw, 1.0).unwrap(), 1.5);
        assert_eq!(freq_to_scale(&hw, 1.5).unwrap(), 1.0);
        assert!(scale_to_freq(&hw, 0.0).is_err());
        assert!(freq_to_scale(&hw, -1.0).is_err());
        let gmw = TransformSpec::CwtMorse {
            beta: 20.0,
            gamma: 3.0,
            scales: scales(),
        };
        assert!((scale_to_freq(&gmw, 1.0).unwrap() - 0.29955).abs() < 1e-5);
        for s in [0.013, 0.7, 3.0] {
            let f = scale_to_freq(&gmw, s).unwrap();
            assert!(close(f * s, gmw.wavelet().unwrap().f0(), 1e-15));
            assert!(close(freq_to_scale(&gmw, f).unwrap(), s, 1e-14));
        }
    }

    #[test]
    fn d_kappa_examples() {
        let cns0 = |k: f64| 1.0 / (k * (4.0 * PI).sqrt());
        let d1 = d_kappa(1.0, DKappaMethod::Quadrature).unwrap().value;
        assert!((d1 / cns0(1.0) - 1.0).abs() < 0.015);
        // For large κ the excess over C_nS0 is the 1/|ζ| curvature term 1/(8π²κ²) + O(κ⁻⁴).
        let d3 = d_kappa(3.0, DKappaMethod::Quadrature).unwrap().value;
        let s2 = 1.0 / (8.0 * PI * PI * 9.0);
        assert!((d3 / cns0(3.0) - (1.0 + s2 + 3.0 * s2 * s2)).abs() < 1e-6);
        let r = d_kappa(0.1, DKappaMethod::Regression).unwrap();
        assert!(r.warning);
        assert!((r.value - 8.988).abs() < 0.01, "{}", r.value);
        let q = d_kappa(0.1, DKappaMethod::Quadrature).unwrap().value;
        assert!((r.value / q - 1.0).abs() < 0.10);
        assert!(!d_kappa(0.5, DKappaMethod::Regression).unwrap().warning);
        assert!(d_kappa(0.0, DKappaMethod::Quadrature).is_err());
        assert!(d_kappa(-1.0, DKappaMethod::Regression).is_err());
    }

    #[test]
    fn kappa_curves() {
        let pl = KappaCurve::PowerLaw {
            kappa0: 1.0,
            f_ref: 2.0,
            p: 0.5,
        };
        assert!(close(pl.eval(2.0), 1.0, 1e-15));
        assert!(pl.eval(0.5) > 1.0 && pl.eval(8.0) < 1.0);
        let tab = KappaCurve::Tabulated {
            freqs: vec![1.0, 3.0],
            values: vec![2.0, 1.0],
        };
        tab.validate().unwrap();
        assert_eq!(tab.eval(2.0), 1.5);
        assert_eq!(tab.eval(0.1), 2.0);
        assert_eq!(tab.eval(9.0), 1.0);
        let bad = KappaCurve::Tabulated {
            freqs: vec![1.0, 2.0, 3.0],
            values: vec![1.0, 2.0, 1.0],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn spec_invariants() {
        let bad = TransformSpec::CwtHarmonic {
            m: 1.0,
            n: 1.0,
            scales: scales(),
        };
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("require m < n"), "{err}");
        assert!(TransformSpec::StftGauss { sigma: 0.0 }.validate().is_err());
        assert!(TransformSpec::CwtMorse {
            beta: 1.0,
            gamma: -1.0,
            scales: scales()
        }
        .validate()
        .is_err());
    }
}
