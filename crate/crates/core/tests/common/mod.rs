//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

pub const E_T: f64 = 1478.0;
pub const DURATION: f64 = 21.5;
pub const ETA: f64 = 0.71;

/// Time envelope of the seismic target.
pub fn lambda0(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-(t.ln() - 2.15).powi(2) / 0.18).exp() / (0.42 * t * (1.42 * PI).sqrt())
}

/// Two-sided seismic EPSD written out directly from its defining formula.
pub fn seismic_se(f: f64, t: f64) -> f64 {
    let f = f.abs();
    if f == 0.0 || t <= 0.0 {
        return 0.0;
    }
    let fc = (1.942 - 0.35 * t.ln()).exp();
    let z = (f.ln() - fc.ln() + ETA * ETA / 2.0) / ETA;
    0.5 * E_T * lambda0(t) / (f * (2.0 * PI).sqrt() * ETA) * (-0.5 * z * z).exp()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// `n` points geometrically spaced from `a` to `b`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
        .collect()
}
