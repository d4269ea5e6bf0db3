//! Unnormalized discrete Fourier transform of a [`TimeSeries`].
//!
//! Forward: `X_k = Σ_n x_n e^{-i2πkn/N}` (no `1/N`). Inverse carries the `1/N`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::axis::FrequencyAxis;
use crate::error::Result;
use crate::series::TimeSeries;

/// DFT bins of a record together with its sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    dt: f64,
}

impl Spectrum {
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Frequency resolution `1/(N·dt)`.
    pub fn df(&self) -> f64 {
        1.0 / (self.bins.len() as f64 * self.dt)
    }

    /// Signed frequency of bin `k` (bins above `N/2` map to negative frequencies).
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.bins.len();
        let k = k as i64;
        let signed = if k as usize > n / 2 { k - n as i64 } else { k };
        signed as f64 * self.df()
    }

    /// Bins `0..=N/2` with their (nonnegative) frequencies.
    pub fn one_sided(&self) -> Result<(FrequencyAxis, Vec<Complex64>)> {
        let half = self.bins.len() / 2;
        let axis = FrequencyAxis::new((0..=half).map(|k| k as f64 * self.df()).collect())?;
        Ok((axis, self.bins[..=half].to_vec()))
    }

    /// Inverse DFT back to the time domain (complex samples).
    pub fn inverse(&self) -> Vec<Complex64> {
        let mut buf = self.bins.clone();
        inverse_in_place(&mut buf);
        buf
    }
}

/// Forward DFT of a series.
pub fn fourier_transform(ts: &TimeSeries) -> Spectrum {
    let mut bins: Vec<Complex64> = ts.samples().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward_in_place(&mut bins);
    Spectrum { bins, dt: ts.dt() }
}

pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
}

/// Smallest length `>= n` whose prime factors are all 2, 3 or 5.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn constant_series_is_dc_only() {
        let ts = TimeSeries::new(vec![1.0; 8], 1.0).unwrap();
        let sp = fourier_transform(&ts);
        assert!((sp.bins()[0] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        for z in &sp.bins()[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ts = TimeSeries::new(x.clone(), 0.1).unwrap();
        let sp = fourier_transform(&ts);
        let back = sp.inverse();
        let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b.re).abs() <= 1e-10 * scale);
            assert!(b.im.abs() <= 1e-10 * scale);
        }
        let e_time: f64 = x.iter().map(|v| v * v).sum();
        let e_freq: f64 = sp.bins().iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
        assert!((e_time - e_freq).abs() <= 1e-10 * e_time);
    }

    #[test]
    fn integer_period_cosine() {
        let dt = 0.02;
        let n = 500;
        let x: Vec<f64> = (0..n).map(|q| (2.0 * PI * 5.0 * q as f64 * dt).cos()).collect();
        let sp = fourier_transform(&TimeSeries::new(x, dt).unwrap());
        let k = (5.0 / sp.df()).round() as usize;
        assert_eq!(k, 50);
        assert!((sp.frequency(k) - 5.0).abs() < 1e-12);
        assert!((sp.frequency(n - k) + 5.0).abs() < 1e-12);
        for (i, z) in sp.bins().iter().enumerate() {
            let expected = if i == k || i == n - k { n as f64 / 2.0 } else { 0.0 };
            assert!((z.norm() - expected).abs() < 1e-9, "bin {i}: {}", z.norm());
        }
    }

    #[test]
    fn fast_len_is_smooth() {
        assert_eq!(fast_len(2149), 2160);
        assert_eq!(fast_len(64), 64);
        assert_eq!(fast_len(7), 8);
    }
}
