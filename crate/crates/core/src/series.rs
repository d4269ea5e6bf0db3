use crate::error::{EpsdError, Result};

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    dt: f64,
    t0: f64,
}

impl TimeSeries {
    /// Series starting at `t = 0`.
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self> {
        Self::with_start(samples, dt, 0.0)
    }

    pub fn with_start(samples: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(EpsdError::InvalidInput(format!(
                "a time series needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EpsdError::param("dt", format!("must be finite and positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(EpsdError::param("t0", "must be finite"));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(EpsdError::NonFiniteSample { index });
        }
        Ok(Self { samples, dt, t0 })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Record length `N·dt`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t0 + index as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|q| self.time(q)).collect()
    }

    /// Multiply every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::with_start(
            self.samples.iter().map(|x| x * factor).collect(),
            self.dt,
            self.t0,
        )
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_nonfinite() {
        assert!(TimeSeries::new(vec![1.0], 0.1).is_err());
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN, 0.0], 0.1),
            Err(EpsdError::NonFiniteSample { index: 1 })
        ));
        assert!(TimeSeries::new(vec![1.0, 2.0], 0.0).is_err());
        assert!(TimeSeries::new(vec![1.0, 2.0], f64::INFINITY).is_err());
    }

    #[test]
    fn time_axis() {
        let ts = TimeSeries::with_start(vec![0.0; 4], 0.5, 1.0).unwrap();
        assert_eq!(ts.times(), vec![1.0, 1.5, 2.0, 2.5]);
        assert_eq!(ts.duration(), 2.0);
        assert_eq!(ts.nyquist(), 1.0);
    }
}
