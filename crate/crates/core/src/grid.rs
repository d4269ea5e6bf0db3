use ndarray::Array2;
use num_complex::Complex64;

use crate::axis::{Axis, FrequencyAxis};
use crate::error::{EpsdError, Result};

/// Complex transform coefficients over (frequency or scale) × time.
///
/// `validity`, when present, holds for every cell the fraction of the analysis
/// window's energy that falls inside the record (1 = untouched by the edges).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientGrid {
    axis: Axis,
    times: Vec<f64>,
    values: Array2<Complex64>,
    validity: Option<Array2<f64>>,
}

impl CoefficientGrid {
    pub fn new(axis: Axis, times: Vec<f64>, values: Array2<Complex64>) -> Result<Self> {
        check_times(&times)?;
        if values.dim() != (axis.len(), times.len()) {
            return Err(EpsdError::DimensionMismatch(format!(
                "coefficient matrix is {:?}, axes are {}×{}",
                values.dim(),
                axis.len(),
                times.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(EpsdError::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self {
            axis,
            times,
            values,
            validity: None,
        })
    }

    pub fn with_validity(mut self, validity: Array2<f64>) -> Result<Self> {
        check_validity(&validity, self.values.dim())?;
        self.validity = Some(validity);
        Ok(self)
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn validity(&self) -> Option<&Array2<f64>> {
        self.validity.as_ref()
    }

    pub fn power(&self) -> Array2<f64> {
        self.values.mapv(|z| z.norm_sqr())
    }
}

/// Real power values over frequency × time.
///
/// PSD grids are nonnegative; residual grids carry `signed = true`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    freqs: FrequencyAxis,
    times: Vec<f64>,
    values: Array2<f64>,
    signed: bool,
    validity: Option<Array2<f64>>,
}

impl SpectralGrid {
    /// Nonnegative PSD grid.
    pub fn new(freqs: FrequencyAxis, times: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        Self::build(freqs, times, values, false)
    }

    /// Signed grid (residuals, differences).
    pub fn signed(freqs: FrequencyAxis, times: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        Self::build(freqs, times, values, true)
    }

    fn build(
        freqs: FrequencyAxis,
        times: Vec<f64>,
        values: Array2<f64>,
        signed: bool,
    ) -> Result<Self> {
        check_times(&times)?;
        if values.dim() != (freqs.len(), times.len()) {
            return Err(EpsdError::DimensionMismatch(format!(
                "value matrix is {:?}, axes are {}×{}",
                values.dim(),
                freqs.len(),
                times.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EpsdError::InvalidInput("non-finite grid value".into()));
        }
        if !signed && values.iter().any(|v| *v < 0.0) {
            return Err(EpsdError::InvalidInput(
                "negative value in a PSD grid (use a signed grid)".into(),
            ));
        }
        Ok(Self {
            freqs,
            times,
            values,
            signed,
            validity: None,
        })
    }

    pub fn with_validity(mut self, validity: Array2<f64>) -> Result<Self> {
        check_validity(&validity, self.values.dim())?;
        self.validity = Some(validity);
        Ok(self)
    }

    pub fn freqs(&self) -> &FrequencyAxis {
        &self.freqs
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn validity(&self) -> Option<&Array2<f64>> {
        self.validity.as_ref()
    }

    pub fn get(&self, freq_index: usize, time_index: usize) -> f64 {
        self.values[[freq_index, time_index]]
    }

    /// Index of the time column nearest to `t`.
    pub fn nearest_time(&self, t: f64) -> usize {
        nearest(&self.times, t)
    }

    pub fn nearest_freq(&self, f: f64) -> usize {
        nearest(self.freqs.values(), f)
    }

    /// Same axes and validity, new values.
    pub fn with_values(&self, values: Array2<f64>, signed: bool) -> Result<Self> {
        let mut g = Self::build(self.freqs.clone(), self.times.clone(), values, signed)?;
        g.validity = self.validity.clone();
        Ok(g)
    }

    pub fn same_axes(&self, other: &SpectralGrid) -> bool {
        self.freqs == other.freqs && self.times == other.times
    }
}

fn nearest(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(EpsdError::InvalidInput("empty time axis".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EpsdError::InvalidInput(
            "time axis must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_validity(validity: &Array2<f64>, dim: (usize, usize)) -> Result<()> {
    if validity.dim() != dim {
        return Err(EpsdError::DimensionMismatch(format!(
            "validity matrix is {:?}, grid is {:?}",
            validity.dim(),
            dim
        )));
    }
    if validity.iter().any(|v| !(0.0..=1.0 + 1e-12).contains(v)) {
        return Err(EpsdError::InvalidInput("validity outside [0, 1]".into()));
    }
    Ok(())
}
