use serde::{Deserialize, Serialize};

use crate::error::{EpsdError, Result};

/// Strictly increasing, nonnegative analysis frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyAxis {
    values: Vec<f64>,
}

impl FrequencyAxis {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(EpsdError::InvalidInput("empty frequency axis".into()));
        }
        if values.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(EpsdError::InvalidInput(
                "frequency axis values must be finite and nonnegative".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EpsdError::InvalidInput(
                "frequency axis must be strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    /// DFT bins `k/(N·dt)` for `0 < f <= Nyquist`.
    pub fn dft_bins(n: usize, dt: f64) -> Result<Self> {
        if n < 2 {
            return Err(EpsdError::InvalidInput("need at least 2 samples".into()));
        }
        let df = 1.0 / (n as f64 * dt);
        Self::new((1..=n / 2).map(|k| k as f64 * df).collect())
    }

    /// `count` points `start, start + step, ...`.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains_zero(&self) -> bool {
        self.values.first() == Some(&0.0)
    }
}

impl<'de> Deserialize<'de> for FrequencyAxis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        FrequencyAxis::new(raw.values).map_err(serde::de::Error::custom)
    }
}

/// Geometric scale grid `s_j = c0·s0^j`, `j = first_level..first_level + levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleAxis {
    c0: f64,
    s0: f64,
    first_level: usize,
    levels: usize,
}

impl ScaleAxis {
    pub fn geometric(c0: f64, s0: f64, levels: usize) -> Result<Self> {
        Self::with_levels(c0, s0, 0, levels)
    }

    pub fn with_levels(c0: f64, s0: f64, first_level: usize, levels: usize) -> Result<Self> {
        if !(c0.is_finite() && c0 > 0.0) {
            return Err(EpsdError::param("c0", format!("must be positive, got {c0}")));
        }
        if !(s0.is_finite() && s0 > 1.0) {
            return Err(EpsdError::param("s0", format!("must exceed 1, got {s0}")));
        }
        if levels == 0 {
            return Err(EpsdError::param("levels", "need at least one scale level"));
        }
        Ok(Self {
            c0,
            s0,
            first_level,
            levels,
        })
    }

    /// Smallest number of levels whose mapped frequencies `f0/s_j` reach down to `f_min`.
    pub fn covering(c0: f64, s0: f64, f0: f64, f_min: f64) -> Result<Self> {
        if !(f_min > 0.0 && f0 > 0.0) {
            return Err(EpsdError::param("f_min", "must be positive"));
        }
        let top = f0 / c0;
        let levels = if top <= f_min {
            1
        } else {
            ((top / f_min).ln() / s0.ln()).ceil() as usize + 1
        };
        Self::geometric(c0, s0, levels)
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn first_level(&self) -> usize {
        self.first_level
    }

    pub fn len(&self) -> usize {
        self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.levels == 0
    }

    pub fn scale(&self, i: usize) -> f64 {
        self.c0 * self.s0.powi((self.first_level + i) as i32)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.levels).map(|i| self.scale(i)).collect()
    }

    /// Keep only levels `skip..`; the result is still an exact geometric sequence.
    pub fn drop_first(&self, skip: usize) -> Option<Self> {
        (skip < self.levels).then(|| Self {
            c0: self.c0,
            s0: self.s0,
            first_level: self.first_level + skip,
            levels: self.levels - skip,
        })
    }
}

/// Row axis of a coefficient grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Frequency(FrequencyAxis),
    Scale(ScaleAxis),
}

impl Axis {
    pub fn len(&self) -> usize {
        match self {
            Axis::Frequency(f) => f.len(),
            Axis::Scale(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Frequency(f) => f.values().to_vec(),
            Axis::Scale(s) => s.values(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Axis::Frequency(_) => "frequency",
            Axis::Scale(_) => "scale",
        }
    }
}
