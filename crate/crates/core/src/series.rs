use crate::error::{Error, Result};

/// A uniformly sampled, real-valued signal.
///
/// Construction validates that there are at least two samples, that every
/// sample is finite and that the sample interval is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    dt: f64,
    label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dt: f64, label: impl Into<String>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::LengthTooShort {
                len: values.len(),
                min: 2,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSampleInterval(dt));
        }
        Ok(Self {
            values,
            dt,
            label: label.into(),
        })
    }

    /// Unit sample interval.
    pub fn from_values(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(values, 1.0, label)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Contiguous sub-series `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.values.len())
            .ok_or_else(|| {
                Error::InvalidSegmentation(format!(
                    "slice [{start}, {start}+{len}) outside series of length {}",
                    self.values.len()
                ))
            })?;
        Self::new(
            self.values[start..end].to_vec(),
            self.dt,
            self.label.clone(),
        )
    }

    /// Circular shift by `s` samples: `out[t] = values[(t + s) mod N]`.
    pub fn circular_shift(&self, s: usize) -> Self {
        let mut values = self.values.clone();
        let n = values.len();
        values.rotate_left(s % n);
        Self {
            values,
            dt: self.dt,
            label: self.label.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|v| v * c).collect(),
            self.dt,
            self.label.clone(),
        )
    }
}
