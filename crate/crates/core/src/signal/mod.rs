//! Multichannel signal container, CSV ingestion, synthetic generators,
//! calibrated noise injection and SNR metrics.

mod generators;
mod io;
mod noise;
mod snr;

use nalgebra::{DMatrix, DVectorView};

use crate::error::{Error, Result};

pub use generators::{generate_test_signal, make_quadrivariate, TestSignal};
pub use io::{load_csv, save_csv, write_atomic, write_csv};
pub use noise::{add_noise, NoiseSpec};
pub use snr::{snr, SnrReport};

/// `N` samples by `m` channels of finite real values.
///
/// Storage is column-major, so each channel is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSignal {
    samples: DMatrix<f64>,
    sample_rate: f64,
}

impl MultichannelSignal {
    pub fn new(samples: DMatrix<f64>) -> Result<Self> {
        Self::with_sample_rate(samples, 1.0)
    }

    pub fn with_sample_rate(samples: DMatrix<f64>, sample_rate: f64) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::Shape(format!(
                "signal must have at least one sample and one channel, got {}x{}",
                samples.nrows(),
                samples.ncols()
            )));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        for (c, col) in samples.column_iter().enumerate() {
            if let Some(r) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: r, column: c });
            }
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a signal from per-channel sample vectors of equal length.
    pub fn from_channels(channels: &[Vec<f64>]) -> Result<Self> {
        let m = channels.len();
        let n = channels.first().map_or(0, Vec::len);
        if let Some((c, ch)) = channels.iter().enumerate().find(|(_, ch)| ch.len() != n) {
            return Err(Error::Shape(format!(
                "channel {c} has {} samples, expected {n}",
                ch.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, m, |i, j| channels[j][i]))
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, m))
    }

    /// Number of time samples `N`.
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of channels `m`.
    pub fn channels(&self) -> usize {
        self.samples.ncols()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn into_samples(self) -> DMatrix<f64> {
        self.samples
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.len();
        &self.samples.as_slice()[c * n..(c + 1) * n]
    }

    pub fn channel_view(&self, c: usize) -> DVectorView<'_, f64> {
        self.samples.column(c)
    }

    /// The `m`-vector observed at time index `i`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.samples.row(i).iter().copied().collect()
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.samples[(i, c)]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.samples.shape() == other.samples.shape()
    }

    /// Keeps only the listed channels, in the given order.
    pub fn select_channels(&self, channels: &[usize]) -> Result<Self> {
        if let Some(&c) = channels.iter().find(|&&c| c >= self.channels()) {
            return Err(Error::InvalidParameter(format!(
                "channel {c} out of range for {} channels",
                self.channels()
            )));
        }
        Self::with_sample_rate(self.samples.select_columns(channels), self.sample_rate)
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::with_sample_rate(&self.samples * factor, self.sample_rate)
    }
}
