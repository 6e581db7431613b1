use std::ops::Range;

use nalgebra::DMatrix;

use super::{DEFAULT_ORDER, MIN_SCALE};
use crate::error::{Error, Result};
use crate::signal::MultichannelSignal;
use crate::stats::DetrendBasis;

/// Running sum of the mean-removed series, scaled by `1/N`, per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    values: DMatrix<f64>,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.len();
        &self.values.as_slice()[c * n..(c + 1) * n]
    }
}

pub fn profile(signal: &MultichannelSignal) -> Result<Profile> {
    let (n, m) = (signal.len(), signal.channels());
    if n < 2 {
        return Err(Error::Shape(format!(
            "profile needs at least 2 samples, got {n}"
        )));
    }
    let mut values = DMatrix::zeros(n, m);
    for c in 0..m {
        let x = signal.channel(c);
        let mean = x.iter().sum::<f64>() / n as f64;
        let mut acc = 0.0;
        for (i, v) in x.iter().enumerate() {
            acc += v - mean;
            values[(i, c)] = acc / n as f64;
        }
    }
    Ok(Profile { values })
}

/// `2 floor(N/s)` windows of length `s`: the first half tiles the series from
/// the start, the second half from the end (listed end-first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentLayout {
    pub scale: usize,
    pub len: usize,
    /// Zero-based, half-open sample ranges.
    pub segments: Vec<Range<usize>>,
}

impl SegmentLayout {
    /// Segments per end, `floor(N/s)`.
    pub fn per_end(&self) -> usize {
        self.segments.len() / 2
    }
}

/// Accepts any `4 <= s <= n`; the fluctuation functions additionally require
/// `s <= n/4`.
pub fn segment(n: usize, s: usize) -> Result<SegmentLayout> {
    if s < MIN_SCALE || s > n {
        return Err(Error::InvalidParameter(format!(
            "segment length {s} outside [{MIN_SCALE}, {n}]"
        )));
    }
    let per_end = n / s;
    let forward = (0..per_end).map(|v| v * s..(v + 1) * s);
    let backward = (0..per_end).map(|v| n - (v + 1) * s..n - v * s);
    Ok(SegmentLayout {
        scale: s,
        len: n,
        segments: forward.chain(backward).collect(),
    })
}

/// Detrended residual vectors laid out segment by segment, time index by time
/// index, each an `m`-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub scale: usize,
    pub segments: usize,
    pub channels: usize,
    values: Vec<f64>,
}

impl Residuals {
    /// Residual `m`-vector at local index `i` of segment `v`.
    pub fn vector(&self, v: usize, i: usize) -> &[f64] {
        let start = (v * self.scale + i) * self.channels;
        &self.values[start..start + self.channels]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.channels)
    }

    pub fn count(&self) -> usize {
        self.segments * self.scale
    }

    /// The residual series of one channel within one segment.
    pub fn segment_channel(&self, v: usize, c: usize) -> Vec<f64> {
        (0..self.scale).map(|i| self.vector(v, i)[c]).collect()
    }
}

/// Quadratic detrending of every segment and channel.
pub fn detrend(profile: &Profile, layout: &SegmentLayout) -> Result<Residuals> {
    detrend_with_order(profile, layout, DEFAULT_ORDER)
}

pub fn detrend_with_order(
    profile: &Profile,
    layout: &SegmentLayout,
    order: usize,
) -> Result<Residuals> {
    if layout.len != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            found: layout.len,
        });
    }
    let s = layout.scale;
    let m = profile.channels();
    let basis = DetrendBasis::new(s, order)?;
    let mut values = vec![0.0; layout.segments.len() * s * m];
    let mut out = vec![0.0; s];
    for (v, range) in layout.segments.iter().enumerate() {
        for c in 0..m {
            basis.residuals_into(&profile.channel(c)[range.clone()], &mut out);
            for (i, r) in out.iter().enumerate() {
                values[(v * s + i) * m + c] = *r;
            }
        }
    }
    Ok(Residuals {
        scale: s,
        segments: layout.segments.len(),
        channels: m,
        values,
    })
}
