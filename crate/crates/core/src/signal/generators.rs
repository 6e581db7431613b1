//! Donoho–Johnstone benchmark waveforms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::MultichannelSignal;
use crate::error::{Error, Result};

const JUMP_POSITIONS: [f64; 11] = [
    0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81,
];
const BLOCK_HEIGHTS: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMP_HEIGHTS: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMP_WIDTHS: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];

pub const MIN_LENGTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestSignal {
    Blocks,
    Bumps,
    Doppler,
    HeaviSine,
}

impl TestSignal {
    pub const ALL: [TestSignal; 4] = [
        TestSignal::Blocks,
        TestSignal::Bumps,
        TestSignal::Doppler,
        TestSignal::HeaviSine,
    ];

    /// Evaluates the raw (unnormalized) waveform at `t` in (0, 1].
    pub fn eval(self, t: f64) -> f64 {
        match self {
            // Unit step taken as 1 at the jump itself.
            TestSignal::Blocks => JUMP_POSITIONS
                .iter()
                .zip(BLOCK_HEIGHTS)
                .filter(|(&pos, _)| t >= pos)
                .map(|(_, h)| h)
                .sum(),
            TestSignal::Bumps => JUMP_POSITIONS
                .iter()
                .zip(BUMP_HEIGHTS.iter().zip(BUMP_WIDTHS))
                .map(|(&pos, (&h, w))| h / (1.0 + ((t - pos) / w).abs()).powi(4))
                .sum(),
            TestSignal::Doppler => (t * (1.0 - t)).sqrt() * (2.0 * PI * 1.05 / (t + 0.05)).sin(),
            TestSignal::HeaviSine => 4.0 * (4.0 * PI * t).sin() - sign(t - 0.3) - sign(0.72 - t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestSignal::Blocks => "blocks",
            TestSignal::Bumps => "bumps",
            TestSignal::Doppler => "doppler",
            TestSignal::HeaviSine => "heavisine",
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for TestSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestSignal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blocks" => Ok(TestSignal::Blocks),
            "bumps" => Ok(TestSignal::Bumps),
            "doppler" => Ok(TestSignal::Doppler),
            "heavisine" | "heavysine" | "heavy-sine" => Ok(TestSignal::HeaviSine),
            other => Err(Error::InvalidParameter(format!(
                "unknown test signal {other:?}"
            ))),
        }
    }
}

/// Samples the waveform at `t = i/n`, `i = 1..=n`, without normalization.
pub fn raw_test_signal(kind: TestSignal, n: usize) -> Vec<f64> {
    (1..=n).map(|i| kind.eval(i as f64 / n as f64)).collect()
}

/// Samples the waveform at `t = i/n` and rescales it to unit sample
/// standard deviation (denominator `n - 1`). The mean is left in place.
pub fn generate_test_signal(kind: TestSignal, n: usize) -> Result<Vec<f64>> {
    if n < MIN_LENGTH {
        return Err(Error::InvalidParameter(format!(
            "test signal length must be at least {MIN_LENGTH}, got {n}"
        )));
    }
    let mut x = raw_test_signal(kind, n);
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    x.iter_mut().for_each(|v| *v /= sd);
    Ok(x)
}

/// Four-channel benchmark signal: blocks, bumps, doppler, heavisine.
pub fn make_quadrivariate(n: usize) -> Result<MultichannelSignal> {
    let channels = TestSignal::ALL
        .iter()
        .map(|&k| generate_test_signal(k, n))
        .collect::<Result<Vec<_>>>()?;
    MultichannelSignal::new(DMatrix::from_fn(n, 4, |i, j| channels[j][i]))
}
