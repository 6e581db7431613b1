//! Detrended fluctuation analysis: univariate, Euclidean multichannel and
//! Mahalanobis multichannel fluctuation functions, and the log-log fit of the
//! scaling exponent.

mod fluctuation;
mod profile;
mod scaling;

use serde::{Deserialize, Serialize};

pub use fluctuation::{
    fluctuation_euclidean, fluctuation_mahalanobis, fluctuation_mahalanobis_with,
    fluctuation_univariate, reference_covariance, residual_energy, Norm,
};
pub use profile::{
    detrend, detrend_with_order, profile, segment, Profile, Residuals, SegmentLayout,
};
pub use scaling::{scaling_exponent, ScalingFit};

use crate::error::{Error, Result};
use crate::signal::MultichannelSignal;

pub const MIN_SCALE: usize = 4;
pub const DEFAULT_SCALES: std::ops::RangeInclusive<usize> = 4..=16;
pub const DEFAULT_ORDER: usize = 2;

/// Which fluctuation function to evaluate per scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fluctuation {
    Univariate,
    Euclidean,
    Mahalanobis,
}

/// Scale grid and detrending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfaConfig {
    pub scales: Vec<usize>,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

impl Default for DfaConfig {
    fn default() -> Self {
        Self {
            scales: DEFAULT_SCALES.collect(),
            order: DEFAULT_ORDER,
        }
    }
}

impl DfaConfig {
    pub fn with_scales(scales: Vec<usize>) -> Self {
        Self {
            scales,
            ..Self::default()
        }
    }

    /// Checks the grid against a series of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::InvalidParameter("scale list is empty".into()));
        }
        if self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "scales must be strictly increasing, got {:?}",
                self.scales
            )));
        }
        for &s in &self.scales {
            check_scale(n, s)?;
        }
        if self.scales[0] < self.order + 2 {
            return Err(Error::InvalidParameter(format!(
                "order-{} detrending needs scales of at least {}",
                self.order,
                self.order + 2
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_scale(n: usize, s: usize) -> Result<()> {
    if s < MIN_SCALE || s * 4 > n {
        return Err(Error::InvalidParameter(format!(
            "scale {s} outside [{MIN_SCALE}, N/4] for N = {n}"
        )));
    }
    Ok(())
}

/// Fluctuation values over a scale grid and the fitted exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationCurve {
    pub scales: Vec<usize>,
    pub f_values: Vec<f64>,
    pub alpha: f64,
    pub fit_residual: f64,
    /// Set when every fluctuation was zero and `alpha` is a placeholder 0.
    pub degenerate: bool,
}

impl FluctuationCurve {
    /// Intercept of the fitted line `ln F = alpha ln s + c`, over the usable points.
    pub fn intercept(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .scales
            .iter()
            .zip(&self.f_values)
            .filter(|(_, &f)| f > 0.0)
            .map(|(&s, &f)| ((s as f64).ln(), f.ln()))
            .collect();
        if pts.is_empty() {
            return 0.0;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        my - self.alpha * mx
    }
}

/// Evaluates the chosen fluctuation function on every scale and fits alpha.
pub fn fluctuation_curve(
    signal: &MultichannelSignal,
    config: &DfaConfig,
    kind: Fluctuation,
) -> Result<FluctuationCurve> {
    config.validate(signal.len())?;
    if kind == Fluctuation::Univariate && signal.channels() != 1 {
        return Err(Error::InvalidParameter(format!(
            "univariate DFA needs one channel, got {}",
            signal.channels()
        )));
    }
    let prof = profile(signal)?;
    let residuals = config
        .scales
        .iter()
        .map(|&s| detrend_with_order(&prof, &segment(prof.len(), s)?, config.order))
        .collect::<Result<Vec<_>>>()?;
    let f_values = match kind {
        Fluctuation::Univariate | Fluctuation::Euclidean => residuals
            .iter()
            .map(|r| fluctuation::fluctuation_from_residuals(r, &Norm::Euclidean))
            .collect::<Result<Vec<_>>>()?,
        Fluctuation::Mahalanobis => match reference_covariance(&prof, &residuals)? {
            Some(sigma) => residuals
                .iter()
                .map(|r| fluctuation::fluctuation_from_residuals(r, &Norm::Mahalanobis(&sigma)))
                .collect::<Result<Vec<_>>>()?,
            None => vec![0.0; residuals.len()],
        },
    };
    let points: Vec<(f64, f64)> = config
        .scales
        .iter()
        .zip(&f_values)
        .map(|(&s, &f)| (s as f64, f))
        .collect();
    let fit = scaling_exponent(&points)?;
    Ok(FluctuationCurve {
        scales: config.scales.clone(),
        f_values,
        alpha: fit.alpha,
        fit_residual: fit.residual,
        degenerate: fit.degenerate,
    })
}

/// Mahalanobis-norm multivariate DFA over the given scales (quadratic detrending).
pub fn mdfa(signal: &MultichannelSignal, scales: &[usize]) -> Result<FluctuationCurve> {
    fluctuation_curve(
        signal,
        &DfaConfig::with_scales(scales.to_vec()),
        Fluctuation::Mahalanobis,
    )
}

/// Euclidean-norm multichannel DFA over the given scales.
pub fn mdfa_euclidean(signal: &MultichannelSignal, scales: &[usize]) -> Result<FluctuationCurve> {
    fluctuation_curve(
        signal,
        &DfaConfig::with_scales(scales.to_vec()),
        Fluctuation::Euclidean,
    )
}

/// Classic single-channel DFA over the given scales.
pub fn dfa_univariate(signal: &MultichannelSignal, scales: &[usize]) -> Result<FluctuationCurve> {
    fluctuation_curve(
        signal,
        &DfaConfig::with_scales(scales.to_vec()),
        Fluctuation::Univariate,
    )
}
