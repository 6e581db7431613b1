use nalgebra::DMatrix;

use super::profile::{detrend, profile, segment, Profile, Residuals};
use super::{check_scale, DEFAULT_SCALES};
use crate::error::{Error, Result};
use crate::signal::MultichannelSignal;
use crate::stats::{sample_covariance, CovarianceMatrix};

/// Residual energy below this fraction of the profile's total variance is
/// treated as an exact fit.
const ZERO_RESIDUAL_RATIO: f64 = 1e-14;

/// Norm applied to each detrended residual vector.
#[derive(Debug, Clone, Copy)]
pub enum Norm<'a> {
    Euclidean,
    Mahalanobis(&'a CovarianceMatrix),
}

/// `sqrt(mean over all segments and samples of |r|^2)` under the given norm.
pub(crate) fn fluctuation_from_residuals(residuals: &Residuals, norm: &Norm<'_>) -> Result<f64> {
    let count = residuals.count();
    if count == 0 {
        return Err(Error::Shape("no residual vectors".into()));
    }
    let total = match norm {
        Norm::Euclidean => residuals.vectors().flatten().map(|v| v * v).sum::<f64>(),
        Norm::Mahalanobis(sigma) => {
            if sigma.dim() != residuals.channels {
                return Err(Error::DimensionMismatch {
                    expected: residuals.channels,
                    found: sigma.dim(),
                });
            }
            let l = sigma.cholesky_factor()?;
            let m = residuals.channels;
            let mut y = vec![0.0; m];
            let mut total = 0.0;
            for r in residuals.vectors() {
                // forward substitution L y = r
                for i in 0..m {
                    let mut acc = r[i];
                    for k in 0..i {
                        acc -= l[(i, k)] * y[k];
                    }
                    y[i] = acc / l[(i, i)];
                }
                total += y.iter().map(|v| v * v).sum::<f64>();
            }
            total
        }
    };
    Ok((total / count as f64).sqrt())
}

/// Sum of squared residuals over all vectors.
pub fn residual_energy(residuals: &Residuals) -> f64 {
    residuals.vectors().flatten().map(|v| v * v).sum()
}

/// Covariance of the residual vectors pooled over every segment of every
/// scale. `None` when the residuals vanish relative to the profile, i.e. the
/// profile is fitted exactly and every fluctuation is zero.
pub fn reference_covariance(
    profile: &Profile,
    residuals: &[Residuals],
) -> Result<Option<CovarianceMatrix>> {
    let m = profile.channels();
    let total: usize = residuals.iter().map(Residuals::count).sum();
    if total < 2 {
        return Err(Error::Shape(
            "too few residual vectors for a covariance".into(),
        ));
    }
    let mut pooled = DMatrix::zeros(total, m);
    let mut row = 0;
    for r in residuals {
        for v in r.vectors() {
            for (c, x) in v.iter().enumerate() {
                pooled[(row, c)] = *x;
            }
            row += 1;
        }
    }
    let raw = sample_covariance(&pooled)?;
    let profile_variance = if profile.len() >= 2 {
        sample_covariance(profile.values())?.trace()
    } else {
        0.0
    };
    if raw.trace() <= ZERO_RESIDUAL_RATIO * profile_variance {
        return Ok(None);
    }
    CovarianceMatrix::from_matrix(raw).map(Some)
}

fn residuals_at(signal: &MultichannelSignal, s: usize) -> Result<(Profile, Residuals)> {
    check_scale(signal.len(), s)?;
    let p = profile(signal)?;
    let r = detrend(&p, &segment(p.len(), s)?)?;
    Ok((p, r))
}

/// Single-channel fluctuation `F(s)`.
pub fn fluctuation_univariate(signal: &MultichannelSignal, s: usize) -> Result<f64> {
    if signal.channels() != 1 {
        return Err(Error::InvalidParameter(format!(
            "univariate fluctuation needs one channel, got {}",
            signal.channels()
        )));
    }
    let (_, r) = residuals_at(signal, s)?;
    fluctuation_from_residuals(&r, &Norm::Euclidean)
}

/// Multichannel fluctuation using the Euclidean norm of residual vectors.
pub fn fluctuation_euclidean(signal: &MultichannelSignal, s: usize) -> Result<f64> {
    let (_, r) = residuals_at(signal, s)?;
    fluctuation_from_residuals(&r, &Norm::Euclidean)
}

/// Multichannel fluctuation using the Mahalanobis norm of residual vectors.
///
/// The covariance is the residual covariance pooled over the default scale
/// grid (4..=16, clipped to `N/4`, plus `s` itself), so a standalone call at
/// scale `s` agrees with [`super::mdfa`] on the default grid. Returns the
/// covariance used alongside the fluctuation.
pub fn fluctuation_mahalanobis(
    signal: &MultichannelSignal,
    s: usize,
) -> Result<(f64, CovarianceMatrix)> {
    let (p, at_s) = residuals_at(signal, s)?;
    let n = p.len();
    let mut grid: Vec<usize> = DEFAULT_SCALES.filter(|&g| g * 4 <= n).collect();
    if !grid.contains(&s) {
        grid.push(s);
        grid.sort_unstable();
    }
    let pooled = grid
        .iter()
        .map(|&g| detrend(&p, &segment(n, g)?))
        .collect::<Result<Vec<_>>>()?;
    match reference_covariance(&p, &pooled)? {
        Some(sigma) => {
            let f = fluctuation_from_residuals(&at_s, &Norm::Mahalanobis(&sigma))?;
            Ok((f, sigma))
        }
        None => {
            let m = p.channels();
            let flat: Vec<f64> = at_s.vectors().flatten().copied().collect();
            let rows = DMatrix::from_row_slice(at_s.count(), m, &flat);
            let sigma = CovarianceMatrix::from_matrix(sample_covariance(&rows)?)?;
            Ok((0.0, sigma))
        }
    }
}

/// Mahalanobis fluctuation at scale `s` against a caller-supplied covariance.
pub fn fluctuation_mahalanobis_with(
    signal: &MultichannelSignal,
    s: usize,
    sigma: &CovarianceMatrix,
) -> Result<f64> {
    let (_, r) = residuals_at(signal, s)?;
    fluctuation_from_residuals(&r, &Norm::Mahalanobis(sigma))
}
