use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::covariance::{sample_covariance, symmetric_eigen};
use crate::error::{Error, Result};
use crate::signal::MultichannelSignal;

/// Channel-covariance eigenstructure of one multichannel mode and the number
/// of leading components kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub retained_count: usize,
    pub mean: Vec<f64>,
}

/// Eigenvalue cutoff `mean_eig * (1 + 2 sqrt((m - 1) / (N - 1)))`.
pub fn retention_threshold(eigenvalues: &[f64], n: usize) -> f64 {
    let m = eigenvalues.len();
    let mean = eigenvalues.iter().sum::<f64>() / m as f64;
    mean * (1.0 + 2.0 * ((m as f64 - 1.0) / (n as f64 - 1.0)).sqrt())
}

/// How many principal components of a mode survive.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum PcaRule {
    /// Eigenvalue above [`retention_threshold`].
    #[default]
    ModifiedKaiser,
    /// Eigenvalue above the given fraction of the eigenvalue sum.
    TraceFraction(f64),
    /// Every component; the projection is then the identity.
    All,
}

impl PcaRule {
    /// Number of leading components kept, at least 1.
    pub fn retained(&self, eigenvalues: &[f64], n: usize) -> usize {
        let cut = match *self {
            PcaRule::ModifiedKaiser => retention_threshold(eigenvalues, n),
            PcaRule::TraceFraction(f) => f * eigenvalues.iter().sum::<f64>(),
            PcaRule::All => return eigenvalues.len().max(1),
        };
        eigenvalues.iter().filter(|&&l| l > cut).count().max(1)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PcaRule::TraceFraction(f) if !(0.0..1.0).contains(&f) => Err(Error::InvalidParameter(
                format!("trace fraction must lie in [0, 1), got {f}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PcaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PcaRule::ModifiedKaiser => f.write_str("kaiser"),
            PcaRule::TraceFraction(v) => write!(f, "fraction:{v}"),
            PcaRule::All => f.write_str("all"),
        }
    }
}

/// Accepts `kaiser`, `all` and `fraction:<value>`.
impl FromStr for PcaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rule = match s {
            "kaiser" => PcaRule::ModifiedKaiser,
            "all" => PcaRule::All,
            _ => match s.strip_prefix("fraction:").map(str::parse::<f64>) {
                Some(Ok(v)) => PcaRule::TraceFraction(v),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown PCA rule {s:?} (kaiser, all, fraction:<f>)"
                    )))
                }
            },
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// Keeps the components whose eigenvalue exceeds [`retention_threshold`],
/// and always at least the largest one.
pub fn pca_select(mode: &MultichannelSignal) -> Result<PcaResult> {
    pca_select_with(mode, PcaRule::ModifiedKaiser)
}

pub fn pca_select_with(mode: &MultichannelSignal, rule: PcaRule) -> Result<PcaResult> {
    rule.validate()?;
    let (n, m) = (mode.len(), mode.channels());
    if n < 2 || n < m {
        return Err(Error::Shape(format!(
            "PCA needs N >= max(2, m), got N = {n}, m = {m}"
        )));
    }
    let cov = sample_covariance(mode.samples())?;
    let (eigenvalues, eigenvectors) = symmetric_eigen(&cov);
    let retained_count = rule.retained(&eigenvalues, n);
    let mean = mode.samples().row_mean().iter().copied().collect();
    Ok(PcaResult {
        eigenvalues,
        eigenvectors,
        retained_count,
        mean,
    })
}

/// Projects the mean-removed mode onto the retained components and maps it
/// back to the channel basis, restoring the mean.
pub fn pca_project(mode: &MultichannelSignal, pca: &PcaResult) -> Result<MultichannelSignal> {
    let m = mode.channels();
    if pca.eigenvectors.nrows() != m || pca.mean.len() != m {
        return Err(Error::DimensionMismatch {
            expected: pca.eigenvectors.nrows(),
            found: m,
        });
    }
    if pca.retained_count == 0 || pca.retained_count > m {
        return Err(Error::InvalidParameter(format!(
            "retained count {} outside [1, {m}]",
            pca.retained_count
        )));
    }
    let mut x = mode.samples().clone();
    for c in 0..m {
        x.column_mut(c).add_scalar_mut(-pca.mean[c]);
    }
    let v = pca.eigenvectors.columns(0, pca.retained_count);
    let mut out = (&x * v) * v.transpose();
    for c in 0..m {
        out.column_mut(c).add_scalar_mut(pca.mean[c]);
    }
    MultichannelSignal::with_sample_rate(out, mode.sample_rate())
}
