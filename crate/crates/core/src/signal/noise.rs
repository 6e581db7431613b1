use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::MultichannelSignal;
use crate::error::{Error, Result};
use crate::stats::cholesky_lower;

/// Target per-channel SNRs and the RNG seed for one noise realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub per_channel_snr_db: Vec<f64>,
    pub seed: u64,
    /// Cross-channel correlation of the noise; `None` means independent channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_channel_correlation: Option<Vec<Vec<f64>>>,
}

impl NoiseSpec {
    /// Same SNR on every channel.
    pub fn balanced(m: usize, snr_db: f64, seed: u64) -> Self {
        Self {
            per_channel_snr_db: vec![snr_db; m],
            seed,
            cross_channel_correlation: None,
        }
    }

    /// Per-channel targets stepped 1 dB apart and centred on `average_db`,
    /// e.g. 9 / 10 / 11 for three channels around 10 dB.
    pub fn unbalanced(m: usize, average_db: f64, seed: u64) -> Self {
        let centre = (m as f64 - 1.0) / 2.0;
        Self {
            per_channel_snr_db: (0..m).map(|j| average_db + (j as f64 - centre)).collect(),
            seed,
            cross_channel_correlation: None,
        }
    }

    pub fn with_correlation(mut self, correlation: Vec<Vec<f64>>) -> Self {
        self.cross_channel_correlation = Some(correlation);
        self
    }

    fn correlation_factor(&self, m: usize) -> Result<Option<DMatrix<f64>>> {
        let Some(rows) = &self.cross_channel_correlation else {
            return Ok(None);
        };
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: rows.len(),
            });
        }
        let c = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        for i in 0..m {
            if (c[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "noise correlation diagonal entry {i} is {}, expected 1",
                    c[(i, i)]
                )));
            }
            for j in 0..i {
                if (c[(i, j)] - c[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(
                        "noise correlation matrix is not symmetric".into(),
                    ));
                }
            }
        }
        // A tiny ridge lets semidefinite (e.g. perfectly correlated) inputs factor.
        let factor = cholesky_lower(&c).or_else(|_| {
            let mut ridged = c.clone();
            ridged.fill_diagonal(1.0 + 1e-12);
            cholesky_lower(&ridged)
        })?;
        Ok(Some(factor))
    }
}

/// Returns `clean + noise` where each noise channel is rescaled so the realized
/// SNR of that channel hits its target exactly.
pub fn add_noise(clean: &MultichannelSignal, spec: &NoiseSpec) -> Result<MultichannelSignal> {
    let (n, m) = (clean.len(), clean.channels());
    if spec.per_channel_snr_db.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: spec.per_channel_snr_db.len(),
        });
    }
    if let Some(bad) = spec.per_channel_snr_db.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "SNR target {bad} is not finite"
        )));
    }
    let energies: Vec<f64> = (0..m)
        .map(|c| clean.channel(c).iter().map(|v| v * v).sum())
        .collect();
    if let Some(c) = energies.iter().position(|&e| e == 0.0) {
        return Err(Error::ZeroEnergy { channel: c });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Filled row by row: one m-variate draw per time index.
    let mut noise = DMatrix::<f64>::zeros(n, m);
    for i in 0..n {
        for c in 0..m {
            noise[(i, c)] = StandardNormal.sample(&mut rng);
        }
    }
    if let Some(l) = spec.correlation_factor(m)? {
        // rows become L * z
        noise *= l.transpose();
    }

    let mut out = clean.samples().clone();
    for c in 0..m {
        let noise_energy: f64 = noise.column(c).iter().map(|v| v * v).sum();
        if noise_energy == 0.0 {
            return Err(Error::Numerical(format!(
                "noise channel {c} has zero energy"
            )));
        }
        let target = 10f64.powf(spec.per_channel_snr_db[c] / 10.0);
        let gain = (energies[c] / (noise_energy * target)).sqrt();
        for i in 0..n {
            out[(i, c)] += gain * noise[(i, c)];
        }
    }
    MultichannelSignal::with_sample_rate(out, clean.sample_rate())
}
