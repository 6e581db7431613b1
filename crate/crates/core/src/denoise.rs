//! End-to-end denoising: MVMD, per-mode scaling exponents, rejection of the
//! noise-dominated tail at the largest exponent jump, per-mode PCA cleanup,
//! and reconstruction. Also the SNR benchmark harness built on top of it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dfa::{fluctuation_curve, DfaConfig, Fluctuation, FluctuationCurve};
use crate::error::{Error, Result};
use crate::mvmd::{mvmd_decompose, sum_modes, BlimfSet, MvmdConfig};
use crate::signal::{add_noise, snr, MultichannelSignal, NoiseSpec, SnrReport};
use crate::stats::{pca_project, pca_select_with, PcaRule};

/// Norm used when scoring modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Mahalanobis,
    Euclidean,
}

impl Variant {
    fn fluctuation(self) -> Fluctuation {
        match self {
            Variant::Mahalanobis => Fluctuation::Mahalanobis,
            Variant::Euclidean => Fluctuation::Euclidean,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Mahalanobis => "mahalanobis",
            Variant::Euclidean => "euclidean",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mahalanobis" => Ok(Variant::Mahalanobis),
            "euclidean" => Ok(Variant::Euclidean),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant {other:?}"
            ))),
        }
    }
}

/// Per-mode exponents, their consecutive jumps and the signal/noise cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeScores {
    pub alphas: Vec<f64>,
    /// `betas[k] = |alphas[k + 1] - alphas[k]|`.
    pub betas: Vec<f64>,
    /// 1-based index of the last retained mode.
    pub k1: usize,
}

impl ModeScores {
    /// Applies the maximum-jump rule; ties go to the first maximum. A single
    /// mode is always retained.
    pub fn from_alphas(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidParameter("no exponents to score".into()));
        }
        let betas: Vec<f64> = alphas.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let mut k1 = 1;
        let mut best = f64::NEG_INFINITY;
        for (k, &b) in betas.iter().enumerate() {
            if b > best {
                best = b;
                k1 = k + 1;
            }
        }
        Ok(Self { alphas, betas, k1 })
    }
}

/// Exponent of every mode plus the cut index.
pub fn score_modes(blimfs: &BlimfSet, scales: &[usize], variant: Variant) -> Result<ModeScores> {
    let curves = mode_curves(blimfs, &DfaConfig::with_scales(scales.to_vec()), variant)?;
    scores_from_curves(&curves)
}

fn scores_from_curves(curves: &[FluctuationCurve]) -> Result<ModeScores> {
    if curves.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "mode scoring needs at least 2 modes, got {}",
            curves.len()
        )));
    }
    ModeScores::from_alphas(curves.iter().map(|c| c.alpha).collect())
}

fn mode_curves(
    blimfs: &BlimfSet,
    dfa: &DfaConfig,
    variant: Variant,
) -> Result<Vec<FluctuationCurve>> {
    blimfs
        .modes
        .iter()
        .map(|mode| fluctuation_curve(mode, dfa, variant.fluctuation()))
        .collect()
}

/// Everything that determines a denoising run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    pub mvmd: MvmdConfig,
    #[serde(default = "default_scales")]
    pub scales: Vec<usize>,
    #[serde(default = "default_order")]
    pub detrend_order: usize,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default = "default_pca_rule")]
    pub pca_rule: PcaRule,
}

/// Components holding more than 5% of a mode's variance. The modified-Kaiser
/// rule drops every channel below the mean eigenvalue, which for channels
/// carrying unrelated waveforms discards most of the signal.
pub const DEFAULT_PCA_RULE: PcaRule = PcaRule::TraceFraction(0.05);

fn default_pca_rule() -> PcaRule {
    DEFAULT_PCA_RULE
}

fn default_scales() -> Vec<usize> {
    DfaConfig::default().scales
}

fn default_order() -> usize {
    DfaConfig::default().order
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            mvmd: MvmdConfig::default(),
            scales: default_scales(),
            detrend_order: default_order(),
            variant: Variant::default(),
            pca_rule: DEFAULT_PCA_RULE,
        }
    }
}

impl DenoiseConfig {
    pub fn dfa(&self) -> DfaConfig {
        DfaConfig {
            scales: self.scales.clone(),
            order: self.detrend_order,
        }
    }
}

/// Outcome of one denoising run, serialized with stable field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    #[serde(flatten)]
    pub mode_scores: ModeScores,
    /// Principal components kept in each retained mode.
    pub retained_components: Vec<usize>,
    #[serde(
        rename = "input_snr_db",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub input_snr: Option<SnrReport>,
    #[serde(
        rename = "output_snr_db",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub output_snr: Option<SnrReport>,
    pub center_frequencies: Vec<f64>,
    /// Modes whose fluctuation curve was identically zero.
    pub degenerate_fits: Vec<bool>,
    pub mvmd_iterations: usize,
    pub mvmd_converged: bool,
    pub config: DenoiseConfig,
}

impl DenoiseReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn k1(&self) -> usize {
        self.mode_scores.k1
    }
}

/// Full pipeline output, including intermediates for plotting.
#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub estimate: MultichannelSignal,
    pub report: DenoiseReport,
    pub blimfs: BlimfSet,
    pub curves: Vec<FluctuationCurve>,
}

/// Denoises `noisy`; SNR fields stay empty.
pub fn denoise(
    noisy: &MultichannelSignal,
    mvmd_config: &MvmdConfig,
    scales: &[usize],
    variant: Variant,
) -> Result<(MultichannelSignal, DenoiseReport)> {
    let config = DenoiseConfig {
        mvmd: mvmd_config.clone(),
        scales: scales.to_vec(),
        variant,
        ..DenoiseConfig::default()
    };
    let out = denoise_with(noisy, &config, None)?;
    Ok((out.estimate, out.report))
}

/// Denoises `noisy`; when `clean` is given, input and output SNRs are reported.
pub fn denoise_with(
    noisy: &MultichannelSignal,
    config: &DenoiseConfig,
    clean: Option<&MultichannelSignal>,
) -> Result<DenoiseOutcome> {
    let dfa = config.dfa();
    dfa.validate(noisy.len())?;
    if let Some(c) = clean {
        if !c.same_shape(noisy) {
            return Err(Error::Shape(
                "clean reference and noisy input differ in shape".into(),
            ));
        }
    }
    let blimfs = mvmd_decompose(noisy, &config.mvmd)?;
    let curves = mode_curves(&blimfs, &dfa, config.variant)?;
    let mode_scores = if curves.len() >= 2 {
        scores_from_curves(&curves)?
    } else {
        ModeScores::from_alphas(curves.iter().map(|c| c.alpha).collect())?
    };

    let k1 = mode_scores.k1;
    let mut cleaned = Vec::with_capacity(k1);
    let mut retained_components = Vec::with_capacity(k1);
    for mode in &blimfs.modes[..k1] {
        let pca = pca_select_with(mode, config.pca_rule)?;
        retained_components.push(pca.retained_count);
        cleaned.push(pca_project(mode, &pca)?);
    }
    let estimate = sum_modes(&cleaned)?;

    let (input_snr, output_snr) = match clean {
        Some(c) => (Some(snr(c, noisy)?), Some(snr(c, &estimate)?)),
        None => (None, None),
    };
    let report = DenoiseReport {
        mode_scores,
        retained_components,
        input_snr,
        output_snr,
        center_frequencies: blimfs.center_frequencies.clone(),
        degenerate_fits: curves.iter().map(|c| c.degenerate).collect(),
        mvmd_iterations: blimfs.iterations_used,
        mvmd_converged: blimfs.converged,
        config: config.clone(),
    };
    Ok(DenoiseOutcome {
        estimate,
        report,
        blimfs,
        curves,
    })
}

/// All realizations at one average input SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub input_snr_db: f64,
    pub balanced: bool,
    pub seeds: Vec<u64>,
    pub reports: Vec<DenoiseReport>,
    pub mean_input_snr_db: f64,
    pub mean_output_snr_db: f64,
    /// Mean output SNR per channel across realizations.
    pub mean_output_per_channel_db: Vec<f64>,
}

/// Noise injection at every grid point and seed, denoising, and SNR means.
///
/// Unbalanced noise steps the per-channel targets 1 dB apart around the
/// grid value. Runs execute in parallel; results are ordered by grid point
/// then seed and do not depend on scheduling.
pub fn benchmark(
    clean: &MultichannelSignal,
    snr_grid: &[f64],
    balanced: bool,
    seeds: &[u64],
    config: &DenoiseConfig,
) -> Result<Vec<BenchmarkRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "benchmark needs at least one seed".into(),
        ));
    }
    let m = clean.channels();
    let jobs: Vec<(usize, u64)> = (0..snr_grid.len())
        .flat_map(|g| seeds.iter().map(move |&s| (g, s)))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(g, seed)| {
            let spec = if balanced {
                NoiseSpec::balanced(m, snr_grid[g], seed)
            } else {
                NoiseSpec::unbalanced(m, snr_grid[g], seed)
            };
            let noisy = add_noise(clean, &spec)?;
            denoise_with(&noisy, config, Some(clean)).map(|o| o.report)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(snr_grid.len());
    for (g, chunk) in reports.chunks(seeds.len()).enumerate() {
        let j = chunk.len() as f64;
        let mean = |f: &dyn Fn(&DenoiseReport) -> f64| chunk.iter().map(f).sum::<f64>() / j;
        let avg = |r: &Option<SnrReport>| r.as_ref().map_or(f64::NAN, |s| s.average_db);
        rows.push(BenchmarkRow {
            input_snr_db: snr_grid[g],
            balanced,
            seeds: seeds.to_vec(),
            mean_input_snr_db: mean(&|r| avg(&r.input_snr)),
            mean_output_snr_db: mean(&|r| avg(&r.output_snr)),
            mean_output_per_channel_db: (0..m)
                .map(|c| {
                    mean(&|r| {
                        r.output_snr
                            .as_ref()
                            .map_or(f64::NAN, |s| s.per_channel_db[c])
                    })
                })
                .collect(),
            reports: chunk.to_vec(),
        });
    }
    Ok(rows)
}
