//! Multivariate signal denoising.
//!
//! The pipeline decomposes an `m`-channel signal into band-limited multichannel
//! modes with multivariate variational mode decomposition ([`mvmd`]), scores each
//! mode's long-range correlation with a Mahalanobis-norm multivariate detrended
//! fluctuation analysis ([`dfa`]), discards the trailing noise-dominated modes at
//! the largest jump in scaling exponent, PCA-cleans the survivors
//! ([`stats::pca_select`]) and sums them back ([`denoise`]).
//!
//! Synthetic test signals, calibrated noise injection and SNR metrics live in
//! [`signal`].

pub mod denoise;
pub mod dfa;
pub mod error;
pub mod mvmd;
pub mod signal;
pub mod stats;

pub use denoise::{
    benchmark, denoise, denoise_with, score_modes, BenchmarkRow, DenoiseConfig, DenoiseOutcome,
    DenoiseReport, ModeScores, Variant, DEFAULT_PCA_RULE,
};
pub use dfa::{dfa_univariate, mdfa, mdfa_euclidean, FluctuationCurve};
pub use error::{Error, Result};
pub use mvmd::{mvmd_decompose, reconstruct_from_modes, BlimfSet, InitStrategy, MvmdConfig};
pub use signal::{
    add_noise, generate_test_signal, load_csv, make_quadrivariate, save_csv, snr,
    MultichannelSignal, NoiseSpec, SnrReport, TestSignal,
};
pub use stats::{covariance, mahalanobis_norm, CovarianceMatrix, PcaResult, PcaRule};
