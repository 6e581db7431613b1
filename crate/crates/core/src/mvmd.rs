//! Multivariate variational mode decomposition.
//!
//! Splits an `m`-channel signal into `K` multichannel modes that share one
//! center frequency per mode. Works on the positive half-spectrum of the
//! mirror-extended signal, alternating a Wiener-style update of every mode's
//! spectrum in every channel with a power-weighted update of the shared
//! center frequency.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MultichannelSignal;

/// Minimum number of samples per requested mode.
pub const MIN_SAMPLES_PER_MODE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    /// `omega_k = 0.5 k / K` for `k = 0..K`.
    Uniform,
    /// Log-uniform draws in `[1/N, 0.5]`, sorted, from the config seed.
    Random,
    /// All center frequencies start at DC.
    Zero,
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitStrategy::Uniform => "uniform",
            InitStrategy::Random => "random",
            InitStrategy::Zero => "zero",
        })
    }
}

impl FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InitStrategy::Uniform),
            "random" => Ok(InitStrategy::Random),
            "zero" => Ok(InitStrategy::Zero),
            other => Err(Error::InvalidParameter(format!(
                "unknown init strategy {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvmdConfig {
    /// Number of modes `K`.
    pub k: usize,
    /// Bandwidth penalty `a` in the filter `1 / (1 + 2 a (f - omega_k)^2)`.
    pub bandwidth_penalty: f64,
    pub max_iterations: usize,
    /// Stop once the relative squared change of all mode spectra drops below this.
    pub tolerance: f64,
    pub init_strategy: InitStrategy,
    /// Dual ascent step; 0 leaves the reconstruction constraint slack.
    pub dual_ascent_step: f64,
    /// Seed for [`InitStrategy::Random`].
    #[serde(default)]
    pub seed: u64,
}

impl Default for MvmdConfig {
    fn default() -> Self {
        Self {
            k: 10,
            bandwidth_penalty: 2000.0,
            max_iterations: 500,
            tolerance: 1e-7,
            init_strategy: InitStrategy::Uniform,
            dual_ascent_step: 0.0,
            seed: 0,
        }
    }
}

impl MvmdConfig {
    pub fn with_modes(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.k == 0 {
            return bad("mode count must be at least 1".into());
        }
        if !(self.bandwidth_penalty.is_finite() && self.bandwidth_penalty > 0.0) {
            return bad(format!(
                "bandwidth penalty must be positive, got {}",
                self.bandwidth_penalty
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.dual_ascent_step.is_finite() && self.dual_ascent_step >= 0.0) {
            return bad(format!(
                "dual ascent step must be non-negative, got {}",
                self.dual_ascent_step
            ));
        }
        Ok(())
    }
}

/// `K` band-limited multichannel modes, ordered by ascending center frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct BlimfSet {
    pub modes: Vec<MultichannelSignal>,
    /// Cycles per sample, in `[0, 0.5]`.
    pub center_frequencies: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl BlimfSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Pointwise sum of modes `1..=upto`.
pub fn reconstruct_from_modes(blimfs: &BlimfSet, upto: usize) -> Result<MultichannelSignal> {
    if upto == 0 || upto > blimfs.len() {
        return Err(Error::InvalidParameter(format!(
            "mode index {upto} outside [1, {}]",
            blimfs.len()
        )));
    }
    sum_modes(&blimfs.modes[..upto])
}

pub fn sum_modes(modes: &[MultichannelSignal]) -> Result<MultichannelSignal> {
    let first = modes
        .first()
        .ok_or_else(|| Error::InvalidParameter("no modes to sum".into()))?;
    let mut acc = first.samples().clone();
    for m in &modes[1..] {
        acc += m.samples();
    }
    MultichannelSignal::with_sample_rate(acc, first.sample_rate())
}

/// Mirror-extends to `2N`: reversed first half, the signal, reversed second half.
fn mirror_extend(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let head = n.div_ceil(2);
    let mut out = Vec::with_capacity(2 * n);
    out.extend(x[..head].iter().rev());
    out.extend_from_slice(x);
    out.extend(x[head..].iter().rev());
    out
}

fn initial_frequencies(config: &MvmdConfig, n: usize) -> Vec<f64> {
    let k = config.k;
    match config.init_strategy {
        InitStrategy::Uniform => (0..k).map(|i| 0.5 * i as f64 / k as f64).collect(),
        InitStrategy::Zero => vec![0.0; k],
        InitStrategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let lo = (1.0 / n as f64).ln();
            let hi = 0.5f64.ln();
            let mut w: Vec<f64> = (0..k)
                .map(|_| (lo + (hi - lo) * rng.random::<f64>()).exp())
                .collect();
            w.sort_by(f64::total_cmp);
            w
        }
    }
}

/// Decomposes `signal` into `config.k` modes.
pub fn mvmd_decompose(signal: &MultichannelSignal, config: &MvmdConfig) -> Result<BlimfSet> {
    config.validate()?;
    let (n, m, k) = (signal.len(), signal.channels(), config.k);
    if n < MIN_SAMPLES_PER_MODE * k {
        return Err(Error::InvalidParameter(format!(
            "{k} modes need at least {} samples, got {n}",
            MIN_SAMPLES_PER_MODE * k
        )));
    }

    let t = 2 * n;
    let half = t / 2 + 1;
    let freqs: Vec<f64> = (0..half).map(|j| j as f64 / t as f64).collect();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(t);
    let inverse = planner.plan_fft_inverse(t);

    // Positive half-spectrum of each mirrored channel.
    let spectra: Vec<Vec<Complex64>> = (0..m)
        .map(|c| {
            let mut buf: Vec<Complex64> = mirror_extend(signal.channel(c))
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            forward.process(&mut buf);
            buf.truncate(half);
            buf
        })
        .collect();

    // modes[k][c][j]
    let mut modes = vec![vec![vec![Complex64::new(0.0, 0.0); half]; m]; k];
    let mut total = vec![vec![Complex64::new(0.0, 0.0); half]; m];
    let mut duals = vec![vec![Complex64::new(0.0, 0.0); half]; m];
    let mut omega = initial_frequencies(config, n);
    let a2 = 2.0 * config.bandwidth_penalty;

    let mut iterations_used = 0;
    let mut converged = false;
    while iterations_used < config.max_iterations {
        iterations_used += 1;
        let mut change = 0.0;
        let mut previous_energy = 0.0;
        for mode in 0..k {
            let w = omega[mode];
            let mut weighted = 0.0;
            let mut power = 0.0;
            for c in 0..m {
                let u = &mut modes[mode][c];
                let x = &spectra[c];
                let tot = &mut total[c];
                let lam = &duals[c];
                for j in 0..half {
                    let old = u[j];
                    let residual = x[j] - (tot[j] - old) + lam[j] * 0.5;
                    let df = freqs[j] - w;
                    let new = residual / (1.0 + a2 * df * df);
                    tot[j] += new - old;
                    u[j] = new;
                    let p = new.norm_sqr();
                    weighted += freqs[j] * p;
                    power += p;
                    change += (new - old).norm_sqr();
                    previous_energy += old.norm_sqr();
                }
            }
            if power > 0.0 {
                omega[mode] = weighted / power;
            }
        }
        if config.dual_ascent_step > 0.0 {
            for c in 0..m {
                for j in 0..half {
                    duals[c][j] += (spectra[c][j] - total[c][j]) * config.dual_ascent_step;
                }
            }
        }
        let relative = if previous_energy > 0.0 {
            change / previous_energy
        } else if change == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if relative < config.tolerance {
            converged = true;
            break;
        }
    }

    // Back to the time domain: Hermitian completion, inverse FFT, crop the mirror.
    let head = n.div_ceil(2);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| omega[p].total_cmp(&omega[q]));
    let mut out_modes = Vec::with_capacity(k);
    let mut buf = vec![Complex64::new(0.0, 0.0); t];
    for &mode in &order {
        let mut samples = DMatrix::zeros(n, m);
        for c in 0..m {
            let u = &modes[mode][c];
            buf[0] = Complex64::new(u[0].re, 0.0);
            for j in 1..half - 1 {
                buf[j] = u[j];
                buf[t - j] = u[j].conj();
            }
            buf[t / 2] = Complex64::new(u[half - 1].re, 0.0);
            inverse.process(&mut buf);
            for i in 0..n {
                samples[(i, c)] = buf[head + i].re / t as f64;
            }
        }
        out_modes.push(MultichannelSignal::with_sample_rate(
            samples,
            signal.sample_rate(),
        )?);
    }

    Ok(BlimfSet {
        modes: out_modes,
        center_frequencies: order.iter().map(|&i| omega[i].clamp(0.0, 0.5)).collect(),
        iterations_used,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tones(n: usize, freqs: &[f64], channels: usize) -> MultichannelSignal {
        MultichannelSignal::new(DMatrix::from_fn(n, channels, |i, c| {
            freqs
                .iter()
                .enumerate()
                .map(|(q, f)| {
                    (1.0 + 0.3 * (c + q) as f64) * (2.0 * PI * f * i as f64 + 0.4 * c as f64).cos()
                })
                .sum()
        }))
        .unwrap()
    }

    fn rel_l2(a: &MultichannelSignal, b: &MultichannelSignal) -> f64 {
        (a.samples() - b.samples()).norm() / b.samples().norm()
    }

    /// Frequency of the largest periodogram bin, by direct DFT over a fine grid.
    fn peak_frequency(x: &[f64]) -> f64 {
        let mut best = (0.0, 0.0);
        for step in 1..5000 {
            let f = step as f64 * 0.5 / 5000.0;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in x.iter().enumerate() {
                re += v * (2.0 * PI * f * i as f64).cos();
                im -= v * (2.0 * PI * f * i as f64).sin();
            }
            let p = re * re + im * im;
            if p > best.1 {
                best = (f, p);
            }
        }
        best.0
    }

    #[test]
    fn mirror_extension_layout() {
        assert_eq!(
            mirror_extend(&[1.0, 2.0, 3.0, 4.0]),
            vec![2.0, 1.0, 1.0, 2.0, 3.0, 4.0, 4.0, 3.0]
        );
        assert_eq!(mirror_extend(&[1.0, 2.0, 3.0]).len(), 6);
    }

    #[test]
    fn single_tone() {
        // 50 whole periods; the mirrored extension is then a clean periodic tone.
        let x = tones(1000, &[0.05], 1);
        assert!((peak_frequency(x.channel(0)) - 0.05).abs() < 1e-3);
        let out = mvmd_decompose(&x, &MvmdConfig::with_modes(1)).unwrap();
        let w = out.center_frequencies[0];
        assert!((w - 0.05).abs() < 0.01 * 0.05, "omega = {w}");
        assert!(
            rel_l2(&out.modes[0], &x) < 0.02,
            "err = {}",
            rel_l2(&out.modes[0], &x)
        );
    }

    #[test]
    fn single_tone_error_is_confined_to_edges() {
        let x = tones(1024, &[0.05], 1);
        let out = mvmd_decompose(&x, &MvmdConfig::with_modes(1)).unwrap();
        assert!((out.center_frequencies[0] - 0.05).abs() < 0.01 * 0.05);
        let inner = 102..922;
        let err: f64 = inner
            .clone()
            .map(|i| (out.modes[0].get(i, 0) - x.get(i, 0)).powi(2))
            .sum();
        let energy: f64 = inner.map(|i| x.get(i, 0).powi(2)).sum();
        assert!((err / energy).sqrt() < 1e-3);
    }

    #[test]
    fn two_shared_tones() {
        let x = tones(2048, &[0.02, 0.14], 2);
        let out = mvmd_decompose(&x, &MvmdConfig::with_modes(2)).unwrap();
        assert!(
            (out.center_frequencies[0] - 0.02).abs() < 0.01 * 0.02,
            "{:?}",
            out.center_frequencies
        );
        assert!(
            (out.center_frequencies[1] - 0.14).abs() < 0.01 * 0.14,
            "{:?}",
            out.center_frequencies
        );
        for (q, f) in [0.02, 0.14].iter().enumerate() {
            for c in 0..2 {
                let tone: Vec<f64> = (0..2048)
                    .map(|i| (2.0 * PI * f * i as f64 + 0.4 * c as f64).cos())
                    .collect();
                let r = correlation(out.modes[q].channel(c), &tone);
                assert!(r > 0.99, "mode {q} channel {c} correlation {r}");
            }
        }
        let sum = reconstruct_from_modes(&out, 2).unwrap();
        assert!(rel_l2(&sum, &x) <= 0.05);
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma).powi(2);
            sbb += (y - mb).powi(2);
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn zero_input_is_a_fixed_point() {
        let x = MultichannelSignal::zeros(256, 3).unwrap();
        let cfg = MvmdConfig::with_modes(4);
        let out = mvmd_decompose(&x, &cfg).unwrap();
        assert!(out.converged);
        assert!(out
            .modes
            .iter()
            .all(|m| m.samples().iter().all(|&v| v == 0.0)));
        assert_eq!(out.center_frequencies, initial_frequencies(&cfg, 256));
        assert!(reconstruct_from_modes(&out, 4)
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn modes_sorted_and_deterministic() {
        let x = tones(512, &[0.3, 0.01, 0.12], 2);
        let cfg = MvmdConfig {
            init_strategy: InitStrategy::Random,
            seed: 17,
            ..MvmdConfig::with_modes(3)
        };
        let a = mvmd_decompose(&x, &cfg).unwrap();
        let b = mvmd_decompose(&x, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.center_frequencies.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.modes.iter().all(|m| m.same_shape(&x)));
    }

    #[test]
    fn reconstruction_sum_is_associative() {
        let x = tones(512, &[0.05, 0.2], 3);
        let out = mvmd_decompose(&x, &MvmdConfig::with_modes(3)).unwrap();
        let all = reconstruct_from_modes(&out, 3).unwrap();
        let mut manual = DMatrix::zeros(512, 3);
        for mode in &out.modes {
            manual += mode.samples();
        }
        assert!((all.samples() - manual).amax() < 1e-12);
        assert!(reconstruct_from_modes(&out, 0).is_err());
        assert!(reconstruct_from_modes(&out, 4).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let x = tones(64, &[0.1], 1);
        assert!(mvmd_decompose(&x, &MvmdConfig::with_modes(9)).is_err());
        assert!(mvmd_decompose(&x, &MvmdConfig::with_modes(0)).is_err());
        let cfg = MvmdConfig {
            bandwidth_penalty: 0.0,
            ..MvmdConfig::with_modes(2)
        };
        assert!(mvmd_decompose(&x, &cfg).is_err());
    }

    #[test]
    fn dual_ascent_tightens_reconstruction() {
        let x = tones(512, &[0.04, 0.21], 2);
        let slack = mvmd_decompose(&x, &MvmdConfig::with_modes(2)).unwrap();
        let tight = mvmd_decompose(
            &x,
            &MvmdConfig {
                dual_ascent_step: 0.1,
                ..MvmdConfig::with_modes(2)
            },
        )
        .unwrap();
        let e_slack = rel_l2(&reconstruct_from_modes(&slack, 2).unwrap(), &x);
        let e_tight = rel_l2(&reconstruct_from_modes(&tight, 2).unwrap(), &x);
        assert!(e_tight <= e_slack + 1e-9, "{e_tight} vs {e_slack}");
    }
}
