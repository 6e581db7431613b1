//! Run configuration: defaults, then the JSON config file, then flags.

use std::path::Path;

use mvdenoise::stats::PcaRule;
use mvdenoise::{DenoiseConfig, InitStrategy, MvmdConfig, Variant};
use serde_json::Value;

use crate::args::{MvmdArgs, ScoringArgs};
use crate::error::{CliError, CliResult};

/// Parsed config file. A denoise report is accepted too; its `config` echo
/// then supplies the pipeline settings.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    root: Value,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let root: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        if !root.is_object() {
            return Err(CliError::usage(format!(
                "config {}: expected a JSON object",
                path.display()
            )));
        }
        Ok(Self { root })
    }

    fn pipeline(&self) -> Option<&Value> {
        match self.root.get("config") {
            Some(c) => Some(c),
            None if self.root.is_object() => Some(&self.root),
            None => None,
        }
    }

    /// Top-level key, deserialized.
    pub fn get<T: serde::de::DeserializeOwned>(&self, key: &str) -> CliResult<Option<T>> {
        match self.root.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::usage(format!("config key {key:?}: {e}"))),
        }
    }

    /// Pipeline settings from defaults overlaid with the file.
    pub fn denoise_config(&self) -> CliResult<DenoiseConfig> {
        let mut base = serde_json::to_value(DenoiseConfig::default())?;
        if let Some(file) = self.pipeline() {
            merge(&mut base, file);
        }
        serde_json::from_value(base).map_err(|e| CliError::usage(format!("config: {e}")))
    }
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

pub fn apply_mvmd(config: &mut MvmdConfig, args: &MvmdArgs) -> CliResult<()> {
    if let Some(k) = args.modes {
        config.k = k;
    }
    if let Some(p) = args.penalty {
        config.bandwidth_penalty = p;
    }
    if let Some(t) = args.tolerance {
        config.tolerance = t;
    }
    if let Some(m) = args.max_iter {
        config.max_iterations = m;
    }
    if let Some(init) = &args.init {
        config.init_strategy = init.parse::<InitStrategy>()?;
    }
    if let Some(tau) = args.tau {
        config.dual_ascent_step = tau;
    }
    if let Some(seed) = args.mvmd_seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(())
}

pub fn apply_scoring(config: &mut DenoiseConfig, args: &ScoringArgs) -> CliResult<()> {
    if let Some(s) = &args.scales {
        config.scales = parse_scales(s)?;
    }
    if let Some(o) = args.order {
        config.detrend_order = o;
    }
    if let Some(v) = &args.variant {
        config.variant = v.parse::<Variant>()?;
    }
    if let Some(r) = &args.pca_rule {
        config.pca_rule = r.parse::<PcaRule>()?;
    }
    config.pca_rule.validate()?;
    Ok(())
}

pub fn build_denoise_config(
    file: &FileConfig,
    mvmd: &MvmdArgs,
    scoring: &ScoringArgs,
) -> CliResult<DenoiseConfig> {
    let mut config = file.denoise_config()?;
    apply_mvmd(&mut config.mvmd, mvmd)?;
    apply_scoring(&mut config, scoring)?;
    Ok(config)
}

/// `"a:b"` is every integer from a to b; otherwise a comma-separated list.
pub fn parse_scales(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::usage(format!("invalid scales {text:?}; use a:b or a comma list"));
    let scales: Vec<usize> = match text.split_once(':') {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            (a..=b).collect()
        }
        None => text
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?,
    };
    if scales.is_empty() {
        return Err(bad());
    }
    Ok(scales)
}

pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::usage(format!("invalid SNR grid entry {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_range_syntax() {
        assert_eq!(parse_scales("4:8").unwrap(), vec![4, 5, 6, 7, 8]);
        assert_eq!(parse_scales("4, 6,10").unwrap(), vec![4, 6, 10]);
        assert!(parse_scales("8:4").is_err());
        assert!(parse_scales("a:b").is_err());
        assert!(parse_scales("").is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-2,2, 6").unwrap(), vec![-2.0, 2.0, 6.0]);
        assert!(parse_grid("1,x").is_err());
    }

    #[test]
    fn file_overrides_defaults_and_flags_override_file() {
        let file = FileConfig {
            root: serde_json::json!({"mvmd": {"k": 6, "tolerance": 1e-6}, "variant": "euclidean"}),
        };
        let base = file.denoise_config().unwrap();
        assert_eq!(base.mvmd.k, 6);
        assert_eq!(base.mvmd.tolerance, 1e-6);
        assert_eq!(
            base.mvmd.bandwidth_penalty,
            MvmdConfig::default().bandwidth_penalty
        );
        assert_eq!(base.variant, Variant::Euclidean);

        let flags = MvmdArgs {
            modes: Some(8),
            ..MvmdArgs::default()
        };
        let cfg = build_denoise_config(&file, &flags, &ScoringArgs::default()).unwrap();
        assert_eq!(cfg.mvmd.k, 8);
        assert_eq!(cfg.mvmd.tolerance, 1e-6);
    }

    #[test]
    fn report_echo_is_a_config() {
        let mut echo = DenoiseConfig::default();
        echo.mvmd.k = 5;
        echo.scales = vec![4, 6, 8];
        let report = serde_json::json!({"k1": 2, "config": echo});
        let file = FileConfig { root: report };
        assert_eq!(file.denoise_config().unwrap(), echo);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let file = FileConfig {
            root: serde_json::json!({"mvmd": {"k": "ten"}}),
        };
        assert_eq!(file.denoise_config().unwrap_err().code, crate::error::USAGE);
        let flags = MvmdArgs {
            modes: Some(0),
            ..MvmdArgs::default()
        };
        let err = build_denoise_config(&FileConfig::default(), &flags, &ScoringArgs::default())
            .unwrap_err();
        assert_eq!(err.code, crate::error::USAGE);
    }
}
