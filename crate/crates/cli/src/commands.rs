use std::path::Path;

use mvdenoise::dfa::{fluctuation_curve, DfaConfig, Fluctuation};
use mvdenoise::signal::write_atomic;
use mvdenoise::{
    add_noise, benchmark, denoise_with, generate_test_signal, load_csv, make_quadrivariate,
    mvmd_decompose, save_csv, MultichannelSignal, MvmdConfig, NoiseSpec, TestSignal,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{BenchmarkArgs, DecomposeArgs, DenoiseArgs, DfaArgs, InputArgs, SynthArgs};
use crate::config::{apply_mvmd, build_denoise_config, parse_grid, parse_scales, FileConfig};
use crate::error::{CliError, CliResult};
use crate::plot::emit_plots;

/// Fails early when an output file cannot be created where requested.
fn check_output(path: &Path) -> CliResult<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::data(format!(
            "{}: directory {} does not exist",
            path.display(),
            parent.display()
        )));
    }
    if path.is_dir() {
        return Err(CliError::data(format!("{} is a directory", path.display())));
    }
    Ok(())
}

fn load(input: &InputArgs) -> CliResult<MultichannelSignal> {
    Ok(load_csv(&input.input, input.header)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(write_atomic(path, text.as_bytes())?)
}

fn synthetic(kind: &str, n: usize) -> CliResult<MultichannelSignal> {
    if kind == "quad" {
        return Ok(make_quadrivariate(n)?);
    }
    let kind: TestSignal = kind.parse().map_err(|_| {
        CliError::usage(format!(
            "unknown signal kind {kind:?} (quad, blocks, bumps, doppler, heavisine)"
        ))
    })?;
    Ok(MultichannelSignal::from_channels(&[generate_test_signal(
        kind, n,
    )?])?)
}

fn equicorrelation(m: usize, rho: f64) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { rho }).collect())
        .collect()
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    check_output(&args.out)?;
    if let Some(c) = &args.clean {
        check_output(c)?;
    }
    let clean = synthetic(&args.kind, args.n)?;
    let m = clean.channels();
    let signal = match args.snr {
        Some(snr) => {
            let mut spec = if args.unbalanced {
                NoiseSpec::unbalanced(m, snr, args.seed)
            } else {
                NoiseSpec::balanced(m, snr, args.seed)
            };
            if let Some(rho) = args.correlation {
                spec = spec.with_correlation(equicorrelation(m, rho));
            }
            add_noise(&clean, &spec)?
        }
        None if args.correlation.is_some() || args.unbalanced => {
            return Err(CliError::usage("--correlation and --unbalanced need --snr"));
        }
        None => clean.clone(),
    };
    save_csv(&signal, &args.out)?;
    if let Some(c) = &args.clean {
        save_csv(&clean, c)?;
    }
    println!(
        "wrote {} samples x {} channels to {}",
        signal.len(),
        m,
        args.out.display()
    );
    Ok(())
}

pub fn decompose(args: &DecomposeArgs, file: &FileConfig) -> CliResult<()> {
    let mut config: MvmdConfig = file.denoise_config()?.mvmd;
    apply_mvmd(&mut config, &args.mvmd)?;
    if args.out_dir.is_file() {
        return Err(CliError::data(format!(
            "{} is a file",
            args.out_dir.display()
        )));
    }
    let signal = load(&args.input)?;
    let blimfs = mvmd_decompose(&signal, &config)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", args.out_dir.display())))?;
    for (k, mode) in blimfs.modes.iter().enumerate() {
        save_csv(mode, args.out_dir.join(format!("mode_{:02}.csv", k + 1)))?;
    }
    let summary = json!({
        "center_frequencies": blimfs.center_frequencies,
        "iterations_used": blimfs.iterations_used,
        "converged": blimfs.converged,
        "config": config,
    });
    write_json(&args.out_dir.join("modes.json"), &summary)?;
    println!(
        "{} modes, center frequencies {:?}, {} iterations{}",
        blimfs.len(),
        blimfs.center_frequencies,
        blimfs.iterations_used,
        if blimfs.converged {
            ""
        } else {
            " (not converged)"
        }
    );
    Ok(())
}

pub fn dfa(args: &DfaArgs, file: &FileConfig) -> CliResult<()> {
    let base = file.denoise_config()?;
    let kind = match args.variant.as_deref().unwrap_or("mahalanobis") {
        "mahalanobis" => Fluctuation::Mahalanobis,
        "euclidean" => Fluctuation::Euclidean,
        "univariate" => Fluctuation::Univariate,
        other => {
            return Err(CliError::usage(format!(
                "unknown variant {other:?} (mahalanobis, euclidean, univariate)"
            )))
        }
    };
    let config = DfaConfig {
        scales: match &args.scales {
            Some(s) => parse_scales(s)?,
            None => base.scales,
        },
        order: args.order.unwrap_or(base.detrend_order),
    };
    if let Some(r) = &args.report {
        check_output(r)?;
    }
    let mut signal = load(&args.input)?;
    if let Some(c) = args.channel {
        signal = signal.select_channels(&[c])?;
    }
    let curve = fluctuation_curve(&signal, &config, kind)?;
    let out = json!({
        "variant": kind,
        "alpha": curve.alpha,
        "scales": curve.scales,
        "f_values": curve.f_values,
        "fit_residual": curve.fit_residual,
        "degenerate": curve.degenerate,
        "order": config.order,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(r) = &args.report {
        write_json(r, &out)?;
    }
    Ok(())
}

pub fn denoise(args: &DenoiseArgs, file: &FileConfig) -> CliResult<()> {
    let config = build_denoise_config(file, &args.mvmd, &args.scoring)?;
    check_output(&args.out)?;
    if let Some(r) = &args.report {
        check_output(r)?;
    }
    if let Some(p) = &args.plots {
        if p.is_file() {
            return Err(CliError::data(format!("{} is a file", p.display())));
        }
    }
    let noisy = load(&args.input)?;
    let clean = match &args.clean {
        Some(c) => Some(load_csv(c, args.input.header)?),
        None => None,
    };
    let out = denoise_with(&noisy, &config, clean.as_ref())?;
    save_csv(&out.estimate, &args.out)?;
    if let Some(r) = &args.report {
        write_json(r, &out.report)?;
    }
    if let Some(dir) = &args.plots {
        emit_plots(&out.report, &out.curves, dir)?;
    }
    let r = &out.report;
    print!("k1 = {} of {} modes", r.k1(), r.mode_scores.alphas.len());
    match (&r.input_snr, &r.output_snr) {
        (Some(i), Some(o)) => println!(", SNR {:.2} dB -> {:.2} dB", i.average_db, o.average_db),
        _ => println!(),
    }
    Ok(())
}

pub fn run_benchmark(args: &BenchmarkArgs, file: &FileConfig) -> CliResult<()> {
    let config = build_denoise_config(file, &args.mvmd, &args.scoring)?;
    if let Some(r) = &args.report {
        check_output(r)?;
    }
    let grid = match &args.snr_grid {
        Some(g) => parse_grid(g)?,
        None => file
            .get("snr_grid")?
            .unwrap_or_else(|| vec![-2.0, 2.0, 6.0, 10.0]),
    };
    let count: u64 = args.seeds.or(file.get("seeds")?).unwrap_or(20);
    let first: u64 = args.first_seed.or(file.get("first_seed")?).unwrap_or(0);
    if count == 0 || grid.is_empty() {
        return Err(CliError::usage(
            "benchmark needs at least one seed and one grid point",
        ));
    }
    let balanced = !args.unbalanced && file.get::<bool>("balanced")?.unwrap_or(true);
    let (clean, source) = match &args.clean {
        Some(path) => (load_csv(path, args.header)?, path.display().to_string()),
        None => {
            let kind: String = args
                .kind
                .clone()
                .or(file.get("kind")?)
                .unwrap_or_else(|| "quad".into());
            let n = args.n.or(file.get("n")?).unwrap_or(4096);
            (synthetic(&kind, n)?, kind)
        }
    };
    let seeds: Vec<u64> = (first..first + count).collect();
    let rows = benchmark(&clean, &grid, balanced, &seeds, &config)?;

    println!("input_db  mean_input_db  mean_output_db  gain_db");
    for row in &rows {
        println!(
            "{:>8.2}  {:>13.2}  {:>14.2}  {:>7.2}",
            row.input_snr_db,
            row.mean_input_snr_db,
            row.mean_output_snr_db,
            row.mean_output_snr_db - row.mean_input_snr_db
        );
    }
    if let Some(r) = &args.report {
        let report = json!({
            "signal": source,
            "n": clean.len(),
            "channels": clean.channels(),
            "balanced": balanced,
            "snr_grid": grid,
            "seeds": count,
            "first_seed": first,
            "config": config,
            "rows": rows,
        });
        write_json(r, &report)?;
    }
    Ok(())
}
