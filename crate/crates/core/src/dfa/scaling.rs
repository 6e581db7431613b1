use crate::error::{Error, Result};

/// Least-squares slope of `ln F` against `ln s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub alpha: f64,
    /// RMS of the log-log fit errors.
    pub residual: f64,
    /// Every fluctuation was zero; `alpha` is reported as 0.
    pub degenerate: bool,
}

/// Fits `F(s) = c s^alpha` on the points with `F > 0`.
pub fn scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some(&(s, f)) = points
        .iter()
        .find(|(s, f)| !(s.is_finite() && *s > 0.0) || !(f.is_finite() && *f >= 0.0))
    {
        return Err(Error::InvalidParameter(format!(
            "invalid curve point ({s}, {f})"
        )));
    }
    if !points.is_empty() && points.iter().all(|&(_, f)| f == 0.0) {
        return Ok(ScalingFit {
            alpha: 0.0,
            residual: 0.0,
            degenerate: true,
        });
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|&(s, f)| (s.ln(), f.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "scaling fit needs at least 2 points with F > 0, got {}",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "scaling fit needs distinct scales".into(),
        ));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - (alpha * p.0 + intercept)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        alpha,
        residual,
        degenerate: false,
    })
}
