//! Power-law fit `rms ≈ c · N^p` by least squares in log-log coordinates.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub p: f64,
    /// Standard error of `p` from the OLS residuals (zero for an exact fit).
    pub stderr: f64,
    /// `ln c`.
    pub intercept: f64,
}

/// Ordinary least squares of `ln rms` on `ln N`.
pub fn fit_scaling_exponent(pairs: &[(usize, f64)]) -> Result<ScalingFit> {
    if let Some(&(n, e)) = pairs.iter().find(|&&(n, e)| n == 0 || !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs positive N and positive finite errors, got ({n}, {e})"
        )));
    }
    let mut distinct: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs at least 3 distinct N, got {}",
            distinct.len()
        )));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let intercept = my - p * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - p * x).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(ScalingFit { p, stderr, intercept })
}
