use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least squares fit of `log y = slope * log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Approximate 95% half-width of the slope (1.96 standard errors).
    pub halfwidth: f64,
    pub points: usize,
}

/// Fits on the pairs with positive `x` and `y`; everything else is dropped.
pub fn fit_log_log(xs: &[f64], ys: &[f64], min_points: usize) -> Result<LogLogFit> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pairs.len() < min_points.max(2) {
        return Err(Error::InsufficientScales { usable: pairs.len() });
    }
    Ok(ols(&pairs))
}

fn ols(pairs: &[(f64, f64)]) -> LogLogFit {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = pairs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // A constant response is fitted perfectly by a flat line.
    let r_squared = if syy > 1e-300 { (1.0 - sse / syy).max(0.0) } else { 1.0 };
    let halfwidth = if pairs.len() > 2 && sxx > 0.0 {
        1.96 * (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LogLogFit {
        slope,
        intercept,
        r_squared,
        halfwidth,
        points: pairs.len(),
    }
}

/// Minimum number of positive scales for an exponent fit.
pub const MIN_FIT_SCALES: usize = 3;

/// `(scale, value)` pairs with a fitted exponent `t` in `value ~ scale^t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
    /// `None` when fewer than three scales carry a positive value.
    pub fit: Option<LogLogFit>,
}

impl ExponentProfile {
    pub fn new(scales: Vec<f64>, values: Vec<f64>) -> Self {
        let fit = fit_log_log(&scales, &values, MIN_FIT_SCALES).ok();
        ExponentProfile { scales, values, fit }
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn require_fit(&self) -> Result<&LogLogFit> {
        self.fit.as_ref().ok_or(Error::InsufficientScales {
            usable: self.values.iter().filter(|v| **v > 0.0).count(),
        })
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.scales.iter().copied().zip(self.values.iter().copied())
    }
}

pub(crate) fn check_decreasing(field: &'static str, scales: &[f64]) -> Result<()> {
    if scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::param(field, "scales must be positive and finite"));
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param(field, "scales must be strictly decreasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (1..6).map(|k| 2f64.powi(-k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
        let f = fit_log_log(&xs, &ys, 3).unwrap();
        assert_abs_diff_eq!(f.slope, 1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zeros_are_dropped_and_short_fits_refused() {
        let p = ExponentProfile::new(vec![0.5, 0.25, 0.125, 0.0625], vec![1.0, 0.5, 0.0, 0.0]);
        assert!(p.fit.is_none());
        assert!(matches!(p.require_fit(), Err(Error::InsufficientScales { usable: 2 })));
    }

    #[test]
    fn constant_values_fit_flat() {
        let p = ExponentProfile::new(vec![0.5, 0.25, 0.125], vec![2.0, 2.0, 2.0]);
        let f = p.require_fit().unwrap();
        assert_abs_diff_eq!(f.slope, 0.0);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn decreasing_check() {
        assert!(check_decreasing("s", &[1.0, 0.5]).is_ok());
        assert!(check_decreasing("s", &[0.5, 0.5]).is_err());
        assert!(check_decreasing("s", &[0.5, -1.0]).is_err());
    }
}
