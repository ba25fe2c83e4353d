//! Per-instrument series transforms.
//!
//! Rolling quantities are computed over the trailing window ending at (and
//! including) each date. Moments use population formulas:
//! `skew = m3 / m2^1.5`, `kurt = m4 / m2^2`. A window whose spread is zero
//! (to 1e-12 relative) reports `std = skew = kurt = 0`.

use super::FeatureError;

pub const WINDOWS: [usize; 3] = [5, 10, 22];

/// `r_t = ln p_t - ln p_{t-1}`; element `k` is the return into date `k + 1`.
pub fn log_diff(prices: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if let Some(&bad) = prices.iter().find(|&&p| !(p > 0.0)) {
        return Err(FeatureError::NonPositivePrice(bad));
    }
    Ok(prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RollingStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub skew: Vec<f64>,
    pub kurt: Vec<f64>,
}

/// Moments of a single window.
pub fn moments(window: &[f64]) -> (f64, f64, f64, f64) {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in window {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let std = m2.sqrt();
    if std <= 1e-12 * mean.abs() || m2 == 0.0 {
        return (mean, 0.0, 0.0, 0.0);
    }
    (mean, std, m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// Rolling mean/std/skewness/kurtosis; element `k` covers `r[k .. k + window]`.
pub fn rolling_stats(r: &[f64], window: usize) -> Result<RollingStats, FeatureError> {
    if window == 0 || window > r.len() {
        return Err(FeatureError::WindowTooLarge { window, len: r.len() });
    }
    let mut out = RollingStats::default();
    for w in r.windows(window) {
        let (mean, std, skew, kurt) = moments(w);
        out.mean.push(mean);
        out.std.push(std);
        out.skew.push(skew);
        out.kurt.push(kurt);
    }
    Ok(out)
}

/// Position of the last price within the window's range; 0.5 when the range is empty.
pub fn minmax_position(window: &[f64]) -> f64 {
    let last = *window.last().expect("non-empty window");
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    if hi > lo {
        (last - lo) / (hi - lo)
    } else {
        0.5
    }
}

/// Relative min-max of the closing price; element `k` covers `p[k .. k + window]`.
pub fn rel_minmax(prices: &[f64], window: usize) -> Result<Vec<f64>, FeatureError> {
    if window == 0 || window > prices.len() {
        return Err(FeatureError::WindowTooLarge {
            window,
            len: prices.len(),
        });
    }
    Ok(prices.windows(window).map(minmax_position).collect())
}

/// `(p - l) / (h - l)`, or 0.5 when `h == l`.
pub fn rel_hlc(close: f64, high: f64, low: f64) -> f64 {
    if high > low {
        (close - low) / (high - low)
    } else {
        0.5
    }
}

/// `(h - l) / l`.
pub fn hl_spread(high: f64, low: f64) -> f64 {
    (high - low) / low
}
