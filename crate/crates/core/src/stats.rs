//! Summary statistics and trend classification for Monte Carlo tables.

use serde::{Deserialize, Serialize};

/// Slope below which a log-log trend counts as flat.
pub const FLAT_SLOPE: f64 = 0.05;
/// Slope above which a log-log trend counts as growing.
pub const GROWING_SLOPE: f64 = 0.2;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Linear-interpolation quantile (Hyndman-Fan type 7).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    assert!(!v.is_empty());
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Flat,
    Growing,
    Decreasing,
    Indeterminate,
}

impl Trend {
    pub fn classify(slope: f64) -> Self {
        if slope.abs() < FLAT_SLOPE {
            Trend::Flat
        } else if slope > GROWING_SLOPE {
            Trend::Growing
        } else if slope < -GROWING_SLOPE {
            Trend::Decreasing
        } else {
            Trend::Indeterminate
        }
    }
}

/// `max / min` of a set of positive values.
pub fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Geometric grid on `[lo, hi)` with `per_decade` points per factor of ten.
pub fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
    (0..n)
        .map(|j| lo * 10f64.powf(j as f64 / per_decade as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_match_type7() {
        let xs = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        assert_eq!(median(&xs), 3.5);
        assert!((quantile(&xs, 0.9) - 6.9).abs() < 1e-12);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 9.0);
    }

    #[test]
    fn slopes_and_trends() {
        let x = [32.0, 64.0, 128.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.4)).collect();
        assert!((log_log_slope(&x, &y) - 0.4).abs() < 1e-12);
        assert_eq!(Trend::classify(0.01), Trend::Flat);
        assert_eq!(Trend::classify(0.4), Trend::Growing);
        assert_eq!(Trend::classify(-0.4), Trend::Decreasing);
        assert_eq!(Trend::classify(0.1), Trend::Indeterminate);
    }

    #[test]
    fn geometric_grid_spacing() {
        let g = geometric_grid(1e-4, 1e-1, 40);
        assert_eq!(g.len(), 120);
        assert!((g[40] / g[0] - 10.0).abs() < 1e-9);
        assert!(*g.last().unwrap() < 1e-1);
    }

    #[test]
    fn mean_and_error() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((std_error(&xs) - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
