use serde::Serialize;
use thiserror::Error;

use crate::numstat::{Degree, Loess, StatError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StlError {
    #[error("series of length {len} is shorter than two periods ({period} each)")]
    SeriesTooShort { len: usize, period: usize },
    #[error("bad {name} span {value}: spans must be odd and at least 3")]
    BadSpan { name: &'static str, value: usize },
    #[error("period must be at least 2, got {0}")]
    BadPeriod(usize),
    #[error("initial weights: expected {expected}, got {got}")]
    WeightLength { expected: usize, got: usize },
    #[error(transparent)]
    Stat(#[from] StatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StlParams {
    pub period: usize,
    pub seasonal_span: usize,
    pub trend_span: usize,
    pub lowpass_span: usize,
    pub n_inner: usize,
    pub n_outer: usize,
}

fn next_odd(v: f64) -> usize {
    let n = v.ceil() as usize;
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

impl StlParams {
    /// Canonical spans for a period and seasonal span: the trend span is the
    /// smallest odd integer ≥ 1.5·period / (1 − 1.5/seasonal_span) and the
    /// low-pass span the smallest odd integer ≥ period.
    pub fn for_period(period: usize, seasonal_span: usize) -> Self {
        StlParams {
            period,
            seasonal_span,
            trend_span: Self::default_trend_span(period, seasonal_span),
            lowpass_span: Self::default_lowpass_span(period),
            n_inner: 2,
            n_outer: 1,
        }
    }

    pub fn default_trend_span(period: usize, seasonal_span: usize) -> usize {
        // tiny guard so 1.5·12/(1 − 1.5/7) = 22.909.. does not land on an
        // exact integer through rounding noise
        next_odd(1.5 * period as f64 / (1.0 - 1.5 / seasonal_span as f64) - 1e-9)
    }

    pub fn default_lowpass_span(period: usize) -> usize {
        next_odd(period as f64)
    }

    pub fn validate(&self) -> Result<(), StlError> {
        if self.period < 2 {
            return Err(StlError::BadPeriod(self.period));
        }
        for (name, value) in
            [("seasonal", self.seasonal_span), ("trend", self.trend_span), ("lowpass", self.lowpass_span)]
        {
            if value < 3 || value % 2 == 0 {
                return Err(StlError::BadSpan { name, value });
            }
        }
        Ok(())
    }
}

impl Default for StlParams {
    fn default() -> Self {
        Self::for_period(12, 7)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stl {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<f64>,
    /// Robustness weights of the final pass (all 1 without outer iterations).
    pub weights: Vec<f64>,
}

fn moving_average(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len() + 1 - len;
    let mut out = Vec::with_capacity(n);
    let mut sum: f64 = x[..len].iter().sum();
    out.push(sum / len as f64);
    for i in 1..n {
        sum += x[i + len - 1] - x[i - 1];
        out.push(sum / len as f64);
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Bisquare weights of the residuals, scaled by six times their median
/// absolute value. A zero scale gives unit weights.
pub fn robustness_weights(residuals: &[f64]) -> Vec<f64> {
    let h = 6.0 * median(residuals.iter().map(|r| r.abs()).collect());
    if !(h > 0.0) {
        return vec![1.0; residuals.len()];
    }
    residuals
        .iter()
        .map(|r| {
            let u = r.abs() / h;
            if u < 1.0 {
                let t = 1.0 - u * u;
                t * t
            } else {
                0.0
            }
        })
        .collect()
}

/// Seasonal-trend decomposition by LOESS.
pub fn stl(y: &[f64], params: &StlParams) -> Result<Stl, StlError> {
    stl_with_weights(y, params, None)
}

/// As [`stl`], with robustness weights for the first pass. They are only
/// consulted when `params.n_outer > 0`.
pub fn stl_with_weights(y: &[f64], params: &StlParams, initial: Option<&[f64]>) -> Result<Stl, StlError> {
    params.validate()?;
    let n = y.len();
    let np = params.period;
    if n < 2 * np {
        return Err(StlError::SeriesTooShort { len: n, period: np });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StatError::Domain("non-finite value in series".into()).into());
    }
    if n < 3 * np {
        log::warn!("series of {n} points covers fewer than three periods of {np}; the seasonal estimate will be rough");
    }
    let mut weights = match (initial, params.n_outer) {
        (Some(w), o) if o > 0 => {
            if w.len() != n {
                return Err(StlError::WeightLength { expected: n, got: w.len() });
            }
            w.to_vec()
        }
        _ => vec![1.0; n],
    };

    let positions: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut cycle = vec![0.0; n + 2 * np];
    for pass in 0..=params.n_outer {
        for _ in 0..params.n_inner {
            let detrended: Vec<f64> = y.iter().zip(&trend).map(|(a, b)| a - b).collect();
            for j in 0..np {
                let sub_y: Vec<f64> = detrended.iter().skip(j).step_by(np).copied().collect();
                let sub_w: Vec<f64> = weights.iter().skip(j).step_by(np).copied().collect();
                let k = sub_y.len();
                let sub_x = &positions[..k];
                let lo = Loess::new(sub_x, &sub_y, params.seasonal_span, Degree::Linear, Some(&sub_w))?;
                for pos in 0..k + 2 {
                    cycle[j + pos * np] = lo.fit_at(pos as f64 - 1.0);
                }
            }
            let low = moving_average(&moving_average(&moving_average(&cycle, np), np), 3);
            let low = Loess::new(&positions, &low, params.lowpass_span, Degree::Linear, None)?.smooth();
            for i in 0..n {
                seasonal[i] = cycle[np + i] - low[i];
            }
            let deseasonalized: Vec<f64> = y.iter().zip(&seasonal).map(|(a, b)| a - b).collect();
            trend =
                Loess::new(&positions, &deseasonalized, params.trend_span, Degree::Linear, Some(&weights))?.smooth();
        }
        if pass < params.n_outer {
            let residuals: Vec<f64> = (0..n).map(|i| y[i] - trend[i] - seasonal[i]).collect();
            weights = robustness_weights(&residuals);
        }
    }
    let remainder = (0..n).map(|i| y[i] - trend[i] - seasonal[i]).collect();
    Ok(Stl { trend, seasonal, remainder, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_spans() {
        let p = StlParams::default();
        assert_eq!((p.period, p.seasonal_span, p.trend_span, p.lowpass_span), (12, 7, 23, 13));
        assert_eq!((p.n_inner, p.n_outer), (2, 1));
        assert_eq!(StlParams::default_lowpass_span(7), 7);
    }

    #[test]
    fn validation() {
        let y = vec![1.0; 23];
        assert_eq!(stl(&y, &StlParams::default()), Err(StlError::SeriesTooShort { len: 23, period: 12 }));
        let p = StlParams { seasonal_span: 6, ..StlParams::default() };
        assert_eq!(stl(&[0.0; 36], &p), Err(StlError::BadSpan { name: "seasonal", value: 6 }));
        let p = StlParams { trend_span: 1, ..StlParams::default() };
        assert!(matches!(stl(&[0.0; 36], &p), Err(StlError::BadSpan { name: "trend", .. })));
    }

    #[test]
    fn constant_series() {
        let y = vec![7.5; 36];
        let r = stl(&y, &StlParams::default()).unwrap();
        for i in 0..36 {
            assert!((r.trend[i] - 7.5).abs() < 1e-9);
            assert!(r.seasonal[i].abs() < 1e-9);
            assert!(r.remainder[i].abs() < 1e-9);
        }
    }

    #[test]
    fn sinusoid_plus_ramp() {
        let planted: Vec<f64> = (0..36).map(|i| (2.0 * PI * i as f64 / 12.0).sin()).collect();
        let ramp: Vec<f64> = (0..36).map(|i| 10.0 + 0.2 * i as f64).collect();
        let y: Vec<f64> = planted.iter().zip(&ramp).map(|(a, b)| a + b).collect();
        let r = stl(&y, &StlParams::default()).unwrap();
        let corr = crate::numstat::pearson(&r.seasonal, &planted).unwrap().statistic;
        assert!(corr >= 0.99, "seasonal r = {corr}");
        let range = 0.2 * 35.0;
        let dev = r.trend.iter().zip(&ramp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev <= 0.05 * range, "trend deviation {dev}");
        for i in 0..36 {
            assert!((r.trend[i] + r.seasonal[i] + r.remainder[i] - y[i]).abs() <= 1e-9 * y[i].abs());
        }
    }

    #[test]
    fn outer_zero_ignores_initial_weights() {
        let y: Vec<f64> = (0..48).map(|i| (i as f64 * 0.7).sin() * 3.0 + (i % 5) as f64).collect();
        let p = StlParams { n_outer: 0, ..StlParams::default() };
        let w: Vec<f64> = (0..48).map(|i| (i % 3) as f64 / 2.0).collect();
        assert_eq!(stl(&y, &p).unwrap(), stl_with_weights(&y, &p, Some(&w)).unwrap());
        let robust = StlParams { n_outer: 1, ..StlParams::default() };
        assert_ne!(stl(&y, &robust).unwrap(), stl_with_weights(&y, &robust, Some(&w)).unwrap());
    }

    #[test]
    fn robustness_downweights_outlier() {
        let mut y: Vec<f64> = (0..48).map(|i| (2.0 * PI * i as f64 / 12.0).cos()).collect();
        y[20] += 50.0;
        let r = stl(&y, &StlParams { n_outer: 3, ..StlParams::default() }).unwrap();
        assert!(r.weights[20] < 0.01);
        assert!(r.remainder[20] > 40.0);
    }

    #[test]
    fn bisquare_zero_scale() {
        assert_eq!(robustness_weights(&[0.0, 0.0, 0.0, 5.0]), vec![1.0; 4]);
    }
}
