//! Independent reference implementations used to check the library kernels.
//! Nothing here calls into `proxyval`.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-squared of a 2x2 table from the closed form
/// N(ad - bc)^2 / (row1 row2 col1 col2), with its df = 1 upper tail.
pub fn chi2_2x2(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let n = a + b + c + d;
    let stat = n * (a * d - b * c).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d));
    let p = 1.0 - ChiSquared::new(1.0).unwrap().cdf(stat);
    (stat, p)
}

pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(a, x)
}

/// Cochran-Armitage Z written out term by term.
pub fn trend_z(groups: &[(f64, u64, u64)]) -> f64 {
    let n: f64 = groups.iter().map(|g| g.2 as f64).sum();
    let r: f64 = groups.iter().map(|g| g.1 as f64).sum();
    let pbar = r / n;
    let mut num = 0.0;
    let mut s2n = 0.0;
    let mut sn = 0.0;
    for &(s, ri, ni) in groups {
        num += s * (ri as f64 - ni as f64 * pbar);
        s2n += s * s * ni as f64;
        sn += s * ni as f64;
    }
    num / (pbar * (1.0 - pbar) * (s2n - sn * sn / n)).sqrt()
}

/// Two-sided permutation p of the trend statistic sum(s_i r_i): outcomes are
/// shuffled across subjects with group sizes fixed. Ties with the observed
/// deviation count one half (mid-p). Returns the estimate and its
/// Monte-Carlo standard error.
pub fn trend_permutation_p<R: Rng>(groups: &[(f64, u64, u64)], resamples: usize, rng: &mut R) -> (f64, f64) {
    let mut outcomes: Vec<bool> = Vec::new();
    let mut scores: Vec<f64> = Vec::new();
    for &(s, r, n) in groups {
        outcomes.extend((0..n).map(|i| i < r));
        scores.extend(std::iter::repeat_n(s, n as usize));
    }
    let stat = |o: &[bool]| -> f64 { o.iter().zip(&scores).filter(|(&y, _)| y).map(|(_, s)| s).sum() };
    let n = outcomes.len() as f64;
    let cases = outcomes.iter().filter(|&&y| y).count() as f64;
    let expected = cases / n * scores.iter().sum::<f64>();
    let observed = (stat(&outcomes) - expected).abs();
    let tol = 1e-9 * observed.max(1.0);
    let mut hits = 0.0;
    for _ in 0..resamples {
        outcomes.shuffle(rng);
        let d = (stat(&outcomes) - expected).abs();
        if d > observed + tol {
            hits += 1.0;
        } else if d >= observed - tol {
            hits += 0.5;
        }
    }
    let p = hits / resamples as f64;
    (p, (p * (1.0 - p) / resamples as f64).sqrt())
}

/// Local fit at `x0`: the `span` points nearest to `x0` (span < n) get
/// tricube weights on distance over the largest of their distances, times the
/// optional robustness weights, and the normal equations of the weighted
/// least-squares line (or mean) in x - x0 are solved by Cramer's rule.
pub fn loess_at(xs: &[f64], ys: &[f64], span: usize, degree: usize, robust: Option<&[f64]>, x0: f64) -> f64 {
    assert!(span <= xs.len());
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| (xs[i] - x0).abs().total_cmp(&(xs[j] - x0).abs()));
    let near = &order[..span];
    let h = near.iter().map(|&i| (xs[i] - x0).abs()).fold(0.0, f64::max);
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &i in near {
        let u = (xs[i] - x0).abs() / h;
        let k = if u < 1.0 { (1.0 - u.powi(3)).powi(3) } else { 0.0 };
        let w = k * robust.map_or(1.0, |r| r[i]);
        let dx = xs[i] - x0;
        s0 += w;
        s1 += w * dx;
        s2 += w * dx * dx;
        t0 += w * ys[i];
        t1 += w * dx * ys[i];
    }
    if degree == 0 {
        return t0 / s0;
    }
    // the line is fitted in x - x0, so its value at x0 is the intercept
    (t0 * s2 - s1 * t1) / (s0 * s2 - s1 * s1)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}
