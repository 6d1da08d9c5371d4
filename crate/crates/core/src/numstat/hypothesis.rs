use serde::Serialize;

use super::special::{chi_squared_sf, normal_two_sided_p, student_t_two_sided_p};
use super::StatError;

/// Outcome of a test: the statistic (chi², r, rho or Z), its p-value and,
/// where meaningful, the degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: Option<f64>,
}

impl TestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Rows are exposed/unexposed, columns are case/control.
///
/// ```text
///             case  control
/// exposed       a      b
/// unexposed     c      d
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TwoByTwoTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl TwoByTwoTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        TwoByTwoTable { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn swap_rows(self) -> Self {
        TwoByTwoTable { a: self.c, b: self.d, c: self.a, d: self.b }
    }

    pub fn swap_cols(self) -> Self {
        TwoByTwoTable { a: self.b, b: self.a, c: self.d, d: self.c }
    }

    /// Case fraction among exposed rows, or None when nobody is exposed.
    pub fn exposed_rate(&self) -> Option<f64> {
        let n = self.a + self.b;
        (n > 0).then(|| self.a as f64 / n as f64)
    }

    pub fn unexposed_rate(&self) -> Option<f64> {
        let n = self.c + self.d;
        (n > 0).then(|| self.c as f64 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChiSquaredOptions {
    pub yates: bool,
}

pub fn chi_squared_2x2(t: &TwoByTwoTable) -> Result<TestResult, StatError> {
    chi_squared_2x2_with(t, ChiSquaredOptions::default())
}

pub fn chi_squared_2x2_with(t: &TwoByTwoTable, opts: ChiSquaredOptions) -> Result<TestResult, StatError> {
    let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
    let rows = [a + b, c + d];
    let cols = [a + c, b + d];
    if rows.iter().chain(cols.iter()).any(|&m| m == 0.0) {
        return Err(StatError::DegenerateMargin);
    }
    let n = a + b + c + d;
    let observed = [[a, b], [c, d]];
    let mut stat = 0.0;
    for (i, row) in observed.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = rows[i] * cols[j] / n;
            let mut diff = (o - e).abs();
            if opts.yates {
                diff = (diff - 0.5).max(0.0);
            }
            stat += diff * diff / e;
        }
    }
    let p = chi_squared_sf(stat, 1.0)?;
    Ok(TestResult { statistic: stat, p_value: p, df: Some(1.0) })
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatError> {
    if x.len() != y.len() {
        return Err(StatError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 3 {
        return Err(StatError::TooFewPoints { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatError::Domain("non-finite value in correlation input".into()));
    }
    Ok(())
}

fn correlation(x: &[f64], y: &[f64]) -> Result<f64, StatError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(StatError::ZeroVariance("y"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn correlation_result(r: f64, n: usize) -> Result<TestResult, StatError> {
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        student_t_two_sided_p(t, df)?
    };
    Ok(TestResult { statistic: r, p_value: p, df: Some(df) })
}

/// Pearson's r with a two-sided p-value from Student's t on n − 2 df.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult, StatError> {
    check_pair(x, y)?;
    let r = correlation(x, y)?;
    correlation_result(r, x.len())
}

/// Ranks starting at 1; tied values share the mean of their ranks.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && v[idx[j]] == v[idx[i]] {
            j += 1;
        }
        let mean = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = mean;
        }
        i = j;
    }
    ranks
}

/// Spearman's rho (Pearson on average ranks) with the same t-based p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult, StatError> {
    check_pair(x, y)?;
    let r = correlation(&average_ranks(x), &average_ranks(y))?;
    correlation_result(r, x.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendGroup {
    pub score: f64,
    pub cases: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendTable {
    groups: Vec<TrendGroup>,
}

impl TrendTable {
    pub fn new(groups: Vec<TrendGroup>) -> Result<Self, StatError> {
        if groups.len() < 2 {
            return Err(StatError::InvalidTable(format!("need at least 2 groups, got {}", groups.len())));
        }
        for (i, g) in groups.iter().enumerate() {
            if !g.score.is_finite() {
                return Err(StatError::InvalidTable(format!("group {i}: non-finite score")));
            }
            if g.cases > g.total {
                return Err(StatError::InvalidTable(format!("group {i}: {} cases exceed total {}", g.cases, g.total)));
            }
            if i > 0 && g.score <= groups[i - 1].score {
                return Err(StatError::InvalidTable("scores must be strictly increasing".into()));
            }
        }
        Ok(TrendTable { groups })
    }

    /// Builds a table with scores 0, 1, 2, ...
    pub fn with_integer_scores(counts: &[(u64, u64)]) -> Result<Self, StatError> {
        Self::new(
            counts
                .iter()
                .enumerate()
                .map(|(i, &(cases, total))| TrendGroup { score: i as f64, cases, total })
                .collect(),
        )
    }

    pub fn groups(&self) -> &[TrendGroup] {
        &self.groups
    }
}

/// Cochran–Armitage test for a linear trend in proportions; the statistic is Z.
pub fn cochran_armitage(t: &TrendTable) -> Result<TestResult, StatError> {
    let n: f64 = t.groups.iter().map(|g| g.total as f64).sum();
    let r: f64 = t.groups.iter().map(|g| g.cases as f64).sum();
    if n == 0.0 {
        return Err(StatError::DegenerateVariance);
    }
    let pbar = r / n;
    if pbar <= 0.0 || pbar >= 1.0 {
        return Err(StatError::DegenerateVariance);
    }
    let (mut num, mut s2n, mut sn) = (0.0, 0.0, 0.0);
    for g in &t.groups {
        let (ni, ri) = (g.total as f64, g.cases as f64);
        num += g.score * (ri - ni * pbar);
        s2n += g.score * g.score * ni;
        sn += g.score * ni;
    }
    let bracket = s2n - sn * sn / n;
    // relative guard: the bracket is a difference of two O(s²N) terms
    if bracket <= 1e-12 * s2n.max(f64::MIN_POSITIVE) {
        return Err(StatError::DegenerateVariance);
    }
    let z = num / (pbar * (1.0 - pbar) * bracket).sqrt();
    Ok(TestResult { statistic: z, p_value: normal_two_sided_p(z), df: None })
}
