//! Monthly series construction, STL decomposition and seasonal agreement
//! between the claim and purchase sources.

mod stl;

pub use stl::{robustness_weights, stl, stl_with_weights, Stl, StlError, StlParams};

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::cohort::{CohortAssignment, CohortGroup};
use crate::ingest::{ClaimSeriesRow, YearMonth};
use crate::numstat::{pearson, StatError, TestResult};

pub const MAX_LAG: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeasonalityError {
    #[error("no cases to build an onset series from")]
    NoCases,
    #[error("empty series")]
    EmptySeries,
    #[error("series cover different months: {a_start}+{a_len} vs {b_start}+{b_len}")]
    RangeMismatch { a_start: YearMonth, a_len: usize, b_start: YearMonth, b_len: usize },
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Stat(#[from] StatError),
}

impl SeasonalityError {
    pub fn kind(&self) -> &'static str {
        match self {
            SeasonalityError::NoCases => "NoCases",
            SeasonalityError::EmptySeries => "EmptySeries",
            SeasonalityError::RangeMismatch { .. } => "RangeMismatch",
            SeasonalityError::Stl(StlError::SeriesTooShort { .. }) => "SeriesTooShort",
            SeasonalityError::Stl(StlError::BadSpan { .. }) => "BadSpan",
            SeasonalityError::Stl(_) => "StlError",
            SeasonalityError::Stat(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlySeries {
    pub start: YearMonth,
    pub values: Vec<f64>,
}

impl MonthlySeries {
    pub fn new(start: YearMonth, values: Vec<f64>) -> Self {
        MonthlySeries { start, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn month_at(&self, i: usize) -> YearMonth {
        self.start.add_months(i as i64)
    }

    /// Last covered month, or None for an empty series.
    pub fn end(&self) -> Option<YearMonth> {
        (!self.values.is_empty()).then(|| self.month_at(self.values.len() - 1))
    }

    pub fn same_range(&self, other: &MonthlySeries) -> bool {
        self.start == other.start && self.len() == other.len()
    }

    /// Restricts to `[from, to]`, padding with zeros where uncovered.
    pub fn over(&self, from: YearMonth, to: YearMonth) -> MonthlySeries {
        let len = from.months_until(to) + 1;
        let values = (0..len.max(0))
            .map(|i| {
                let idx = self.start.months_until(from.add_months(i));
                usize::try_from(idx).ok().and_then(|k| self.values.get(k)).copied().unwrap_or(0.0)
            })
            .collect();
        MonthlySeries { start: from, values }
    }
}

/// Counts of cases by month of first targeted purchase.
///
/// With `range` the series spans exactly those months (cases outside are
/// ignored); otherwise it runs from the earliest to the latest onset month.
pub fn ec_onset_series(
    assignments: &[CohortAssignment],
    range: Option<(YearMonth, YearMonth)>,
) -> Result<MonthlySeries, SeasonalityError> {
    let mut counts: BTreeMap<YearMonth, u64> = BTreeMap::new();
    for a in assignments.iter().filter(|a| a.group == CohortGroup::Case) {
        if let Some(d) = a.first_target_date {
            *counts.entry(YearMonth::of(d)).or_default() += 1;
        }
    }
    let (Some((&first, _)), Some((&last, _))) = (counts.first_key_value(), counts.last_key_value()) else {
        return Err(SeasonalityError::NoCases);
    };
    let (from, to) = range.unwrap_or((first, last));
    let len = from.months_until(to) + 1;
    if len <= 0 {
        return Err(SeasonalityError::EmptySeries);
    }
    let values = (0..len).map(|i| counts.get(&from.add_months(i)).copied().unwrap_or(0) as f64).collect();
    Ok(MonthlySeries { start: from, values })
}

/// Monthly claim counts as a series. Rows must already be contiguous, which
/// the claim loader guarantees.
pub fn claims_series(rows: &[ClaimSeriesRow]) -> Result<MonthlySeries, SeasonalityError> {
    let first = rows.first().ok_or(SeasonalityError::EmptySeries)?;
    Ok(MonthlySeries { start: first.month, values: rows.iter().map(|r| r.count as f64).collect() })
}

/// Mean seasonal value for each calendar month, January first. Months that
/// never occur are NaN.
pub fn monthly_profile(series_start: YearMonth, seasonal: &[f64]) -> [f64; 12] {
    let mut sum = [0.0; 12];
    let mut n = [0usize; 12];
    for (i, v) in seasonal.iter().enumerate() {
        let m = series_start.add_months(i as i64).month() as usize - 1;
        sum[m] += v;
        n[m] += 1;
    }
    std::array::from_fn(|m| if n[m] > 0 { sum[m] / n[m] as f64 } else { f64::NAN })
}

/// Calendar month (1–12) with the largest profile value; ties go to the
/// earlier month.
pub fn peak_month(profile: &[f64; 12]) -> u32 {
    let mut best = 0;
    for m in 1..12 {
        if profile[m] > profile[best] {
            best = m;
        }
    }
    best as u32 + 1
}

/// Correlation of a[t] with b[t + k] over the overlapping range.
pub fn lagged_correlation(a: &[f64], b: &[f64], k: i32) -> Option<f64> {
    let n = a.len().min(b.len()) as i64;
    let k = k as i64;
    let (lo, hi) = ((-k).max(0), (n - k).min(n));
    if hi - lo < 3 {
        return None;
    }
    let xa = &a[lo as usize..hi as usize];
    let xb = &b[(lo + k) as usize..(hi + k) as usize];
    pearson(xa, xb).ok().map(|t| t.statistic)
}

/// Lag in `[-max_lag, max_lag]` with the highest correlation; ties go to
/// the smaller |k|, then to the negative side.
pub fn best_lag(a: &[f64], b: &[f64], max_lag: i32) -> (Option<i32>, Vec<(i32, Option<f64>)>) {
    let scan: Vec<(i32, Option<f64>)> = (-max_lag..=max_lag).map(|k| (k, lagged_correlation(a, b, k))).collect();
    let mut order: Vec<&(i32, Option<f64>)> = scan.iter().filter(|(_, r)| r.is_some()).collect();
    order.sort_by_key(|(k, _)| (k.abs(), *k));
    let mut best: Option<(i32, f64)> = None;
    for &&(k, r) in &order {
        let r = r.unwrap();
        if best.map_or(true, |(_, b)| r > b) {
            best = Some((k, r));
        }
    }
    (best.map(|b| b.0), scan)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonalAgreement {
    /// Correlation of the two seasonal components, month by month.
    pub correlation: TestResult,
    /// Correlation of the calendar-month averaged profiles.
    pub profile_correlation: Option<TestResult>,
    pub profile_a: [f64; 12],
    pub profile_b: [f64; 12],
    pub peak_month_a: u32,
    pub peak_month_b: u32,
    pub best_lag: Option<i32>,
    pub lag_scan: Vec<(i32, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposed {
    pub series: MonthlySeries,
    pub stl: Stl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub a: Decomposed,
    pub b: Decomposed,
    pub agreement: SeasonalAgreement,
}

/// Decomposes both series and compares their seasonal components.
pub fn seasonal_agreement(
    a: &MonthlySeries,
    b: &MonthlySeries,
    params: &StlParams,
) -> Result<AgreementReport, SeasonalityError> {
    if !a.same_range(b) {
        return Err(SeasonalityError::RangeMismatch {
            a_start: a.start,
            a_len: a.len(),
            b_start: b.start,
            b_len: b.len(),
        });
    }
    let sa = stl(&a.values, params)?;
    let sb = stl(&b.values, params)?;
    let correlation = pearson(&sa.seasonal, &sb.seasonal)?;
    let profile_a = monthly_profile(a.start, &sa.seasonal);
    let profile_b = monthly_profile(b.start, &sb.seasonal);
    let profile_correlation = pearson(&profile_a, &profile_b).ok();
    let (best, lag_scan) = best_lag(&sa.seasonal, &sb.seasonal, MAX_LAG);
    let agreement = SeasonalAgreement {
        correlation,
        profile_correlation,
        profile_a,
        profile_b,
        peak_month_a: peak_month(&profile_a),
        peak_month_b: peak_month(&profile_b),
        best_lag: best,
        lag_scan,
    };
    Ok(AgreementReport {
        a: Decomposed { series: a.clone(), stl: sa },
        b: Decomposed { series: b.clone(), stl: sb },
        agreement,
    })
}

pub fn write_stl<W: Write>(w: W, d: &Decomposed) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["month", "observed", "trend", "seasonal", "remainder"])?;
    for (i, y) in d.series.values.iter().enumerate() {
        wtr.write_record([
            d.series.month_at(i).to_string(),
            y.to_string(),
            d.stl.trend[i].to_string(),
            d.stl.seasonal[i].to_string(),
            d.stl.remainder[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `month,claims,ec` with both seasonal components over time.
pub fn write_seasonal_components<W: Write>(w: W, report: &AgreementReport) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["month", "claims", "ec"])?;
    for (i, (a, b)) in report.a.stl.seasonal.iter().zip(&report.b.stl.seasonal).enumerate() {
        wtr.write_record([report.a.series.month_at(i).to_string(), a.to_string(), b.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_profiles<W: Write>(w: W, agreement: &SeasonalAgreement) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["month", "claims", "ec"])?;
    for m in 0..12 {
        wtr.write_record([
            (m + 1).to_string(),
            agreement.profile_a[m].to_string(),
            agreement.profile_b[m].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::Window;
    use chrono::NaiveDate;
    use std::f64::consts::PI;

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn case(id: &str, date: &str) -> CohortAssignment {
        let d: NaiveDate = date.parse().unwrap();
        CohortAssignment {
            user_id: id.into(),
            group: CohortGroup::Case,
            window: Some(Window::ending_at(d, 365)),
            first_target_date: Some(d),
            exclusion: None,
            window_purchases: vec![],
        }
    }

    #[test]
    fn onset_series_counts_by_month() {
        let a =
            vec![case("a", "2018-01-03"), case("b", "2018-01-20"), case("c", "2018-01-31"), case("d", "2018-03-01")];
        let s = ec_onset_series(&a, None).unwrap();
        assert_eq!(s.start, ym("2018-01"));
        assert_eq!(s.values, vec![3.0, 0.0, 1.0]);
        let s = ec_onset_series(&a, Some((ym("2017-12"), ym("2018-04")))).unwrap();
        assert_eq!(s.values, vec![0.0, 3.0, 0.0, 1.0, 0.0]);
        assert_eq!(ec_onset_series(&[], None), Err(SeasonalityError::NoCases));
    }

    #[test]
    fn series_window() {
        let s = MonthlySeries::new(ym("2020-03"), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.end(), Some(ym("2020-05")));
        assert_eq!(s.over(ym("2020-02"), ym("2020-04")).values, vec![0.0, 1.0, 2.0]);
    }

    fn seasonal_series(n: usize, shift: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                20.0 + 0.1 * i as f64
                    + 5.0 * (2.0 * PI * (i as f64 - shift) / 12.0).cos()
                    + ((i * 7919) % 13) as f64 * 0.1
            })
            .collect()
    }

    #[test]
    fn identical_series_agree() {
        let a = MonthlySeries::new(ym("2018-01"), seasonal_series(36, 0.0));
        let r = seasonal_agreement(&a, &a, &StlParams::default()).unwrap();
        assert!((r.agreement.correlation.statistic - 1.0).abs() < 1e-12);
        assert_eq!(r.agreement.best_lag, Some(0));
        assert_eq!(r.agreement.peak_month_a, 1);
    }

    #[test]
    fn shifted_series_lag_two() {
        let x = seasonal_series(38, 0.0);
        let a = MonthlySeries::new(ym("2018-01"), x[2..].to_vec());
        let b = MonthlySeries::new(ym("2018-01"), x[..36].to_vec());
        let r = seasonal_agreement(&a, &b, &StlParams::default()).unwrap();
        assert_eq!(r.agreement.best_lag, Some(2));
    }

    #[test]
    fn affine_invariance_and_mismatch() {
        let a = MonthlySeries::new(ym("2018-01"), seasonal_series(36, 0.0));
        let b = MonthlySeries::new(ym("2018-01"), seasonal_series(36, 1.0));
        let r1 = seasonal_agreement(&a, &b, &StlParams::default()).unwrap();
        let scaled = MonthlySeries::new(b.start, b.values.iter().map(|v| 3.0 * v + 11.0).collect());
        let r2 = seasonal_agreement(&a, &scaled, &StlParams::default()).unwrap();
        assert!((r1.agreement.correlation.statistic - r2.agreement.correlation.statistic).abs() < 1e-9);
        let c = MonthlySeries::new(ym("2018-02"), seasonal_series(36, 0.0));
        assert!(matches!(
            seasonal_agreement(&a, &c, &StlParams::default()),
            Err(SeasonalityError::RangeMismatch { .. })
        ));
    }

    #[test]
    fn lag_tie_prefers_smaller_shift() {
        let a = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        let (best, _) = best_lag(&a, &a, 3);
        assert_eq!(best, Some(0));
    }

    #[test]
    fn profile_and_peak() {
        let seasonal: Vec<f64> = (0..24).map(|i| if i % 12 == 11 { 2.0 } else { 0.0 }).collect();
        let p = monthly_profile(ym("2019-01"), &seasonal);
        assert_eq!(peak_month(&p), 12);
        let p = monthly_profile(ym("2019-03"), &seasonal);
        assert_eq!(peak_month(&p), 2);
    }
}
