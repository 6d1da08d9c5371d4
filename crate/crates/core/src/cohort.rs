//! Case / control assignment of purchasers.
//!
//! A *case* bought regular food strictly before their first target product;
//! their analysis window is the year that ends at that first target purchase.
//! A *control* bought regular food and never a target product; their window
//! is the year ending with their last regular purchase (inclusive). Everyone
//! else is excluded, with a reason.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Days, NaiveDate};
use serde::Serialize;

use crate::classify::CatalogPartition;
use crate::ingest::{PurchaseRecord, UserId};

pub const DEFAULT_WINDOW_DAYS: u32 = 365;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CohortGroup {
    Case,
    Control,
    Excluded,
}

impl CohortGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            CohortGroup::Case => "case",
            CohortGroup::Control => "control",
            CohortGroup::Excluded => "excluded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// First target purchase with no earlier regular purchase.
    TargetFirst,
    /// No regular-food purchases at all.
    NoGeneralPurchases,
    /// Fewer in-window regular purchases than the configured minimum.
    TooFewWindowPurchases,
}

/// Where a control's one-year window ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlAnchor {
    /// Window ends the day after the user's last regular purchase.
    LastGeneralPurchase,
    /// Window ends (exclusive) at a fixed date, e.g. the end of the data.
    Fixed(NaiveDate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohortConfig {
    pub window_days: u32,
    pub min_window_purchases: usize,
    pub control_anchor: ControlAnchor,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            window_days: DEFAULT_WINDOW_DAYS,
            min_window_purchases: 1,
            control_anchor: ControlAnchor::LastGeneralPurchase,
        }
    }
}

/// Half-open date interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Window {
    /// The `days` days before `end`, excluding `end` itself.
    pub fn ending_at(end: NaiveDate, days: u32) -> Self {
        Self { start: end - Days::new(days as u64), end }
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d < self.end
    }

    pub fn days(&self) -> i64 {
        (self.end - self.start).num_days()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortAssignment {
    pub user_id: UserId,
    pub group: CohortGroup,
    pub window: Option<Window>,
    pub first_target_date: Option<NaiveDate>,
    pub exclusion: Option<ExclusionReason>,
    /// Regular-food purchases inside the window, in date order.
    pub window_purchases: Vec<PurchaseRecord>,
}

impl CohortAssignment {
    fn excluded(user_id: UserId, reason: ExclusionReason, first_target_date: Option<NaiveDate>) -> Self {
        Self {
            user_id,
            group: CohortGroup::Excluded,
            window: None,
            first_target_date,
            exclusion: Some(reason),
            window_purchases: Vec::new(),
        }
    }

    pub fn is_included(&self) -> bool {
        self.group != CohortGroup::Excluded
    }
}

/// Assigns one user. `purchases` must all belong to `user_id` and be sorted by
/// date.
pub fn assign_cohort(
    user_id: &UserId,
    purchases: &[PurchaseRecord],
    partition: &CatalogPartition,
    config: &CohortConfig,
) -> CohortAssignment {
    debug_assert!(purchases.windows(2).all(|w| w[0].date <= w[1].date));
    let user_id = user_id.clone();
    let first_target = purchases.iter().find(|p| partition.is_target(&p.product_id)).map(|p| p.date);
    let general = || purchases.iter().filter(|p| partition.is_general(&p.product_id));

    let (group, window) = match first_target {
        Some(ft) => {
            if !general().any(|p| p.date < ft) {
                return CohortAssignment::excluded(user_id, ExclusionReason::TargetFirst, Some(ft));
            }
            (CohortGroup::Case, Window::ending_at(ft, config.window_days))
        }
        None => {
            let Some(last) = general().map(|p| p.date).max() else {
                return CohortAssignment::excluded(user_id, ExclusionReason::NoGeneralPurchases, None);
            };
            let end = match config.control_anchor {
                ControlAnchor::LastGeneralPurchase => last + Days::new(1),
                ControlAnchor::Fixed(end) => end,
            };
            (CohortGroup::Control, Window::ending_at(end, config.window_days))
        }
    };

    let window_purchases: Vec<PurchaseRecord> = general().filter(|p| window.contains(p.date)).cloned().collect();
    if window_purchases.len() < config.min_window_purchases.max(1) {
        return CohortAssignment::excluded(user_id, ExclusionReason::TooFewWindowPurchases, first_target);
    }
    CohortAssignment {
        user_id,
        group,
        window: Some(window),
        first_target_date: first_target,
        exclusion: None,
        window_purchases,
    }
}

/// Splits a table sorted by user into per-user slices.
pub fn by_user(purchases: &[PurchaseRecord]) -> Vec<&[PurchaseRecord]> {
    purchases.chunk_by(|a, b| a.user_id == b.user_id).collect()
}

/// Assigns every user in a loaded purchase table. Output is sorted by user id
/// regardless of thread count.
pub fn assign_all(
    purchases: &[PurchaseRecord],
    partition: &CatalogPartition,
    config: &CohortConfig,
) -> Vec<CohortAssignment> {
    let mut sorted;
    let purchases = if purchases.windows(2).all(|w| w[0] <= w[1]) {
        purchases
    } else {
        sorted = purchases.to_vec();
        sorted.sort();
        &sorted[..]
    };
    let users = by_user(purchases);
    let assign = |ps: &&[PurchaseRecord]| assign_cohort(&ps[0].user_id, ps, partition, config);
    #[cfg(feature = "parallel")]
    let mut out: Vec<CohortAssignment> = {
        use rayon::prelude::*;
        users.par_iter().map(assign).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut out: Vec<CohortAssignment> = users.iter().map(assign).collect();
    out.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CohortSummary {
    pub case: usize,
    pub control: usize,
    pub excluded: usize,
    pub total: usize,
}

impl CohortSummary {
    /// Case share among included users.
    pub fn case_fraction(&self) -> Option<f64> {
        let inc = self.case + self.control;
        (inc > 0).then(|| self.case as f64 / inc as f64)
    }
}

pub fn cohort_summary(assignments: &[CohortAssignment]) -> CohortSummary {
    let mut s = CohortSummary::default();
    for a in assignments {
        match a.group {
            CohortGroup::Case => s.case += 1,
            CohortGroup::Control => s.control += 1,
            CohortGroup::Excluded => s.excluded += 1,
        }
    }
    s.total = assignments.len();
    s
}

pub fn exclusion_counts(assignments: &[CohortAssignment]) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for a in assignments {
        if let Some(r) = a.exclusion {
            let key = match r {
                ExclusionReason::TargetFirst => "target_first",
                ExclusionReason::NoGeneralPurchases => "no_general_purchases",
                ExclusionReason::TooFewWindowPurchases => "too_few_window_purchases",
            };
            *m.entry(key).or_default() += 1;
        }
    }
    m
}

fn fmt_date(d: Option<NaiveDate>) -> String {
    d.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default()
}

/// Writes `user_id,group,window_start,window_end,first_target_date`.
pub fn write_assignments<W: Write>(w: W, assignments: &[CohortAssignment]) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["user_id", "group", "window_start", "window_end", "first_target_date"])?;
    for a in assignments {
        wtr.write_record([
            a.user_id.as_str(),
            a.group.as_str(),
            &fmt_date(a.window.map(|w| w.start)),
            &fmt_date(a.window.map(|w| w.end)),
            &fmt_date(a.first_target_date),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
